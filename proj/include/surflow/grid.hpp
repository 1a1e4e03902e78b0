#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace surflow {

/// Space-time axes. Time is never periodic.
enum class Axis : int { t = 0, x1 = 1, x2 = 2 };

inline constexpr std::array<Axis, 3> kAxes = {Axis::t, Axis::x1, Axis::x2};

/// Regular grid over [0,T] x M. Points are stored in [t][x1][x2] order.
struct GridShape {
  int nt = 1, n1 = 1, n2 = 1;
  double ht = 1.0, h1 = 1.0, h2 = 1.0;
  bool wrap1 = false, wrap2 = false;

  std::size_t size() const { return static_cast<std::size_t>(nt) * n1 * n2; }
  std::size_t frame_size() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t index(int t, int i1, int i2) const {
    return (static_cast<std::size_t>(t) * n1 + i1) * n2 + i2;
  }

  int extent(Axis a) const { return a == Axis::t ? nt : (a == Axis::x1 ? n1 : n2); }
  double step(Axis a) const { return a == Axis::t ? ht : (a == Axis::x1 ? h1 : h2); }
  bool wraps(Axis a) const { return a == Axis::x1 ? wrap1 : (a == Axis::x2 ? wrap2 : false); }

  /// Same dimensions and periodicity (step sizes are not compared).
  bool same_layout(const GridShape& o) const {
    return nt == o.nt && n1 == o.n1 && n2 == o.n2 && wrap1 == o.wrap1 && wrap2 == o.wrap2;
  }
};

struct GridPoint {
  int t = 0, i1 = 0, i2 = 0;

  int along(Axis a) const { return a == Axis::t ? t : (a == Axis::x1 ? i1 : i2); }
  GridPoint with(Axis a, int idx) const {
    GridPoint p = *this;
    (a == Axis::t ? p.t : (a == Axis::x1 ? p.i1 : p.i2)) = idx;
    return p;
  }
};

inline GridPoint grid_point(const GridShape& s, std::size_t linear) {
  const auto fs = s.frame_size();
  const int t = static_cast<int>(linear / fs);
  const auto rem = linear % fs;
  return {t, static_cast<int>(rem / s.n2), static_cast<int>(rem % s.n2)};
}

inline std::size_t linear_index(const GridShape& s, const GridPoint& p) {
  return s.index(p.t, p.i1, p.i2);
}

/// Finite-difference weights along one axis; `index` holds absolute positions.
/// The weights of every stencil built here sum to zero.
struct Stencil {
  int count = 0;
  std::array<int, 4> index{};
  std::array<double, 4> weight{};

  void add(int i, double w) {
    for (int k = 0; k < count; ++k)
      if (index[k] == i) {
        weight[k] += w;
        return;
      }
    index[count] = i;
    weight[count] = w;
    ++count;
  }
};

/// Second-order first derivative: central in the interior and across periodic
/// wraps, one-sided three-point at non-periodic ends. Degrades to first order
/// when only two samples exist and to zero for a single sample.
Stencil first_difference(int n, int i, bool wrap, double h);

/// Second derivative: three-point interior/periodic, four-point one-sided at
/// non-periodic ends (three-point when n == 3).
Stencil second_difference(int n, int i, bool wrap, double h);

/// Forward difference (backward at the last node of a non-periodic axis).
Stencil forward_difference(int n, int i, bool wrap, double h);

template <class T>
T apply_stencil(const std::vector<T>& field, const GridShape& s, Axis axis,
                const GridPoint& p, const Stencil& st) {
  // Difference stencils have weights summing to zero; differencing against the
  // first tap makes the result exactly zero on constant fields.
  T acc{};
  if (st.count == 0) return acc;
  const T& ref = field[linear_index(s, p.with(axis, st.index[0]))];
  for (int k = 1; k < st.count; ++k) {
    T d = field[linear_index(s, p.with(axis, st.index[k]))];
    d += ref * -1.0;
    acc += d * st.weight[k];
  }
  return acc;
}

template <class T>
T axis_derivative(const std::vector<T>& field, const GridShape& s, Axis axis,
                  const GridPoint& p) {
  return apply_stencil(field, s, axis, p,
                       first_difference(s.extent(axis), p.along(axis), s.wraps(axis),
                                        s.step(axis)));
}

template <class T>
T axis_second_derivative(const std::vector<T>& field, const GridShape& s, Axis axis,
                         const GridPoint& p) {
  return apply_stencil(field, s, axis, p,
                       second_difference(s.extent(axis), p.along(axis), s.wraps(axis),
                                         s.step(axis)));
}

}  // namespace surflow
