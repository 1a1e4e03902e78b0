#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace surflow {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct Vec2 {
  std::array<double, 2> v{};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec2& operator+=(const Vec2& o) { v[0] += o.v[0]; v[1] += o.v[1]; return *this; }
  Vec2& operator*=(double s) { v[0] *= s; v[1] *= s; return *this; }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { a.v[0] -= b.v[0]; a.v[1] -= b.v[1]; return a; }
  friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Dense 2x2 matrix, row-major, addressed as m(row, col).
struct Mat2 {
  std::array<double, 4> v{};

  double& operator()(int r, int c) { return v[r * 2 + c]; }
  double operator()(int r, int c) const { return v[r * 2 + c]; }

  static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
  double det() const { return v[0] * v[3] - v[1] * v[2]; }
  double trace() const { return v[0] + v[3]; }

  Mat2& operator+=(const Mat2& o) { for (int i = 0; i < 4; ++i) v[i] += o.v[i]; return *this; }
  Mat2& operator*=(double s) { for (auto& e : v) e *= s; return *this; }
  friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend Mat2 operator*(Mat2 a, double s) { return a *= s; }
  friend Mat2 operator*(double s, Mat2 a) { return a *= s; }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  return r;
}

inline Mat2 transpose(const Mat2& a) { return Mat2{{a.v[0], a.v[2], a.v[1], a.v[3]}}; }

inline Mat2 inverse(const Mat2& a) {
  const double inv = 1.0 / a.det();
  return Mat2{{a.v[3] * inv, -a.v[1] * inv, -a.v[2] * inv, a.v[0] * inv}};
}

/// Dense 3x3 matrix over space-time indices {0 = t, 1 = x1, 2 = x2}.
struct Mat3 {
  std::array<double, 9> v{};

  double& operator()(int r, int c) { return v[r * 3 + c]; }
  double operator()(int r, int c) const { return v[r * 3 + c]; }
};

/// Three-index space-time tensor T(a, b, c), each index in {0, 1, 2}.
/// Christoffel symbols are stored as T(j, i, k) = Gamma^j_{ik}, connection
/// coefficients as T(j, i, k) = omega^j_{ik}.
struct Tensor3 {
  std::array<double, 27> v{};

  double& operator()(int a, int b, int c) { return v[(a * 3 + b) * 3 + c]; }
  double operator()(int a, int b, int c) const { return v[(a * 3 + b) * 3 + c]; }

  Tensor3& operator+=(const Tensor3& o) { for (int i = 0; i < 27; ++i) v[i] += o.v[i]; return *this; }
  Tensor3& operator*=(double s) { for (auto& e : v) e *= s; return *this; }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
};

}  // namespace surflow
