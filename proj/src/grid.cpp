#include "surflow/grid.hpp"

namespace surflow {

namespace {

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

Stencil first_difference(int n, int i, bool wrap, double h) {
  Stencil s;
  if (n <= 1) return s;
  if (wrap) {
    s.add(wrap_index(i - 1, n), -0.5 / h);
    s.add(wrap_index(i + 1, n), 0.5 / h);
    return s;
  }
  if (n == 2) {
    s.add(0, -1.0 / h);
    s.add(1, 1.0 / h);
    return s;
  }
  if (i == 0) {
    s.add(0, -1.5 / h);
    s.add(1, 2.0 / h);
    s.add(2, -0.5 / h);
  } else if (i == n - 1) {
    s.add(n - 1, 1.5 / h);
    s.add(n - 2, -2.0 / h);
    s.add(n - 3, 0.5 / h);
  } else {
    s.add(i - 1, -0.5 / h);
    s.add(i + 1, 0.5 / h);
  }
  return s;
}

Stencil second_difference(int n, int i, bool wrap, double h) {
  Stencil s;
  const double inv = 1.0 / (h * h);
  if (n <= 2) return s;
  if (wrap) {
    s.add(wrap_index(i - 1, n), inv);
    s.add(i, -2.0 * inv);
    s.add(wrap_index(i + 1, n), inv);
    return s;
  }
  if (i > 0 && i < n - 1) {
    s.add(i - 1, inv);
    s.add(i, -2.0 * inv);
    s.add(i + 1, inv);
    return s;
  }
  const int dir = i == 0 ? 1 : -1;
  if (n == 3) {
    s.add(i, inv);
    s.add(i + dir, -2.0 * inv);
    s.add(i + 2 * dir, inv);
    return s;
  }
  s.add(i, 2.0 * inv);
  s.add(i + dir, -5.0 * inv);
  s.add(i + 2 * dir, 4.0 * inv);
  s.add(i + 3 * dir, -1.0 * inv);
  return s;
}

Stencil forward_difference(int n, int i, bool wrap, double h) {
  Stencil s;
  if (n <= 1) return s;
  if (wrap) {
    s.add(i, -1.0 / h);
    s.add(wrap_index(i + 1, n), 1.0 / h);
  } else if (i < n - 1) {
    s.add(i, -1.0 / h);
    s.add(i + 1, 1.0 / h);
  } else {
    s.add(i - 1, -1.0 / h);
    s.add(i, 1.0 / h);
  }
  return s;
}

}  // namespace surflow
