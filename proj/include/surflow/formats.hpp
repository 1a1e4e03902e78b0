#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "surflow/geometry.hpp"
#include "surflow/imaging.hpp"

namespace surflow {

/// "SRF1" sampled surface: f values only; derivatives are recomputed on load.
void write_srf1(const std::string& path, const SurfaceGrid& s);
SurfaceGrid read_srf1(const std::string& path);

/// One frame of pullback flow as a Middlebury .flo file: width = n2,
/// height = n1, row-major over (x1, x2), pairs (u~^1, u~^2) as float32.
struct FloFrame {
  int n1 = 0, n2 = 0;
  std::vector<Vec2> u;  // [x1][x2]
};
void write_flo(const std::string& path, const FloFrame& f);
FloFrame read_flo(const std::string& path);

/// "FL3D" ambient flow: magic, int32 nt n1 n2, float32 (x, y, z) per point.
struct AmbientFlow {
  int nt = 0, n1 = 0, n2 = 0;
  std::vector<Vec3> u;
};
void write_fl3d(const std::string& path, const AmbientFlow& f);
AmbientFlow read_fl3d(const std::string& path);

struct RgbImage {
  int rows = 0, cols = 0;
  std::vector<std::array<std::uint8_t, 3>> pixels;
};
void write_ppm(const std::string& path, const RgbImage& img);
RgbImage read_ppm(const std::string& path);

/// 8-bit (maxval 255) or 16-bit (maxval 65535) binary PGM from values in [0, 1].
void write_pgm(const std::string& path, int rows, int cols, const std::vector<double>& values,
               int maxval = 255);

/// Middlebury color wheel (55 hues); `vertical`/`horizontal` are already
/// normalized so that magnitude 1 is fully saturated.
std::array<std::uint8_t, 3> flow_color(double horizontal, double vertical);

/// Colors a flow frame; magnitudes are divided by their 99th percentile.
/// Rows follow x1, columns x2; the horizontal component is u~^2.
RgbImage colorize_flow(const FloFrame& f);

/// Grey map of a scalar field scaled by `max_value` (0 -> black).
RgbImage grey_map(int rows, int cols, const std::vector<double>& v, double max_value);

}  // namespace surflow
