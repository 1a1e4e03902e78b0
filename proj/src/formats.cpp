#include "surflow/formats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "surflow/errors.hpp"

namespace surflow {

namespace {

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("truncated file " + path);
  return v;
}

void expect_magic(std::istream& in, const char* magic, const std::string& path) {
  char buf[4] = {};
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0)
    throw FormatError(std::string("bad ") + magic + " magic in " + path);
}

void expect_end(std::istream& in, const std::string& path) {
  if (in.peek() != EOF) throw FormatError("trailing data in " + path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

}  // namespace

void write_srf1(const std::string& path, const SurfaceGrid& s) {
  auto out = open_out(path);
  out.write("SRF1", 4);
  const GridShape& g = s.shape;
  put<std::int32_t>(out, g.nt);
  put<std::int32_t>(out, g.n1);
  put<std::int32_t>(out, g.n2);
  put<std::uint8_t>(out, g.wrap1 ? 1 : 0);
  put<std::uint8_t>(out, g.wrap2 ? 1 : 0);
  put<double>(out, g.ht);
  put<double>(out, g.h1);
  put<double>(out, g.h2);
  for (const Vec3& f : s.f) {
    put(out, f.x);
    put(out, f.y);
    put(out, f.z);
  }
  if (!out) throw FormatError("write failed for " + path);
}

SurfaceGrid read_srf1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "SRF1", path);
  GridShape g;
  g.nt = get<std::int32_t>(in, path);
  g.n1 = get<std::int32_t>(in, path);
  g.n2 = get<std::int32_t>(in, path);
  g.wrap1 = get<std::uint8_t>(in, path) != 0;
  g.wrap2 = get<std::uint8_t>(in, path) != 0;
  g.ht = get<double>(in, path);
  g.h1 = get<double>(in, path);
  g.h2 = get<double>(in, path);
  if (g.nt <= 0 || g.n1 <= 0 || g.n2 <= 0 || !(g.ht > 0 && g.h1 > 0 && g.h2 > 0))
    throw FormatError("bad SRF1 header in " + path);
  SurfaceGrid s;
  s.resize(g);
  for (Vec3& f : s.f) {
    f.x = get<double>(in, path);
    f.y = get<double>(in, path);
    f.z = get<double>(in, path);
  }
  expect_end(in, path);
  recompute_derivatives(s);
  return s;
}

namespace {
constexpr float kFloMagic = 202021.25f;
}

void write_flo(const std::string& path, const FloFrame& f) {
  if (f.u.size() != static_cast<std::size_t>(f.n1) * f.n2) throw ShapeMismatch(".flo frame size mismatch");
  auto out = open_out(path);
  put<float>(out, kFloMagic);
  put<std::int32_t>(out, f.n2);
  put<std::int32_t>(out, f.n1);
  for (const Vec2& u : f.u) {
    put<float>(out, static_cast<float>(u[0]));
    put<float>(out, static_cast<float>(u[1]));
  }
  if (!out) throw FormatError("write failed for " + path);
}

FloFrame read_flo(const std::string& path) {
  auto in = open_in(path);
  if (get<float>(in, path) != kFloMagic) throw FormatError("bad .flo magic in " + path);
  FloFrame f;
  f.n2 = get<std::int32_t>(in, path);
  f.n1 = get<std::int32_t>(in, path);
  if (f.n1 <= 0 || f.n2 <= 0) throw FormatError("bad .flo dimensions in " + path);
  f.u.resize(static_cast<std::size_t>(f.n1) * f.n2);
  for (Vec2& u : f.u) {
    u[0] = get<float>(in, path);
    u[1] = get<float>(in, path);
  }
  expect_end(in, path);
  return f;
}

void write_fl3d(const std::string& path, const AmbientFlow& f) {
  if (f.u.size() != static_cast<std::size_t>(f.nt) * f.n1 * f.n2) throw ShapeMismatch("FL3D size mismatch");
  auto out = open_out(path);
  out.write("FL3D", 4);
  put<std::int32_t>(out, f.nt);
  put<std::int32_t>(out, f.n1);
  put<std::int32_t>(out, f.n2);
  for (const Vec3& u : f.u) {
    put<float>(out, static_cast<float>(u.x));
    put<float>(out, static_cast<float>(u.y));
    put<float>(out, static_cast<float>(u.z));
  }
  if (!out) throw FormatError("write failed for " + path);
}

AmbientFlow read_fl3d(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "FL3D", path);
  AmbientFlow f;
  f.nt = get<std::int32_t>(in, path);
  f.n1 = get<std::int32_t>(in, path);
  f.n2 = get<std::int32_t>(in, path);
  if (f.nt <= 0 || f.n1 <= 0 || f.n2 <= 0) throw FormatError("bad FL3D dimensions in " + path);
  f.u.resize(static_cast<std::size_t>(f.nt) * f.n1 * f.n2);
  for (Vec3& u : f.u) {
    u.x = get<float>(in, path);
    u.y = get<float>(in, path);
    u.z = get<float>(in, path);
  }
  expect_end(in, path);
  return f;
}

void write_ppm(const std::string& path, const RgbImage& img) {
  auto out = open_out(path);
  out << "P6\n" << img.cols << ' ' << img.rows << "\n255\n";
  for (const auto& px : img.pixels) out.write(reinterpret_cast<const char*>(px.data()), 3);
  if (!out) throw FormatError("write failed for " + path);
}

RgbImage read_ppm(const std::string& path) {
  auto in = open_in(path);
  std::string magic;
  int maxval = 0;
  RgbImage img;
  if (!(in >> magic >> img.cols >> img.rows >> maxval) || magic != "P6" || maxval != 255 ||
      img.cols <= 0 || img.rows <= 0)
    throw FormatError("unsupported PPM in " + path);
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.rows) * img.cols);
  for (auto& px : img.pixels) {
    in.read(reinterpret_cast<char*>(px.data()), 3);
    if (!in) throw FormatError("truncated PPM " + path);
  }
  return img;
}

void write_pgm(const std::string& path, int rows, int cols, const std::vector<double>& values, int maxval) {
  if (values.size() != static_cast<std::size_t>(rows) * cols) throw ShapeMismatch("PGM size mismatch");
  if (maxval != 255 && maxval != 65535) throw InvalidConfig("PGM maxval must be 255 or 65535");
  auto out = open_out(path);
  out << "P5\n" << cols << ' ' << rows << '\n' << maxval << '\n';
  for (double v : values) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (maxval == 255) {
      out.put(static_cast<char>(q));
    } else {
      out.put(static_cast<char>(q >> 8));
      out.put(static_cast<char>(q & 0xff));
    }
  }
  if (!out) throw FormatError("write failed for " + path);
}

namespace {

std::vector<std::array<double, 3>> color_wheel() {
  constexpr int RY = 15, YG = 6, GC = 4, CB = 11, BM = 13, MR = 6;
  std::vector<std::array<double, 3>> w;
  for (int i = 0; i < RY; ++i) w.push_back({255, 255.0 * i / RY, 0});
  for (int i = 0; i < YG; ++i) w.push_back({255 - 255.0 * i / YG, 255, 0});
  for (int i = 0; i < GC; ++i) w.push_back({0, 255, 255.0 * i / GC});
  for (int i = 0; i < CB; ++i) w.push_back({0, 255 - 255.0 * i / CB, 255});
  for (int i = 0; i < BM; ++i) w.push_back({255.0 * i / BM, 0, 255});
  for (int i = 0; i < MR; ++i) w.push_back({255, 0, 255 - 255.0 * i / MR});
  return w;
}

}  // namespace

std::array<std::uint8_t, 3> flow_color(double u, double v) {
  static const auto wheel = color_wheel();
  const int ncols = static_cast<int>(wheel.size());
  const double rad = std::hypot(u, v);
  const double a = std::atan2(-v, -u) / std::numbers::pi;
  const double fk = (a + 1.0) / 2.0 * (ncols - 1);
  const int k0 = static_cast<int>(std::floor(fk));
  const int k1 = (k0 + 1) % ncols;
  const double f = fk - k0;
  std::array<std::uint8_t, 3> px{};
  for (int c = 0; c < 3; ++c) {
    double col = ((1.0 - f) * wheel[k0][c] + f * wheel[k1][c]) / 255.0;
    col = rad <= 1.0 ? 1.0 - rad * (1.0 - col) : col * 0.75;
    px[c] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(col, 0.0, 1.0)));
  }
  return px;
}

RgbImage colorize_flow(const FloFrame& f) {
  std::vector<double> mag(f.u.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::hypot(f.u[i][0], f.u[i][1]);
  double scale = 0.0;
  if (!mag.empty()) {
    std::vector<double> sorted = mag;
    const std::size_t k = static_cast<std::size_t>(std::ceil(0.99 * sorted.size())) - 1;
    std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
    scale = sorted[k];
    if (scale == 0.0) scale = *std::max_element(mag.begin(), mag.end());
  }
  RgbImage img;
  img.rows = f.n1;
  img.cols = f.n2;
  img.pixels.resize(f.u.size());
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    const double s = scale > 0.0 ? 1.0 / scale : 0.0;
    img.pixels[i] = flow_color(f.u[i][1] * s, f.u[i][0] * s);
  }
  return img;
}

RgbImage grey_map(int rows, int cols, const std::vector<double>& v, double max_value) {
  if (v.size() != static_cast<std::size_t>(rows) * cols) throw ShapeMismatch("grey map size mismatch");
  RgbImage img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = max_value > 0.0 ? std::clamp(v[i] / max_value, 0.0, 1.0) : 0.0;
    const auto g = static_cast<std::uint8_t>(std::lround(255.0 * x));
    img.pixels[i] = {g, g, g};
  }
  return img;
}

}  // namespace surflow
