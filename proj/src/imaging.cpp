#include "surflow/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "surflow/errors.hpp"
#include "surflow/parallel.hpp"

namespace surflow {

namespace {

// Skips whitespace and '#' comments in a PNM header.
void skip_header_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

int read_header_int(std::istream& in, const std::string& path) {
  skip_header_space(in);
  int v = -1;
  if (!(in >> v) || v <= 0) throw FormatError("bad PGM header in " + path);
  return v;
}

}  // namespace

ImageSequence read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw FormatError("not a binary PGM (P5): " + path);
  const int cols = read_header_int(in, path);
  const int rows = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  if (maxval > 65535) throw FormatError("PGM maxval out of range in " + path);
  in.get();  // single whitespace before the raster

  ImageSequence img;
  img.nt = 1;
  img.n1 = rows;
  img.n2 = cols;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  img.values.resize(n);
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(n * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError("truncated PGM raster in " + path);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bytes == 1 ? raw[i] : (unsigned{raw[2 * i]} << 8) | raw[2 * i + 1];
    img.values[i] = static_cast<double>(v) / maxval;
  }
  return img;
}

ImageSequence load_pgm_sequence(const std::vector<std::string>& frame_paths) {
  if (frame_paths.empty()) throw FormatError("empty frame list");
  ImageSequence seq;
  for (const auto& path : frame_paths) {
    ImageSequence frame = read_pgm(path);
    if (seq.nt == 0) {
      seq.n1 = frame.n1;
      seq.n2 = frame.n2;
    } else if (frame.n1 != seq.n1 || frame.n2 != seq.n2) {
      throw ShapeMismatch("frame " + path + " has a different resolution");
    }
    seq.values.insert(seq.values.end(), frame.values.begin(), frame.values.end());
    ++seq.nt;
  }
  return seq;
}

ImageSequence load_pgm_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".pgm") paths.push_back(e.path().string());
  if (ec) throw FormatError("cannot read directory " + dir);
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw FormatError("no .pgm frames in " + dir);
  return load_pgm_sequence(paths);
}

ImageSequence read_img1(const std::string& path, bool normalize) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IMG1", 4) != 0) throw FormatError("bad IMG1 magic in " + path);
  std::int32_t dims[3] = {};
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0)
    throw FormatError("bad IMG1 dimensions in " + path);
  ImageSequence img;
  img.nt = dims[0];
  img.n1 = dims[1];
  img.n2 = dims[2];
  const std::size_t n = static_cast<std::size_t>(img.nt) * img.n1 * img.n2;
  std::vector<float> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(float))
    throw FormatError("IMG1 payload shorter than its dimensions in " + path);
  if (in.peek() != EOF) throw FormatError("IMG1 payload longer than its dimensions in " + path);
  img.values.assign(raw.begin(), raw.end());
  for (double v : img.values)
    if (!std::isfinite(v)) throw FormatError("non-finite value in " + path);
  if (normalize) {
    const auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
    const double a = *lo, range = *hi - *lo;
    for (double& v : img.values) v = range > 0.0 ? (v - a) / range : 0.0;
  }
  return img;
}

void write_img1(const std::string& path, const ImageSequence& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out.write("IMG1", 4);
  const std::int32_t dims[3] = {img.nt, img.n1, img.n2};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  std::vector<float> raw(img.values.begin(), img.values.end());
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(float)));
  if (!out) throw FormatError("write failed for " + path);
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& w : k) w /= sum;
  return k;
}

namespace {

// Index into [0, n) with periodic wrap or mirror reflection about the end samples.
int boundary_index(int i, int n, bool wrap) {
  if (n == 1) return 0;
  if (wrap) return ((i % n) + n) % n;
  const int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

void convolve_axis(ImageSequence& img, Axis axis, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  if (k.size() == 1) return;
  const int r = static_cast<int>(k.size() / 2);
  const GridShape s{img.nt, img.n1, img.n2, 1, 1, 1, img.wrap1, img.wrap2};
  const int n = s.extent(axis);
  const bool wrap = s.wraps(axis);
  std::vector<double> out(img.values.size());
  parallel_for(img.values.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(s, p);
      const int c = gp.along(axis);
      double acc = 0.0;
      for (int o = -r; o <= r; ++o)
        acc += k[o + r] * img.values[linear_index(s, gp.with(axis, boundary_index(c + o, n, wrap)))];
      out[p] = acc;
    }
  });
  img.values = std::move(out);
}

}  // namespace

ImageSequence gaussian_presmooth(const ImageSequence& img, double sigma_space, double sigma_time) {
  if (sigma_space < 0.0 || sigma_time < 0.0) throw InvalidConfig("smoothing sigma must be >= 0");
  ImageSequence out = img;
  convolve_axis(out, Axis::x1, sigma_space);
  convolve_axis(out, Axis::x2, sigma_space);
  convolve_axis(out, Axis::t, sigma_time);
  return out;
}

GridShape image_grid(const ImageSequence& img, double ht, double h1, double h2) {
  return GridShape{img.nt, img.n1, img.n2, ht, h1, h2, img.wrap1, img.wrap2};
}

ImageDerivatives image_derivatives(const ImageSequence& img, double ht, double h1, double h2) {
  const GridShape s = image_grid(img, ht, h1, h2);
  if (img.values.size() != s.size()) throw ShapeMismatch("image values do not match its shape");
  for (Axis a : kAxes)
    if (!s.wraps(a) && s.extent(a) < 3)
      throw GridTooSmall("image derivatives need at least 3 samples along non-periodic axes");
  ImageDerivatives d;
  d.dIt.resize(s.size());
  d.dI1.resize(s.size());
  d.dI2.resize(s.size());
  parallel_for(s.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const GridPoint gp = grid_point(s, p);
      d.dIt[p] = axis_derivative(img.values, s, Axis::t, gp);
      d.dI1[p] = axis_derivative(img.values, s, Axis::x1, gp);
      d.dI2[p] = axis_derivative(img.values, s, Axis::x2, gp);
    }
  });
  return d;
}

SyntheticScene default_traffic_scene(int n1, int n2) {
  SyntheticScene sc;
  const double s = std::min(n1, n2) / 12.0;
  sc.blobs = {
      {0.30 * n1, 0.25 * n2, 0.0, 0.9, 1.2 * s, 0.45},
      {0.65 * n1, 0.70 * n2, -0.6, -0.3, 1.0 * s, 0.40},
      {0.50 * n1, 0.45 * n2, 0.5, 0.0, 0.8 * s, -0.20},
  };
  return sc;
}

ImageSequence render_scene(const SyntheticScene& sc, int nt, int n1, int n2, bool wrap1,
                           bool wrap2) {
  ImageSequence img;
  img.nt = nt;
  img.n1 = n1;
  img.n2 = n2;
  img.wrap1 = wrap1;
  img.wrap2 = wrap2;
  img.values.resize(static_cast<std::size_t>(nt) * n1 * n2);
  constexpr double tau = 2.0 * std::numbers::pi;
  // Texture wavelengths divide the extent so periodic axes stay seamless.
  const double k1 = tau * 5.0 / n1, k2 = tau * 4.0 / n2;
  const double l1 = tau * 3.0 / n1, l2 = tau * 7.0 / n2;
  auto delta = [](double d, int n, bool wrap) {
    if (wrap) d -= n * std::round(d / n);
    return d;
  };
  for (int t = 0; t < nt; ++t)
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        const double x = i - sc.drift1 * t, y = j - sc.drift2 * t;
        double v = sc.background +
                   sc.texture_amplitude * (0.6 * std::sin(k1 * x + 0.4) * std::cos(k2 * y - 0.2) +
                                           0.4 * std::sin(l1 * x - l2 * y + 1.1));
        for (const auto& b : sc.blobs) {
          const double d1 = delta(i - (b.c1 + b.v1 * t), n1, wrap1);
          const double d2 = delta(j - (b.c2 + b.v2 * t), n2, wrap2);
          v += b.amplitude * std::exp(-(d1 * d1 + d2 * d2) / (2.0 * b.sigma * b.sigma));
        }
        img.at(t, i, j) = std::clamp(v, 0.0, 1.0);
      }
  return img;
}

}  // namespace surflow
