#pragma once

#include <string>
#include <vector>

#include "surflow/grid.hpp"

namespace surflow {

/// Pulled-back grey-value sequence I(t, x1, x2), stored [t][x1][x2].
struct ImageSequence {
  int nt = 0, n1 = 0, n2 = 0;
  bool wrap1 = false, wrap2 = false;
  std::vector<double> values;

  std::size_t index(int t, int i1, int i2) const {
    return (static_cast<std::size_t>(t) * n1 + i1) * n2 + i2;
  }
  double& at(int t, int i1, int i2) { return values[index(t, i1, i2)]; }
  double at(int t, int i1, int i2) const { return values[index(t, i1, i2)]; }
};

struct ImageDerivatives {
  std::vector<double> dIt, dI1, dI2;
};

/// Binary PGM (P5, 8 or 16 bit) frames, one file per time step in the given
/// order; intensities are divided by the file's maxval.
ImageSequence load_pgm_sequence(const std::vector<std::string>& frame_paths);

/// All *.pgm files of a directory in lexicographic order.
ImageSequence load_pgm_directory(const std::string& dir);

/// Single 8/16-bit PGM frame scaled to [0,1]; returns (rows, cols, values).
ImageSequence read_pgm(const std::string& path);

/// "IMG1" raw stack; with `normalize` the values are min-max scaled to [0,1].
ImageSequence read_img1(const std::string& path, bool normalize = false);
void write_img1(const std::string& path, const ImageSequence& img);

/// Separable Gaussian smoothing with radius ceil(3 sigma); periodic along
/// wrapped axes, mirrored (without edge repetition) otherwise.
ImageSequence gaussian_presmooth(const ImageSequence& img, double sigma_space, double sigma_time);

/// Normalized discrete Gaussian taps for offsets -r..r, r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Second-order space-time differences (throws GridTooSmall if a
/// non-periodic axis has fewer than three samples).
ImageDerivatives image_derivatives(const ImageSequence& img, double ht, double h1, double h2);

/// Grid layout of an image sequence with the given steps.
GridShape image_grid(const ImageSequence& img, double ht, double h1, double h2);

/// Parameters of a synthetic scene: a static low-contrast texture with
/// Gaussian blobs moving at constant velocities (grid units per frame).
struct SyntheticScene {
  struct Blob {
    double c1, c2;  // initial center
    double v1, v2;  // velocity
    double sigma;
    double amplitude;
  };
  double background = 0.35;
  double texture_amplitude = 0.12;
  std::vector<Blob> blobs;
  /// Global translation applied to the texture (grid units per frame).
  double drift1 = 0.0, drift2 = 0.0;
};

/// A default scene with three moving blobs ("cars") on a textured background.
SyntheticScene default_traffic_scene(int n1, int n2);

/// Renders the scene; periodic axes use wrapped distances and periodic texture.
ImageSequence render_scene(const SyntheticScene& scene, int nt, int n1, int n2, bool wrap1,
                           bool wrap2);

}  // namespace surflow
