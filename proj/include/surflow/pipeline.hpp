#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "surflow/assembly.hpp"
#include "surflow/flowfield.hpp"
#include "surflow/formats.hpp"
#include "surflow/solver.hpp"
#include "surflow/surfaces.hpp"

namespace surflow {

struct SurfaceSource {
  std::optional<AnalyticSurfaceSpec> builtin;
  std::string srf1_path;
  bool remove_tangential_motion = false;
};

enum class ImageKind { pgm_dir, img1, synthetic_traffic, constant };

struct ImageSource {
  ImageKind kind = ImageKind::synthetic_traffic;
  std::string path;
  bool normalize = false;
  double constant_value = 0.5;
};

/// Full description of a solve. Grid sizes of a builtin surface default to the
/// image dimensions when zero.
struct RunConfig {
  SurfaceSource surface;
  ImageSource image;
  Weights weights;
  std::optional<SpatialBoundary> boundary;  // unset: periodic where the grid wraps, else Dirichlet
  bool time_connection_term = true;
  double ht = 1.0, h1 = 1.0, h2 = 1.0;
  double sigma_space = 0.0, sigma_time = 0.0;
  SolverConfig solver;
  TraceConvention trace_convention = TraceConvention::lemma;
  std::string output_dir = "out";
  std::string history_csv;   // optional convergence log
  std::string matrix_market; // optional matrix dump

  /// Throws InvalidConfig on invalid values.
  void validate() const;
  BoundarySpec boundary_spec(const GridShape& grid) const;
};

/// Parses the JSON schema documented in README.md; unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json run_config_to_json(const RunConfig& cfg);

AnalyticSurfaceSpec parse_surface_spec(const nlohmann::json& j);
nlohmann::json surface_spec_to_json(const AnalyticSurfaceSpec& s);

/// Every intermediate of the pipeline.
struct Problem {
  SurfaceGrid surface;
  ImageSequence image;
  ImageDerivatives imd;
  GeometryField geom;
  FrameField frame;
  ChristoffelField chris;
  ConnectionField conn;
  CoefficientFields coeffs;
  LinearSystem system;
  BoundarySpec boundary;
  Weights weights;

  EnergyProblem energy_problem() const;
};

SurfaceGrid load_surface(const RunConfig& cfg, const ImageSequence* image = nullptr);
ImageSequence load_images(const RunConfig& cfg, const GridShape* grid = nullptr);

/// Builds all fields; assembles the linear system only when `assemble` is set.
Problem build_problem(const RunConfig& cfg, bool assemble = true);

/// Converts stored coordinate components back to frame components, u^m = b^m_l u~^l.
std::vector<Vec2> coord_to_frame(const std::vector<Vec2>& u_coord, const FrameField& frame);

/// Rounds coordinate components to float32, as stored in .flo files.
std::vector<Vec2> round_to_float(const std::vector<Vec2>& u);

struct SolveOutcome {
  SolveReport report;
  EnergyBreakdown energy;
  FlowField flow;
  std::string output_dir;
};

/// Runs the pipeline and writes flow/frame_NNNN.flo, flow.fl3d and report.json.
SolveOutcome run_solve(const RunConfig& cfg, const std::function<void(const std::string&)>& log = {});

std::string frame_file_name(int t);

/// Reads flow/frame_*.flo of a solve output directory (or a directory of .flo files).
std::vector<Vec2> read_flow_directory(const std::string& dir, int& nt, int& n1, int& n2);

/// Pushes coordinate flow forward to R^3 through the surface's d_l f.
std::vector<Vec3> push_forward(const std::vector<Vec2>& u_coord, const SurfaceGrid& surface);

struct CompareSummary {
  std::vector<double> mean_angular, max_angular, mean_endpoint, max_endpoint;  // per frame
  double mean_angular_all = 0.0, mean_endpoint_all = 0.0;
};

enum class CompareMode { pullback2d, ambient3d };
CompareMode parse_compare_mode(const std::string& s);

/// Pointwise comparison; ambient mode pushes both flows through `surface`.
CompareSummary compare_flows(const std::vector<Vec2>& a, const std::vector<Vec2>& b, int nt, int n1,
                             int n2, CompareMode mode, const SurfaceGrid* surface,
                             std::vector<double>* angular = nullptr,
                             std::vector<double>* endpoint = nullptr);

}  // namespace surflow
