// surface_flow: optical flow on moving surfaces.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "surflow/errors.hpp"
#include "surflow/formats.hpp"
#include "surflow/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surflow;

namespace {

void log_line(const std::string& m) { std::cerr << m << '\n'; }

struct SolveArgs {
  std::string config;
  std::optional<double> alpha, beta, gamma, h, tol, sigma_space, sigma_time;
  std::optional<int> restart, max_iters;
  std::optional<std::string> out, boundary, trace, srf1, pgm_dir, img1, history, matrix;
  bool no_precond = false, normalize = false, drop_time_connection = false, remove_tangential = false;
};

RunConfig resolve_config(const SolveArgs& a) {
  RunConfig c = a.config.empty() ? parse_run_config(json::object()) : load_run_config(a.config);
  if (a.alpha) c.weights.alpha = *a.alpha;
  if (a.beta) c.weights.beta = *a.beta;
  if (a.gamma) c.weights.gamma = *a.gamma;
  if (a.h) {
    c.ht = c.h1 = c.h2 = *a.h;
    if (c.surface.builtin) c.surface.builtin->grid.ht = c.surface.builtin->grid.h1 = c.surface.builtin->grid.h2 = *a.h;
  }
  if (a.tol) c.solver.rel_tol = *a.tol;
  if (a.restart) c.solver.restart = *a.restart;
  if (a.max_iters) c.solver.max_iters = *a.max_iters;
  if (a.no_precond) c.solver.preconditioner = Preconditioner::none;
  if (a.sigma_space) c.sigma_space = *a.sigma_space;
  if (a.sigma_time) c.sigma_time = *a.sigma_time;
  if (a.out) c.output_dir = *a.out;
  if (a.boundary) c.boundary = *a.boundary == "auto" ? std::nullopt : std::optional(parse_spatial_boundary(*a.boundary));
  if (a.trace) c.trace_convention = parse_trace_convention(*a.trace);
  if (a.srf1) {
    c.surface.builtin.reset();
    c.surface.srf1_path = *a.srf1;
  }
  if (a.pgm_dir) {
    c.image.kind = ImageKind::pgm_dir;
    c.image.path = *a.pgm_dir;
  }
  if (a.img1) {
    c.image.kind = ImageKind::img1;
    c.image.path = *a.img1;
  }
  if (a.normalize) c.image.normalize = true;
  if (a.drop_time_connection) c.time_connection_term = false;
  if (a.remove_tangential) c.surface.remove_tangential_motion = true;
  if (a.history) c.history_csv = *a.history;
  if (a.matrix) c.matrix_market = *a.matrix;
  return c;
}

int cmd_solve(const SolveArgs& a) {
  const RunConfig cfg = resolve_config(a);
  const SolveOutcome out = run_solve(cfg, log_line);
  std::cout << std::setprecision(10) << "iterations " << out.report.iterations << "\nrelative_residual "
            << out.report.relative_residual << "\nconverged " << (out.report.converged ? "true" : "false")
            << "\nE " << out.energy.E << "\nS " << out.energy.S << "\nR " << out.energy.R << "\noutput "
            << out.output_dir << '\n';
  return out.report.converged ? 0 : static_cast<int>(ErrorCategory::numerics);
}

int cmd_colorize(const std::string& in, const std::string& out) {
  write_ppm(out, colorize_flow(read_flo(in)));
  return 0;
}

SurfaceGrid surface_for_compare(const std::string& srf1, const std::string& config, const SolveArgs& args) {
  if (!srf1.empty()) return read_srf1(srf1);
  if (!config.empty()) {
    SolveArgs a = args;
    a.config = config;
    return build_problem(resolve_config(a), false).surface;
  }
  throw InvalidConfig("ambient comparison needs --surface or --config");
}

int cmd_compare(const std::string& a_dir, const std::string& b_dir, const std::string& mode_s,
                const std::string& srf1, const std::string& config, const std::string& out_dir) {
  int nt = 0, n1 = 0, n2 = 0, nt2 = 0, m1 = 0, m2 = 0;
  const auto a = read_flow_directory(a_dir, nt, n1, n2);
  const auto b = read_flow_directory(b_dir, nt2, m1, m2);
  if (nt != nt2 || n1 != m1 || n2 != m2) throw ShapeMismatch("flows have different grids");
  const CompareMode mode = parse_compare_mode(mode_s);
  std::optional<SurfaceGrid> surface;
  if (mode == CompareMode::ambient3d) surface = surface_for_compare(srf1, config, SolveArgs{});
  std::vector<double> ang, epe;
  const CompareSummary s =
      compare_flows(a, b, nt, n1, n2, mode, surface ? &*surface : nullptr, &ang, &epe);

  fs::create_directories(out_dir);
  {
    std::ofstream csv(fs::path(out_dir) / "errors.csv");
    if (!csv) throw FormatError("cannot write errors.csv");
    csv << "t,i1,i2,angular,endpoint\n" << std::setprecision(10);
    std::size_t p = 0;
    for (int t = 0; t < nt; ++t)
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j, ++p) csv << t << ',' << i << ',' << j << ',' << ang[p] << ',' << epe[p] << '\n';
  }
  const double amax = *std::max_element(s.max_angular.begin(), s.max_angular.end());
  const std::size_t fsz = static_cast<std::size_t>(n1) * n2;
  for (int t = 0; t < nt; ++t) {
    std::vector<double> frame(ang.begin() + t * fsz, ang.begin() + (t + 1) * fsz);
    char name[40];
    std::snprintf(name, sizeof name, "angular_%04d.ppm", t);
    write_ppm((fs::path(out_dir) / name).string(), grey_map(n1, n2, frame, amax));
  }
  json j;
  j["mode"] = mode_s;
  j["frames"] = json::array();
  for (int t = 0; t < nt; ++t)
    j["frames"].push_back({{"t", t},
                           {"mean_angular", s.mean_angular[t]},
                           {"max_angular", s.max_angular[t]},
                           {"mean_endpoint", s.mean_endpoint[t]},
                           {"max_endpoint", s.max_endpoint[t]}});
  j["mean_angular"] = s.mean_angular_all;
  j["mean_endpoint"] = s.mean_endpoint_all;
  std::ofstream(fs::path(out_dir) / "summary.json") << std::setprecision(17) << j.dump(2) << '\n';
  std::cout << std::setprecision(10) << "mean_angular " << s.mean_angular_all << "\nmean_endpoint "
            << s.mean_endpoint_all << '\n';
  return 0;
}

int cmd_gen_surface(const std::string& spec_path, const std::string& kind, int nt, int n1, int n2,
                    double h, bool wrap1, bool wrap2, const std::string& out) {
  AnalyticSurfaceSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) throw InvalidConfig("cannot open " + spec_path);
    json j;
    in >> j;
    spec = parse_surface_spec(j);
  } else {
    spec.kind = parse_surface_kind(kind);
    spec.grid = GridShape{nt, n1, n2, h, h, h, wrap1, wrap2};
    if (spec.kind == SurfaceKind::deforming_torus) spec.grid.wrap1 = spec.grid.wrap2 = true;
  }
  const SurfaceGrid s = make_surface(spec);
  write_srf1(out, s);
  std::cout << "wrote " << out << " (" << s.shape.size() << " points)\n";
  return 0;
}

int cmd_energy(const SolveArgs& args, const std::string& flow_dir) {
  const RunConfig cfg = resolve_config(args);
  const Problem pb = build_problem(cfg, false);
  int nt = 0, n1 = 0, n2 = 0;
  const auto coord = read_flow_directory(flow_dir, nt, n1, n2);
  const GridShape& g = pb.surface.shape;
  if (nt != g.nt || n1 != g.n1 || n2 != g.n2) throw ShapeMismatch("flow grid differs from the surface grid");
  const FlowField fl = expand_views(coord_to_frame(coord, pb.frame), pb.frame, pb.surface);
  const EnergyBreakdown e = discrete_energy(fl, pb.imd, pb.geom, pb.frame, pb.conn, cfg.weights);
  std::cout << std::setprecision(17) << json{{"E", e.E}, {"S", e.S}, {"R", e.R}}.dump() << '\n';
  return 0;
}

int cmd_gen_sequence(int nt, int n1, int n2, bool wrap1, bool wrap2, const std::string& out,
                     const std::string& pgm_dir) {
  const ImageSequence img = render_scene(default_traffic_scene(n1, n2), nt, n1, n2, wrap1, wrap2);
  if (!out.empty()) write_img1(out, img);
  if (!pgm_dir.empty()) {
    fs::create_directories(pgm_dir);
    const std::size_t fsz = static_cast<std::size_t>(n1) * n2;
    for (int t = 0; t < nt; ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d.pgm", t);
      write_pgm((fs::path(pgm_dir) / name).string(), n1, n2,
                std::vector<double>(img.values.begin() + t * fsz, img.values.begin() + (t + 1) * fsz));
    }
  }
  return 0;
}

void add_solve_options(CLI::App* app, SolveArgs& a) {
  app->add_option("-c,--config", a.config, "JSON run configuration");
  app->add_option("--alpha", a.alpha, "time weighting alpha > 0");
  app->add_option("--beta", a.beta, "L2 weight beta >= 0");
  app->add_option("--gamma", a.gamma, "smoothness weight gamma > 0");
  app->add_option("--step", a.h, "finite-difference step in all axes");
  app->add_option("--tol", a.tol, "GMRES relative residual tolerance");
  app->add_option("--restart", a.restart, "GMRES restart length");
  app->add_option("--max-iters", a.max_iters, "GMRES iteration limit");
  app->add_flag("--no-precond", a.no_precond, "plain GMRES without block Jacobi");
  app->add_option("--sigma-space", a.sigma_space, "spatial presmoothing sigma (grid units)");
  app->add_option("--sigma-time", a.sigma_time, "temporal presmoothing sigma (grid units)");
  app->add_option("-o,--out", a.out, "output directory");
  app->add_option("--boundary", a.boundary, "auto|dirichlet|neumann|periodic_x1|periodic_x2|periodic_both");
  app->add_option("--trace-convention", a.trace, "lemma|theorem");
  app->add_option("--surface", a.srf1, "SRF1 surface file");
  app->add_option("--images-pgm", a.pgm_dir, "directory of PGM frames");
  app->add_option("--images-img1", a.img1, "IMG1 image stack");
  app->add_flag("--normalize", a.normalize, "min-max normalize IMG1 values");
  app->add_flag("--no-time-connection", a.drop_time_connection, "use d_t u = 0 at the time boundary");
  app->add_flag("--remove-tangential", a.remove_tangential, "reparametrize the surface to normal motion first");
  app->add_option("--history-csv", a.history, "write the GMRES convergence history");
  app->add_option("--dump-matrix", a.matrix, "write the system matrix (MatrixMarket)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical flow on moving parametrized surfaces"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "assemble and solve, write flow files and report.json");
  add_solve_options(solve, solve_args);

  std::string col_in, col_out;
  auto* colorize = app.add_subcommand("colorize", "color-code a .flo frame as PPM");
  colorize->add_option("flow", col_in, ".flo file")->required();
  colorize->add_option("out", col_out, "output .ppm")->required();

  std::string cmp_a, cmp_b, cmp_mode = "pullback2d", cmp_srf, cmp_cfg, cmp_out = "compare";
  auto* compare = app.add_subcommand("compare", "angular and endpoint errors between two flows");
  compare->add_option("a", cmp_a, "first solve output or .flo directory")->required();
  compare->add_option("b", cmp_b, "second solve output or .flo directory")->required();
  compare->add_option("--mode", cmp_mode, "pullback2d|ambient3d");
  compare->add_option("--surface", cmp_srf, "SRF1 surface for ambient mode");
  compare->add_option("--config", cmp_cfg, "run configuration whose surface is used for ambient mode");
  compare->add_option("-o,--out", cmp_out, "output directory");

  std::string gs_spec, gs_kind = "flat_plane", gs_out;
  int gs_nt = 3, gs_n1 = 4, gs_n2 = 4;
  double gs_h = 1.0;
  bool gs_w1 = false, gs_w2 = false;
  auto* gen_surface = app.add_subcommand("gen-surface", "write a builtin surface as SRF1");
  gen_surface->add_option("--spec", gs_spec, "JSON surface spec");
  gen_surface->add_option("--kind", gs_kind, "deforming_torus|graph|flat_plane|sphere_chart");
  gen_surface->add_option("--nt", gs_nt, "frames");
  gen_surface->add_option("--n1", gs_n1, "rows");
  gen_surface->add_option("--n2", gs_n2, "columns");
  gen_surface->add_option("--step", gs_h, "grid step in all axes");
  gen_surface->add_flag("--wrap1", gs_w1, "periodic along x1");
  gen_surface->add_flag("--wrap2", gs_w2, "periodic along x2");
  gen_surface->add_option("out", gs_out, "output .srf1")->required();

  SolveArgs energy_args;
  std::string en_flow;
  auto* energy = app.add_subcommand("energy", "evaluate E, S, R of stored flow");
  add_solve_options(energy, energy_args);
  energy->add_option("--flow", en_flow, "solve output or .flo directory")->required();

  int sq_nt = 20, sq_n1 = 64, sq_n2 = 48;
  bool sq_w1 = false, sq_w2 = false;
  std::string sq_out, sq_pgm;
  auto* gen_seq = app.add_subcommand("gen-sequence", "write the synthetic traffic sequence");
  gen_seq->add_option("--nt", sq_nt, "frames");
  gen_seq->add_option("--n1", sq_n1, "rows");
  gen_seq->add_option("--n2", sq_n2, "columns");
  gen_seq->add_flag("--wrap1", sq_w1, "periodic along x1");
  gen_seq->add_flag("--wrap2", sq_w2, "periodic along x2");
  gen_seq->add_option("--img1", sq_out, "output IMG1 stack");
  gen_seq->add_option("--pgm-dir", sq_pgm, "output directory of PGM frames");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::config);
  }

  try {
    if (*solve) return cmd_solve(solve_args);
    if (*colorize) return cmd_colorize(col_in, col_out);
    if (*compare) return cmd_compare(cmp_a, cmp_b, cmp_mode, cmp_srf, cmp_cfg, cmp_out);
    if (*gen_surface) return cmd_gen_surface(gs_spec, gs_kind, gs_nt, gs_n1, gs_n2, gs_h, gs_w1, gs_w2, gs_out);
    if (*energy) return cmd_energy(energy_args, en_flow);
    if (*gen_seq) return cmd_gen_sequence(sq_nt, sq_n1, sq_n2, sq_w1, sq_w2, sq_out, sq_pgm);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::data);
  }
  return 0;
}
