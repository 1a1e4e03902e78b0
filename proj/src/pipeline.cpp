#include "surflow/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "surflow/errors.hpp"

namespace surflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidConfig(where + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidConfig("unknown key '" + k + "' in " + where);
}

template <class T>
void read_opt(const json& j, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

AnalyticSurfaceSpec parse_surface_spec(const json& j) {
  reject_unknown(j, {"kind", "nt", "n1", "n2", "wrap1", "wrap2", "ht", "h1", "h2", "origin1", "origin2",
                     "t0", "period", "torus", "sphere", "plane", "graph"},
                 "surface spec");
  AnalyticSurfaceSpec s;
  std::string kind = "flat_plane";
  read_opt(j, "kind", kind);
  s.kind = parse_surface_kind(kind);
  s.grid.nt = s.grid.n1 = s.grid.n2 = 0;
  if (s.kind == SurfaceKind::deforming_torus) s.grid.wrap1 = s.grid.wrap2 = true;
  read_opt(j, "nt", s.grid.nt);
  read_opt(j, "n1", s.grid.n1);
  read_opt(j, "n2", s.grid.n2);
  read_opt(j, "wrap1", s.grid.wrap1);
  read_opt(j, "wrap2", s.grid.wrap2);
  read_opt(j, "ht", s.grid.ht);
  read_opt(j, "h1", s.grid.h1);
  read_opt(j, "h2", s.grid.h2);
  read_opt(j, "origin1", s.origin1);
  read_opt(j, "origin2", s.origin2);
  read_opt(j, "t0", s.t0);
  read_opt(j, "period", s.period);
  if (j.contains("torus")) {
    const json& t = j["torus"];
    reject_unknown(t, {"R", "ellipse", "ripple", "ripple_frequency", "tube", "rotation_speed", "rotation_wobble"},
                   "torus");
    read_opt(t, "R", s.torus.R);
    read_opt(t, "ellipse", s.torus.ellipse);
    read_opt(t, "ripple", s.torus.ripple);
    read_opt(t, "ripple_frequency", s.torus.ripple_frequency);
    read_opt(t, "tube", s.torus.tube);
    read_opt(t, "rotation_speed", s.torus.rotation_speed);
    read_opt(t, "rotation_wobble", s.torus.rotation_wobble);
  }
  if (j.contains("sphere")) {
    const json& t = j["sphere"];
    reject_unknown(t, {"radius", "growth", "pole_margin", "longitude_extent"}, "sphere");
    read_opt(t, "radius", s.sphere.radius);
    read_opt(t, "growth", s.sphere.growth);
    read_opt(t, "pole_margin", s.sphere.pole_margin);
    read_opt(t, "longitude_extent", s.sphere.longitude_extent);
  }
  if (j.contains("plane")) {
    const json& t = j["plane"];
    reject_unknown(t, {"scale_rate"}, "plane");
    read_opt(t, "scale_rate", s.plane.scale_rate);
  }
  if (j.contains("graph")) {
    const json& t = j["graph"];
    reject_unknown(t, {"amplitude0", "amplitude1", "center1", "center2", "velocity1", "velocity2", "width",
                       "lift", "samples_img1"},
                   "graph");
    read_opt(t, "amplitude0", s.graph.amplitude0);
    read_opt(t, "amplitude1", s.graph.amplitude1);
    read_opt(t, "center1", s.graph.center1);
    read_opt(t, "center2", s.graph.center2);
    read_opt(t, "velocity1", s.graph.velocity1);
    read_opt(t, "velocity2", s.graph.velocity2);
    read_opt(t, "width", s.graph.width);
    read_opt(t, "lift", s.graph.lift);
    if (t.contains("samples_img1")) {
      s.graph.samples_path = t["samples_img1"].get<std::string>();
      s.graph.samples = read_img1(s.graph.samples_path);
    }
  }
  return s;
}

json surface_spec_to_json(const AnalyticSurfaceSpec& s) {
  json j = {{"kind", surface_kind_name(s.kind)}, {"nt", s.grid.nt}, {"n1", s.grid.n1}, {"n2", s.grid.n2},
            {"wrap1", s.grid.wrap1}, {"wrap2", s.grid.wrap2}, {"ht", s.grid.ht}, {"h1", s.grid.h1},
            {"h2", s.grid.h2}, {"origin1", s.origin1}, {"origin2", s.origin2}, {"t0", s.t0},
            {"period", s.period}};
  switch (s.kind) {
    case SurfaceKind::deforming_torus:
      j["torus"] = {{"R", s.torus.R}, {"ellipse", s.torus.ellipse}, {"ripple", s.torus.ripple},
                    {"ripple_frequency", s.torus.ripple_frequency}, {"tube", s.torus.tube},
                    {"rotation_speed", s.torus.rotation_speed}, {"rotation_wobble", s.torus.rotation_wobble}};
      break;
    case SurfaceKind::sphere_chart:
      j["sphere"] = {{"radius", s.sphere.radius}, {"growth", s.sphere.growth},
                     {"pole_margin", s.sphere.pole_margin}, {"longitude_extent", s.sphere.longitude_extent}};
      break;
    case SurfaceKind::flat_plane: j["plane"] = {{"scale_rate", s.plane.scale_rate}}; break;
    case SurfaceKind::graph:
      j["graph"] = {{"amplitude0", s.graph.amplitude0}, {"amplitude1", s.graph.amplitude1},
                    {"center1", s.graph.center1}, {"center2", s.graph.center2},
                    {"velocity1", s.graph.velocity1}, {"velocity2", s.graph.velocity2},
                    {"width", s.graph.width}, {"lift", s.graph.lift}};
      if (!s.graph.samples_path.empty()) j["graph"]["samples_img1"] = s.graph.samples_path;
      break;
  }
  return j;
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, {"surface", "image", "alpha", "beta", "gamma", "boundary", "time_connection_term", "h",
                     "ht", "h1", "h2", "presmooth", "solver", "trace_convention", "output_dir", "history_csv",
                     "matrix_market", "remove_tangential_motion"},
                 "run config");
  RunConfig c;
  if (j.contains("surface")) {
    const json& s = j["surface"];
    if (s.is_object() && s.contains("srf1")) {
      reject_unknown(s, {"srf1"}, "surface");
      c.surface.srf1_path = s["srf1"].get<std::string>();
    } else {
      c.surface.builtin = parse_surface_spec(s);
    }
  } else {
    c.surface.builtin = AnalyticSurfaceSpec{};
    c.surface.builtin->grid.nt = c.surface.builtin->grid.n1 = c.surface.builtin->grid.n2 = 0;
  }
  read_opt(j, "remove_tangential_motion", c.surface.remove_tangential_motion);

  if (j.contains("image")) {
    const json& im = j["image"];
    reject_unknown(im, {"pgm_dir", "img1", "normalize", "synthetic", "constant"}, "image");
    if (im.contains("pgm_dir")) {
      c.image.kind = ImageKind::pgm_dir;
      c.image.path = im["pgm_dir"].get<std::string>();
    } else if (im.contains("img1")) {
      c.image.kind = ImageKind::img1;
      c.image.path = im["img1"].get<std::string>();
    } else if (im.contains("constant")) {
      c.image.kind = ImageKind::constant;
      read_opt(im, "constant", c.image.constant_value);
    } else if (im.contains("synthetic")) {
      if (im["synthetic"] != "traffic") throw InvalidConfig("the only synthetic image is 'traffic'");
      c.image.kind = ImageKind::synthetic_traffic;
    }
    read_opt(im, "normalize", c.image.normalize);
  }
  read_opt(j, "alpha", c.weights.alpha);
  read_opt(j, "beta", c.weights.beta);
  read_opt(j, "gamma", c.weights.gamma);
  if (j.contains("boundary")) {
    const std::string b = j["boundary"].get<std::string>();
    if (b != "auto") c.boundary = parse_spatial_boundary(b);
  }
  read_opt(j, "time_connection_term", c.time_connection_term);
  if (j.contains("h")) {
    const double h = j["h"].get<double>();
    c.ht = c.h1 = c.h2 = h;
  }
  read_opt(j, "ht", c.ht);
  read_opt(j, "h1", c.h1);
  read_opt(j, "h2", c.h2);
  if (j.contains("presmooth")) {
    reject_unknown(j["presmooth"], {"sigma_space", "sigma_time"}, "presmooth");
    read_opt(j["presmooth"], "sigma_space", c.sigma_space);
    read_opt(j["presmooth"], "sigma_time", c.sigma_time);
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, {"restart", "max_iters", "rel_tol", "preconditioner"}, "solver");
    read_opt(s, "restart", c.solver.restart);
    read_opt(s, "max_iters", c.solver.max_iters);
    read_opt(s, "rel_tol", c.solver.rel_tol);
    if (s.contains("preconditioner")) c.solver.preconditioner = parse_preconditioner(s["preconditioner"]);
  }
  if (j.contains("trace_convention")) c.trace_convention = parse_trace_convention(j["trace_convention"]);
  read_opt(j, "output_dir", c.output_dir);
  read_opt(j, "history_csv", c.history_csv);
  read_opt(j, "matrix_market", c.matrix_market);
  if (c.surface.builtin) {
    // Steps of a builtin surface follow the run's finite-difference steps.
    if (!j.contains("surface") || !j["surface"].contains("ht")) c.surface.builtin->grid.ht = c.ht;
    if (!j.contains("surface") || !j["surface"].contains("h1")) c.surface.builtin->grid.h1 = c.h1;
    if (!j.contains("surface") || !j["surface"].contains("h2")) c.surface.builtin->grid.h2 = c.h2;
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidConfig("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json run_config_to_json(const RunConfig& c) {
  json j;
  if (c.surface.builtin) {
    j["surface"] = surface_spec_to_json(*c.surface.builtin);
  } else {
    j["surface"] = {{"srf1", c.surface.srf1_path}};
  }
  j["remove_tangential_motion"] = c.surface.remove_tangential_motion;
  switch (c.image.kind) {
    case ImageKind::pgm_dir: j["image"] = {{"pgm_dir", c.image.path}, {"normalize", c.image.normalize}}; break;
    case ImageKind::img1: j["image"] = {{"img1", c.image.path}, {"normalize", c.image.normalize}}; break;
    case ImageKind::synthetic_traffic: j["image"] = {{"synthetic", "traffic"}}; break;
    case ImageKind::constant: j["image"] = {{"constant", c.image.constant_value}}; break;
  }
  j["alpha"] = c.weights.alpha;
  j["beta"] = c.weights.beta;
  j["gamma"] = c.weights.gamma;
  j["boundary"] = c.boundary ? spatial_boundary_name(*c.boundary) : "auto";
  j["time_connection_term"] = c.time_connection_term;
  j["ht"] = c.ht;
  j["h1"] = c.h1;
  j["h2"] = c.h2;
  j["presmooth"] = {{"sigma_space", c.sigma_space}, {"sigma_time", c.sigma_time}};
  j["solver"] = {{"restart", c.solver.restart}, {"max_iters", c.solver.max_iters},
                 {"rel_tol", c.solver.rel_tol}, {"preconditioner", preconditioner_name(c.solver.preconditioner)}};
  j["trace_convention"] = trace_convention_name(c.trace_convention);
  j["output_dir"] = c.output_dir;
  if (!c.history_csv.empty()) j["history_csv"] = c.history_csv;
  if (!c.matrix_market.empty()) j["matrix_market"] = c.matrix_market;
  return j;
}

void RunConfig::validate() const {
  if (!(weights.alpha > 0.0)) throw InvalidConfig("alpha must be > 0");
  if (!(weights.gamma > 0.0)) throw InvalidConfig("gamma must be > 0");
  if (!(weights.beta >= 0.0)) throw InvalidConfig("beta must be >= 0");
  if (!(ht > 0.0 && h1 > 0.0 && h2 > 0.0)) throw InvalidConfig("step sizes must be > 0");
  if (sigma_space < 0.0 || sigma_time < 0.0) throw InvalidConfig("presmoothing sigmas must be >= 0");
  if (!surface.builtin && surface.srf1_path.empty()) throw InvalidConfig("no surface source given");
  if ((image.kind == ImageKind::pgm_dir || image.kind == ImageKind::img1) && image.path.empty())
    throw InvalidConfig("image path is empty");
  solver.validate();
}

BoundarySpec RunConfig::boundary_spec(const GridShape& g) const {
  BoundarySpec b;
  b.time_connection_term = time_connection_term;
  if (boundary) {
    b.spatial = *boundary;
  } else if (g.wrap1 && g.wrap2) {
    b.spatial = SpatialBoundary::periodic_both;
  } else if (g.wrap1) {
    b.spatial = SpatialBoundary::periodic_x1;
  } else if (g.wrap2) {
    b.spatial = SpatialBoundary::periodic_x2;
  } else {
    b.spatial = SpatialBoundary::dirichlet_zero;
  }
  return b;
}

ImageSequence load_images(const RunConfig& cfg, const GridShape* grid) {
  ImageSequence img;
  switch (cfg.image.kind) {
    case ImageKind::pgm_dir: img = load_pgm_directory(cfg.image.path); break;
    case ImageKind::img1: img = read_img1(cfg.image.path, cfg.image.normalize); break;
    case ImageKind::synthetic_traffic:
    case ImageKind::constant: {
      if (!grid || grid->nt <= 0 || grid->n1 <= 0 || grid->n2 <= 0)
        throw InvalidConfig("generated images need the surface grid sizes");
      if (cfg.image.kind == ImageKind::constant) {
        img.nt = grid->nt;
        img.n1 = grid->n1;
        img.n2 = grid->n2;
        img.values.assign(grid->size(), cfg.image.constant_value);
      } else {
        img = render_scene(default_traffic_scene(grid->n1, grid->n2), grid->nt, grid->n1, grid->n2,
                           grid->wrap1, grid->wrap2);
      }
      break;
    }
  }
  if (grid) {
    img.wrap1 = grid->wrap1;
    img.wrap2 = grid->wrap2;
  }
  return img;
}

SurfaceGrid load_surface(const RunConfig& cfg, const ImageSequence* image) {
  SurfaceGrid s;
  if (cfg.surface.builtin) {
    AnalyticSurfaceSpec spec = *cfg.surface.builtin;
    if (image) {
      if (spec.grid.nt <= 0) spec.grid.nt = image->nt;
      if (spec.grid.n1 <= 0) spec.grid.n1 = image->n1;
      if (spec.grid.n2 <= 0) spec.grid.n2 = image->n2;
    }
    s = make_surface(spec);
  } else {
    s = read_srf1(cfg.surface.srf1_path);
  }
  if (cfg.surface.remove_tangential_motion) s = remove_tangential_motion(s);
  return s;
}

EnergyProblem Problem::energy_problem() const {
  return EnergyProblem{&imd, &geom, &frame, &conn, &surface, &system, weights};
}

Problem build_problem(const RunConfig& cfg, bool assemble) {
  cfg.validate();
  Problem pb;
  pb.weights = cfg.weights;
  const bool generated = cfg.image.kind == ImageKind::synthetic_traffic || cfg.image.kind == ImageKind::constant;
  if (generated) {
    pb.surface = load_surface(cfg);
    pb.image = load_images(cfg, &pb.surface.shape);
  } else {
    ImageSequence img = load_images(cfg);
    pb.surface = load_surface(cfg, &img);
    img.wrap1 = pb.surface.shape.wrap1;
    img.wrap2 = pb.surface.shape.wrap2;
    pb.image = std::move(img);
  }
  const GridShape& g = pb.surface.shape;
  if (pb.image.nt != g.nt || pb.image.n1 != g.n1 || pb.image.n2 != g.n2)
    throw ShapeMismatch("image sequence " + std::to_string(pb.image.nt) + "x" + std::to_string(pb.image.n1) +
                        "x" + std::to_string(pb.image.n2) + " does not match the surface grid " +
                        std::to_string(g.nt) + "x" + std::to_string(g.n1) + "x" + std::to_string(g.n2));
  if (cfg.sigma_space > 0.0 || cfg.sigma_time > 0.0)
    pb.image = gaussian_presmooth(pb.image, cfg.sigma_space, cfg.sigma_time);
  pb.imd = image_derivatives(pb.image, g.ht, g.h1, g.h2);
  pb.geom = build_geometry(pb.surface, cfg.weights.alpha);
  pb.frame = orthonormal_frame(pb.geom);
  pb.chris = christoffel_symbols(pb.geom, pb.surface);
  pb.conn = connection_coefficients(pb.frame, pb.chris, pb.geom);
  pb.boundary = cfg.boundary_spec(g);
  check_boundary(pb.boundary, g);
  if (assemble) {
    pb.coeffs = pde_coefficients(pb.geom, pb.frame, pb.chris, pb.conn, pb.imd, cfg.weights, cfg.trace_convention);
    pb.system = assemble_system(pb.coeffs, pb.boundary, pb.frame, pb.conn, pb.geom);
  } else {
    pb.system.shape = g;
    pb.system.kind.assign(g.size(), RowKind::interior);
  }
  return pb;
}

std::vector<Vec2> coord_to_frame(const std::vector<Vec2>& c, const FrameField& frame) {
  if (c.size() != frame.b.size()) throw ShapeMismatch("flow does not match the surface grid");
  std::vector<Vec2> u(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) {
    const Mat2& b = frame.b[p];
    u[p] = Vec2{{b(0, 0) * c[p][0] + b(1, 0) * c[p][1], b(0, 1) * c[p][0] + b(1, 1) * c[p][1]}};
  }
  return u;
}

std::vector<Vec2> round_to_float(const std::vector<Vec2>& u) {
  std::vector<Vec2> r(u.size());
  for (std::size_t p = 0; p < u.size(); ++p)
    r[p] = Vec2{{static_cast<double>(static_cast<float>(u[p][0])), static_cast<double>(static_cast<float>(u[p][1]))}};
  return r;
}

std::string frame_file_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.flo", t);
  return buf;
}

std::vector<Vec3> push_forward(const std::vector<Vec2>& c, const SurfaceGrid& s) {
  if (c.size() != s.f1.size()) throw ShapeMismatch("flow does not match the surface grid");
  std::vector<Vec3> a(c.size());
  for (std::size_t p = 0; p < c.size(); ++p) a[p] = s.f1[p] * c[p][0] + s.f2[p] * c[p][1];
  return a;
}

SolveOutcome run_solve(const RunConfig& cfg, const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };
  if (cfg.weights.beta == 0.0)
    say("warning: beta = 0; the system may be ill-conditioned (coercivity needs beta > 0 or a rich image)");
  Problem pb = build_problem(cfg);
  const GridShape& g = pb.surface.shape;
  say("grid " + std::to_string(g.nt) + "x" + std::to_string(g.n1) + "x" + std::to_string(g.n2) + ", " +
      std::to_string(pb.system.unknowns()) + " unknowns, " + std::to_string(pb.system.matrix.nnz()) +
      " nonzeros, boundary " + spatial_boundary_name(pb.boundary.spatial));

  fs::create_directories(cfg.output_dir);
  if (!cfg.matrix_market.empty()) write_matrix_market(cfg.matrix_market, pb.system.matrix);

  std::ofstream hist;
  IterationCallback cb;
  if (!cfg.history_csv.empty()) {
    hist.open(cfg.history_csv);
    if (!hist) throw FormatError("cannot write " + cfg.history_csv);
    hist << "iteration,relative_residual\n" << std::setprecision(10);
    cb = [&](int it, double r) { hist << it << ',' << r << '\n'; };
  }
  SolveResult sol = gmres_solve(pb.system, cfg.solver, nullptr, cb);

  SolveOutcome out;
  out.report = sol.report;
  out.output_dir = cfg.output_dir;
  const FlowField exact = expand_views(unpack_flow(sol.x), pb.frame, pb.surface);
  // Energy of the flow exactly as stored (float32 coordinate components).
  const std::vector<Vec2> stored = round_to_float(exact.u_coord);
  out.flow = expand_views(coord_to_frame(stored, pb.frame), pb.frame, pb.surface);
  out.energy = discrete_energy(out.flow, pb.imd, pb.geom, pb.frame, pb.conn, cfg.weights);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir / "flow");
  const std::size_t fsz = g.frame_size();
  for (int t = 0; t < g.nt; ++t) {
    FloFrame fr;
    fr.n1 = g.n1;
    fr.n2 = g.n2;
    fr.u.assign(stored.begin() + t * fsz, stored.begin() + (t + 1) * fsz);
    write_flo((dir / "flow" / frame_file_name(t)).string(), fr);
  }
  AmbientFlow amb{g.nt, g.n1, g.n2, exact.u_ambient};
  write_fl3d((dir / "flow.fl3d").string(), amb);

  json rep;
  rep["energy"] = {{"E", out.energy.E}, {"S", out.energy.S}, {"R", out.energy.R}};
  rep["relative_residual"] = sol.report.relative_residual;
  rep["iterations"] = sol.report.iterations;
  rep["converged"] = sol.report.converged;
  rep["breakdown"] = sol.report.breakdown;
  rep["wall_time"] = sol.report.wall_time;
  rep["restart_residuals"] = sol.report.restart_residuals;
  rep["grid"] = {{"nt", g.nt}, {"n1", g.n1}, {"n2", g.n2}, {"wrap1", g.wrap1}, {"wrap2", g.wrap2},
                 {"ht", g.ht}, {"h1", g.h1}, {"h2", g.h2}};
  rep["unknowns"] = pb.system.unknowns();
  rep["nonzeros"] = pb.system.matrix.nnz();
  rep["simd"] = kernels::backend_name(kernels::active_backend());
  rep["config"] = run_config_to_json(cfg);
  std::ofstream rj(dir / "report.json");
  if (!rj) throw FormatError("cannot write report.json");
  rj << std::setprecision(17) << rep.dump(2) << '\n';

  say("GMRES: " + std::to_string(sol.report.iterations) + " iterations, relative residual " +
      std::to_string(sol.report.relative_residual) + (sol.report.converged ? " (converged)" : " (not converged)"));
  return out;
}

std::vector<Vec2> read_flow_directory(const std::string& dir, int& nt, int& n1, int& n2) {
  fs::path base(dir);
  if (fs::is_directory(base / "flow")) base /= "flow";
  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(base, ec))
    if (e.is_regular_file() && e.path().extension() == ".flo") files.push_back(e.path().string());
  if (ec || files.empty()) throw FormatError("no .flo files in " + base.string());
  std::sort(files.begin(), files.end());
  std::vector<Vec2> all;
  nt = 0;
  for (const auto& f : files) {
    const FloFrame fr = read_flo(f);
    if (nt == 0) {
      n1 = fr.n1;
      n2 = fr.n2;
    } else if (fr.n1 != n1 || fr.n2 != n2) {
      throw ShapeMismatch("flow frame " + f + " has a different size");
    }
    all.insert(all.end(), fr.u.begin(), fr.u.end());
    ++nt;
  }
  return all;
}

CompareMode parse_compare_mode(const std::string& s) {
  if (s == "pullback2d") return CompareMode::pullback2d;
  if (s == "ambient3d") return CompareMode::ambient3d;
  throw InvalidConfig("compare mode must be 'pullback2d' or 'ambient3d'");
}

CompareSummary compare_flows(const std::vector<Vec2>& a, const std::vector<Vec2>& b, int nt, int n1, int n2,
                             CompareMode mode, const SurfaceGrid* surface, std::vector<double>* angular,
                             std::vector<double>* endpoint) {
  const std::size_t n = static_cast<std::size_t>(nt) * n1 * n2;
  if (a.size() != n || b.size() != n) throw ShapeMismatch("flows to compare differ in size");
  std::vector<double> ae, ee;
  if (mode == CompareMode::ambient3d) {
    if (!surface) throw InvalidConfig("ambient comparison needs a surface");
    const GridShape& g = surface->shape;
    if (g.nt != nt || g.n1 != n1 || g.n2 != n2) throw ShapeMismatch("surface grid differs from the flow grid");
    const auto pa = push_forward(a, *surface), pb = push_forward(b, *surface);
    ae = angular_error(pa, pb);
    ee = endpoint_error(pa, pb);
  } else {
    ae = angular_error(a, b);
    ee = endpoint_error(a, b);
  }
  CompareSummary s;
  const std::size_t fsz = static_cast<std::size_t>(n1) * n2;
  double sa = 0.0, se = 0.0;
  for (int t = 0; t < nt; ++t) {
    double ma = 0.0, me = 0.0, xa = 0.0, xe = 0.0;
    for (std::size_t q = t * fsz; q < (t + 1) * fsz; ++q) {
      ma += ae[q];
      me += ee[q];
      xa = std::max(xa, ae[q]);
      xe = std::max(xe, ee[q]);
    }
    sa += ma;
    se += me;
    s.mean_angular.push_back(ma / fsz);
    s.mean_endpoint.push_back(me / fsz);
    s.max_angular.push_back(xa);
    s.max_endpoint.push_back(xe);
  }
  s.mean_angular_all = sa / n;
  s.mean_endpoint_all = se / n;
  if (angular) *angular = std::move(ae);
  if (endpoint) *endpoint = std::move(ee);
  return s;
}

}  // namespace surflow
