#include "peristokes/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace peristokes {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// removes the lockfile on scope exit
struct DirLock {
  std::string path;
  int fd = -1;
  explicit DirLock(const std::string& dir) {
    path = (fs::path(dir) / ".peristokes.lock").string();
    fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw ConfigError("output directory is locked by another run (" + path + ")");
  }
  ~DirLock() {
    if (fd >= 0) {
      ::close(fd);
      ::unlink(path.c_str());
    }
  }
};

}  // namespace

std::string format_shape(const WallShapeParams& p) {
  std::ostringstream out;
  out << "# peristokes wall shape\n";
  out << "N " << p.N << "\n";
  out << "L " << fmt(p.L) << "\n";
  out << "anchor " << fmt(p.xi2_lower_anchor) << "\n";
  for (int k = 0; k < p.num_params(); ++k) out << "xi " << k << " " << fmt(p.xi(k)) << "\n";
  return out.str();
}

WallShapeParams parse_shape(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int N = -1;
  double L = 2.0 * M_PI, anchor = -1.0;
  std::map<int, double> xi;
  while (std::getline(in, line)) {
    const size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "N") ls >> N;
    else if (key == "L") ls >> L;
    else if (key == "anchor") ls >> anchor;
    else if (key == "xi") {
      int k;
      double v;
      if (!(ls >> k >> v)) throw ConfigError("shape file: malformed xi line: " + line);
      xi[k] = v;
    } else {
      throw ConfigError("shape file: unknown key '" + key + "'");
    }
  }
  if (N < 1) throw ConfigError("shape file: missing or invalid N");
  WallShapeParams p(N, L, anchor);
  for (auto& [k, v] : xi) {
    if (k < 0 || k >= p.num_params()) throw ConfigError("shape file: xi index out of range");
    p.xi(k) = v;
  }
  return p;
}

void save_shape(const std::string& path, const WallShapeParams& p) {
  write_file(path, format_shape(p));
}

WallShapeParams load_shape(const std::string& path) { return parse_shape(read_file(path)); }

void RunConfig::validate() const {
  if (mode != "solve" && mode != "optimize" && mode != "check-gradient" && mode != "sample-field")
    throw ConfigError("invalid mode '" + mode + "'");
  if (solver.M < 16 || solver.M % 2) throw ConfigError("M must be even and >= 16");
  if (opt.zeta_star <= 0 || opt.gtol_rel <= 0 || solver.residual_tol <= 0)
    throw ConfigError("tolerances must be positive");
  if (fd_step <= 0) throw ConfigError("fd_step must be positive");
  if (grid_nx < 2 || grid_ny < 2) throw ConfigError("sample grid must be at least 2x2");
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
  auto as_d = [&] { return std::stod(value); };
  auto as_i = [&] { return std::stoi(value); };
  auto as_b = [&] { return value == "1" || value == "true" || value == "yes"; };
  if (key == "mode") c.mode = value;
  else if (key == "shape") c.shape_file = value;
  else if (key == "out") c.out_dir = value;
  else if (key == "seed") c.seed = std::stoul(value);
  else if (key == "N") c.N = as_i();
  else if (key == "L") c.L = as_d();
  else if (key == "anchor") c.anchor = as_d();
  else if (key == "upper0") c.upper0 = as_d();
  else if (key == "M") c.solver.M = as_i();
  else if (key == "K") c.solver.K = as_i();
  else if (key == "Mp") c.solver.Mp = as_i();
  else if (key == "proxy_radius_factor") c.solver.proxy_radius_factor = as_d();
  else if (key == "mu") c.solver.mu = as_d();
  else if (key == "c") c.solver.c = as_d();
  else if (key == "residual_tol") c.solver.residual_tol = as_d();
  else if (key == "Q0") c.targets.Q0 = as_d();
  else if (key == "V0") c.targets.V0 = as_d();
  else if (key == "sigma0_q") c.opt.sigma0_q = as_d();
  else if (key == "sigma0_v") { c.opt.sigma0_v = as_d(); c.opt.auto_sigma_v = false; }
  else if (key == "zeta_star") c.opt.zeta_star = as_d();
  else if (key == "gtol_rel") c.opt.gtol_rel = as_d();
  else if (key == "max_inner") c.opt.max_inner = as_i();
  else if (key == "max_outer") c.opt.max_outer = as_i();
  else if (key == "optimize_upper_only") c.optimize_upper_only = as_b();
  else if (key == "randomize_top_wall") c.randomize_top_wall = as_b();
  else if (key == "randomize_amplitude") c.randomize_amplitude = as_d();
  else if (key == "fd_step") c.fd_step = as_d();
  else if (key == "grid_nx") c.grid_nx = as_i();
  else if (key == "grid_ny") c.grid_ny = as_i();
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const size_t h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    // accept `key value` and `key = value`
    for (char& ch : line)
      if (ch == '=') ch = ' ';
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value)) throw ConfigError("config: missing value for key '" + key + "'");
    apply_override(cfg, key, value);
  }
  return cfg;
}

std::string format_wall_fields(const ChannelGeometry& geom, const FlowSolution& fwd) {
  std::ostringstream out;
  out << "wall\tt\tx1\tx2\ttau1\ttau2\tn1\tn2\tkappa\tf1\tf2\tp\tfs\n";
  char buf[512];
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wi == 0 ? geom.upper : geom.lower;
    const Eigen::MatrixX2d& f = wi == 0 ? fwd.traction_upper : fwd.traction_lower;
    const Eigen::VectorXd& p = wi == 0 ? fwd.pressure_upper : fwd.pressure_lower;
    const Eigen::VectorXd& fsv = wi == 0 ? fwd.fs_upper : fwd.fs_lower;
    for (int j = 0; j < w.M; ++j) {
      std::snprintf(buf, sizeof buf,
                    "%s\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%.12e\n",
                    wi == 0 ? "upper" : "lower", w.t(j), w.x(j, 0), w.x(j, 1), w.tau(j, 0),
                    w.tau(j, 1), w.n(j, 0), w.n(j, 1), w.kappa(j), f(j, 0), f(j, 1), p(j), fsv(j));
      out << buf;
    }
  }
  return out.str();
}

std::string format_solve_report(const FunctionalValues& fv, const FlowSolution& fwd,
                                const FlowSolution& adj) {
  std::ostringstream out;
  out << "J_PL " << fmt(fv.J_PL) << "\n"
      << "Q " << fmt(fv.Q) << "\n"
      << "V " << fmt(fv.V) << "\n"
      << "C_Q " << fmt(fv.C_Q) << "\n"
      << "C_V " << fmt(fv.C_V) << "\n"
      << "forward_residual " << fmt(fwd.residual) << "\n"
      << "adjoint_residual " << fmt(adj.residual) << "\n";
  return out.str();
}

namespace {

WallShapeParams initial_shape(const RunConfig& cfg) {
  WallShapeParams p;
  if (!cfg.shape_file.empty()) {
    p = load_shape(cfg.shape_file);
  } else {
    p = WallShapeParams(cfg.N, cfg.L, cfg.anchor);
    p.xi(p.index_xi2_upper0()) = cfg.upper0;
  }
  if (cfg.randomize_top_wall) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int N = p.N;
    for (int k = 1; k <= 2 * N; ++k) {
      const int wave = k <= N ? k : k - N;
      p.xi(4 * N + k) += cfg.randomize_amplitude * u(rng) / (wave * wave);
    }
  }
  return p;
}

std::vector<int> upper_only_indices(const WallShapeParams& p) {
  std::vector<int> idx;
  const int N = p.N;
  for (int k = 0; k < 2 * N; ++k) idx.push_back(k);                  // xi1+
  for (int k = 4 * N; k < 6 * N + 1; ++k) idx.push_back(k);          // xi2+_0, xi2+
  return idx;
}

int run_solve(const RunConfig& cfg, const WallShapeParams& shape) {
  const ChannelGeometry geom = make_channel_geometry(shape, cfg.solver.M, cfg.solver.Mp);
  const PeriodicStokesSolver solver(geom, cfg.solver);
  const FlowSolution fwd = solver.solve_forward();
  const FlowSolution adj = solver.solve_adjoint();
  const FunctionalValues fv = evaluate_functionals(fwd, adj, geom, cfg.solver, cfg.targets);
  write_file((fs::path(cfg.out_dir) / "solve_report.txt").string(), format_solve_report(fv, fwd, adj));
  write_file((fs::path(cfg.out_dir) / "wall_fields.tsv").string(), format_wall_fields(geom, fwd));
  write_file((fs::path(cfg.out_dir) / "wall_fields_adjoint.tsv").string(),
             format_wall_fields(geom, adj));
  return kOk;
}

int run_optimize(const RunConfig& cfg, const WallShapeParams& shape) {
  OptOptions opt = cfg.opt;
  if (cfg.optimize_upper_only) opt.free_indices = upper_only_indices(shape);
  save_shape((fs::path(cfg.out_dir) / "initial_shape.txt").string(), shape);
  const OptResult res = solve_constrained(shape, cfg.targets, cfg.solver, opt);
  save_shape((fs::path(cfg.out_dir) / "final_shape.txt").string(), res.shape);
  write_file((fs::path(cfg.out_dir) / "convergence_log.tsv").string(),
             format_convergence_log(res.state));
  std::ostringstream sum;
  sum << "converged " << (res.state.converged ? 1 : 0) << "\n"
      << "outer_iterations " << res.state.m << "\n"
      << "solve_count " << res.state.solve_count << "\n"
      << "J_PL " << fmt(res.values.J_PL) << "\n"
      << "C_Q " << fmt(res.values.C_Q) << "\n"
      << "C_V " << fmt(res.values.C_V) << "\n";
  if (!res.state.warning.empty()) sum << "warning " << res.state.warning << "\n";
  write_file((fs::path(cfg.out_dir) / "optimize_summary.txt").string(), sum.str());
  return res.state.converged ? kOk : kNotConverged;
}

int run_check_gradient(const RunConfig& cfg, const WallShapeParams& shape) {
  const GradientResult an = full_gradient(shape, cfg.solver, cfg.targets);
  const int n = shape.num_params();
  Eigen::VectorXd fdJ(n), fdQ(n), fdV(n);
  for (int k = 0; k < n; ++k) {
    const double h = cfg.fd_step * std::max(1.0, std::abs(shape.xi(k)));
    auto eval = [&](double delta) {
      WallShapeParams q = shape;
      q.xi(k) += delta;
      const ChannelGeometry g = make_channel_geometry(q, cfg.solver.M, cfg.solver.Mp);
      const PeriodicStokesSolver s(g, cfg.solver);
      const FlowSolution fw = s.solve_forward();
      const FlowSolution ad = s.solve_adjoint();
      return evaluate_functionals(fw, ad, g, cfg.solver, cfg.targets);
    };
    const FunctionalValues fp = eval(h), fm = eval(-h);
    fdJ(k) = (fp.J_PL - fm.J_PL) / (2 * h);
    fdQ(k) = (fp.Q - fm.Q) / (2 * h);
    fdV(k) = (fp.V - fm.V) / (2 * h);
  }
  // relative error with a gradient-scale floor so that structurally-zero
  // entries compare against FD noise sensibly
  auto rel = [](double a, double b, double scale) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3 * scale, 1e-12});
  };
  const double sJ = fdJ.lpNorm<Eigen::Infinity>();
  const double sQ = fdQ.lpNorm<Eigen::Infinity>();
  const double sV = fdV.lpNorm<Eigen::Infinity>();

  std::ostringstream out;
  out << "k\tdJ_analytic\tdJ_fd\tdJ_relerr\tdCQ_analytic\tdCQ_fd\tdCQ_relerr\tdCV_analytic\tdCV_fd\tdCV_relerr\n";
  char buf[512];
  double max_rel = 0.0;
  for (int k = 0; k < n; ++k) {
    const double rJ = rel(an.grad.dJ(k), fdJ(k), sJ), rQ = rel(an.grad.dCQ(k), fdQ(k), sQ),
                 rV = rel(an.grad.dCV(k), fdV(k), sV);
    max_rel = std::max({max_rel, rJ, rQ, rV});
    std::snprintf(buf, sizeof buf,
                  "%d\t%.12e\t%.12e\t%.3e\t%.12e\t%.12e\t%.3e\t%.12e\t%.12e\t%.3e\n", k,
                  an.grad.dJ(k), fdJ(k), rJ, an.grad.dCQ(k), fdQ(k), rQ, an.grad.dCV(k), fdV(k), rV);
    out << buf;
  }
  char tail[64];
  std::snprintf(tail, sizeof tail, "# max_relerr %.3e\n", max_rel);
  out << tail;
  write_file((fs::path(cfg.out_dir) / "gradient_check.tsv").string(), out.str());
  return kOk;
}

int run_sample_field(const RunConfig& cfg, const WallShapeParams& shape) {
  const ChannelGeometry geom = make_channel_geometry(shape, cfg.solver.M, cfg.solver.Mp);
  const PeriodicStokesSolver solver(geom, cfg.solver);
  const FlowSolution fwd = solver.solve_forward();

  double y_lo = std::min(geom.lower.x.col(1).minCoeff(), geom.z_minus(1));
  double y_hi = std::max(geom.upper.x.col(1).maxCoeff(), geom.z_plus(1));
  std::vector<Vec2> pts;
  pts.reserve(size_t(cfg.grid_nx) * cfg.grid_ny);
  for (int iy = 0; iy < cfg.grid_ny; ++iy)
    for (int ix = 0; ix < cfg.grid_nx; ++ix)
      pts.emplace_back(geom.L * (ix + 0.5) / cfg.grid_nx,
                       y_lo + (y_hi - y_lo) * (iy + 0.5) / cfg.grid_ny);

  // between-walls test; x1(t) inverted by bisection (graph-like walls)
  auto wall_y = [&](WallSide side, double x1) {
    double lo = 0.0, hi = 2.0 * M_PI;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (eval_wall(geom.params, side, mid)(0) < x1 ? lo : hi) = mid;
    }
    return eval_wall(geom.params, side, 0.5 * (lo + hi))(1);
  };
  auto inside = [&](const Vec2& x) {
    return x(1) > wall_y(WallSide::Lower, x(0)) && x(1) < wall_y(WallSide::Upper, x(0));
  };

  std::vector<FieldSample> samples = solver.eval_field(fwd, pts);
  std::ostringstream out;
  out << "x1\tx2\tu1\tu2\tp\tvalid\n";
  char buf[256];
  for (size_t i = 0; i < pts.size(); ++i) {
    const bool ok = inside(pts[i]) && samples[i].reliable;
    std::snprintf(buf, sizeof buf, "%.12e\t%.12e\t%.12e\t%.12e\t%.12e\t%d\n", pts[i](0), pts[i](1),
                  ok ? samples[i].velocity(0) : 0.0, ok ? samples[i].velocity(1) : 0.0,
                  ok ? samples[i].pressure : 0.0, ok ? 1 : 0);
    out << buf;
  }
  write_file((fs::path(cfg.out_dir) / "field.tsv").string(), out.str());

  std::ostringstream wl;
  wl << "wall\tx1\tx2\n";
  for (int wi = 0; wi < 2; ++wi) {
    const DiscretizedWall& w = wi == 0 ? geom.upper : geom.lower;
    for (int j = 0; j < w.M; ++j) {
      std::snprintf(buf, sizeof buf, "%s\t%.12e\t%.12e\n", wi == 0 ? "upper" : "lower", w.x(j, 0),
                    w.x(j, 1));
      wl << buf;
    }
  }
  write_file((fs::path(cfg.out_dir) / "walls.tsv").string(), wl.str());
  return kOk;
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  }
  try {
    DirLock lock(cfg.out_dir);
    const WallShapeParams shape = initial_shape(cfg);
    if (cfg.mode == "solve") return run_solve(cfg, shape);
    if (cfg.mode == "optimize") return run_optimize(cfg, shape);
    if (cfg.mode == "check-gradient") return run_check_gradient(cfg, shape);
    return run_sample_field(cfg, shape);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const GeometryError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  }
}

}  // namespace peristokes
