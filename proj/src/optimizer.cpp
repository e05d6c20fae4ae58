#include "peristokes/optimizer.hpp"

#include <cmath>
#include <cstdio>

namespace peristokes {

namespace {

struct EvalPoint {
  bool valid = false;
  FunctionalValues fv;
  double L = 0.0;
  Eigen::VectorXd grad;  // restricted to free indices
};

std::vector<int> resolve_free(const OptOptions& opt, int n) {
  if (opt.free_indices.empty()) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  for (int k : opt.free_indices)
    if (k < 0 || k >= n) throw std::out_of_range("OptOptions: free index out of range");
  return opt.free_indices;
}

// value + gradient of L_A; counts 2 solves (forward + adjoint). Invalid
// geometries come back with valid = false.
EvalPoint evaluate(const WallShapeParams& p, const Targets& targets, const SolverConfig& cfg,
                   const OptState& st, const std::vector<int>& free, long& solves) {
  EvalPoint e;
  GradientResult gr;
  try {
    gr = full_gradient(p, cfg, targets);
  } catch (const GeometryError&) {
    return e;  // pinched/degenerate trial shape: reject the step
  } catch (const SolverError&) {
    return e;  // extreme trial shape broke the dense solve: reject likewise
  }
  solves += gr.solve_count;
  if (!(gr.values.J_PL > -1e-8)) return e;  // power loss must be nonnegative;
                                            // a violation flags an under-resolved shape
  e.valid = true;
  e.fv = gr.values;
  e.L = augmented_lagrangian_value(gr.values, st);
  e.grad.resize(free.size());
  for (size_t i = 0; i < free.size(); ++i) {
    const int k = free[i];
    e.grad(i) = gr.grad.dJ(k) - st.lambda(0) * gr.grad.dCQ(k) - st.lambda(1) * gr.grad.dCV(k) +
                st.sigma(0) * gr.values.C_Q * gr.grad.dCQ(k) +
                st.sigma(1) * gr.values.C_V * gr.grad.dCV(k);
  }
  return e;
}

}  // namespace

double augmented_lagrangian_value(const FunctionalValues& fv, const OptState& state) {
  return fv.J_PL - state.lambda(0) * fv.C_Q - state.lambda(1) * fv.C_V +
         0.5 * state.sigma(0) * fv.C_Q * fv.C_Q + 0.5 * state.sigma(1) * fv.C_V * fv.C_V;
}

WallShapeParams bfgs_minimize(const WallShapeParams& start, OptState& state,
                              const Targets& targets, const SolverConfig& cfg,
                              const OptOptions& opt, FunctionalValues* final_values,
                              bool* reached_stationarity) {
  const std::vector<int> free = resolve_free(opt, start.num_params());
  const int n = int(free.size());

  WallShapeParams x = start;
  EvalPoint cur = evaluate(x, targets, cfg, state, free, state.solve_count);
  if (!cur.valid) throw GeometryError("bfgs_minimize: invalid starting shape");

  const double g0 = cur.grad.lpNorm<Eigen::Infinity>();
  Eigen::MatrixXd B = std::max(g0, 1e-3) * Eigen::MatrixXd::Identity(n, n);
  const double gtol = state.omega > 0.0 ? state.omega : opt.gtol_rel;

  int stalled = 0;
  bool stationary = false;
  for (int j = 0; j < opt.max_inner; ++j) {
    const double ginf = cur.grad.lpNorm<Eigen::Infinity>();
    if (ginf <= gtol * std::max(1.0, std::abs(cur.L))) {
      stationary = true;
      break;
    }
    if (stalled >= 2) {  // two consecutive steps without real decrease
      stationary = true;
      break;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(B);
    Eigen::VectorXd pdir;
    if (llt.info() == Eigen::Success) {
      pdir = llt.solve(-cur.grad);
    } else {
      B = std::max(ginf, 1e-3) * Eigen::MatrixXd::Identity(n, n);
      pdir = -cur.grad / std::max(ginf, 1e-3);
    }
    const double slope = cur.grad.dot(pdir);

    double eta = std::min(1.0, opt.max_step / std::max(pdir.lpNorm<Eigen::Infinity>(), 1e-30));
    EvalPoint trial;
    WallShapeParams xt = x;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      xt = x;
      for (int i = 0; i < n; ++i) xt.xi(free[i]) += eta * pdir(i);
      trial = evaluate(xt, targets, cfg, state, free, state.solve_count);
      if (trial.valid && trial.L <= cur.L + opt.armijo_c1 * eta * slope) {
        accepted = true;
        break;
      }
      if (trial.valid) {
        // quadratic-interpolation backtracking, safeguarded to [eta/10, eta/2]
        const double denom = trial.L - cur.L - slope * eta;
        double eta_q = denom > 0 ? -0.5 * slope * eta * eta / denom : 0.5 * eta;
        eta = std::min(0.5 * eta, std::max(0.1 * eta, eta_q));
      } else {
        eta *= 0.5;
      }
    }
    if (!accepted) {
      state.warning = "line search failed after " + std::to_string(opt.max_halvings) + " halvings";
      stationary = true;  // no descent achievable along the quasi-Newton direction
      break;
    }

    const Eigen::VectorXd s = eta * pdir;
    const Eigen::VectorXd y = trial.grad - cur.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12) {  // curvature condition; skip the update otherwise
      if (j == 0) B = (y.dot(y) / sy) * Eigen::MatrixXd::Identity(n, n);  // curvature rescale
      const Eigen::VectorXd Bs = B * s;
      B += (y * y.transpose()) / sy - (Bs * Bs.transpose()) / s.dot(Bs);
    }
    stalled = (cur.L - trial.L) <= 1e-8 * std::max(1.0, std::abs(cur.L)) ? stalled + 1 : 0;
    x = xt;
    cur = trial;

    state.history.push_back({state.m, j + 1, cur.fv.J_PL, cur.fv.C_Q, cur.fv.C_V,
                             cur.grad.lpNorm<Eigen::Infinity>(), eta, state.solve_count});
  }
  if (final_values) *final_values = cur.fv;
  if (reached_stationarity) *reached_stationarity = stationary;
  return x;
}

OptResult solve_constrained(const WallShapeParams& start, const Targets& targets,
                            const SolverConfig& cfg, const OptOptions& opt) {
  OptState st;
  st.zeta_star = opt.zeta_star;
  st.lambda.setZero();
  double sigma0_v = opt.sigma0_v;
  if (opt.auto_sigma_v && targets.V0 > 0.0) {
    const ChannelGeometry g0 = make_channel_geometry(start, cfg.M, cfg.Mp);
    if (std::abs(g0.volume - targets.V0) / targets.V0 > 0.1) sigma0_v = 100.0;
  }
  st.sigma << opt.sigma0_q, sigma0_v;
  const double sigma0 = opt.sigma0_q;  // scalar reference for the zeta schedule
  st.zeta = std::pow(sigma0, -0.1);
  st.omega = std::pow(sigma0, -1.0);  // loose first subproblem, tightened below

  WallShapeParams x = start;
  OptResult result;
  result.shape = x;
  bool polishing = false;
  int polish_rounds = 0;
  for (st.m = 1; st.m <= opt.max_outer; ++st.m) {
    FunctionalValues fv;
    bool stationary = false;
    OptOptions inner_opt = opt;
    if (polishing) inner_opt.max_inner = opt.max_polish_inner;
    x = bfgs_minimize(x, st, targets, cfg, inner_opt, &fv, &stationary);
    result.shape = x;
    result.values = fv;

    if (std::abs(fv.C_V) < st.zeta && std::abs(fv.C_Q) < st.zeta) {
      if (std::abs(fv.C_V) < st.zeta_star && std::abs(fv.C_Q) < st.zeta_star &&
          st.omega <= opt.gtol_rel) {
        if (polishing && stationary) {
          st.converged = true;
          break;
        }
        // feasible at the final tolerance: finish the current subproblem
        // to a tighter stationarity before stopping (multipliers frozen)
        if (polish_rounds < 2) {
          polishing = true;
          ++polish_rounds;
          st.omega = opt.polish_gtol_rel;
          continue;
        }
        st.converged = true;  // feasible; stationarity as good as the budget allows
        break;
      }
      st.lambda(0) -= st.sigma(0) * fv.C_Q;
      st.lambda(1) -= st.sigma(1) * fv.C_V;
      st.zeta *= std::pow(sigma0, -0.9);
      st.omega = std::max(st.omega * std::pow(sigma0, -0.9), opt.gtol_rel);
      polishing = false;
      polish_rounds = 0;
    } else {
      st.sigma *= 10.0;
      st.zeta = std::pow(sigma0, -0.1);
      st.omega = std::max(1.0 / st.sigma.maxCoeff(), opt.gtol_rel);
      polishing = false;
      polish_rounds = 0;
    }
  }
  if (!st.converged && st.warning.empty())
    st.warning = "outer iteration cap reached without satisfying both constraints";
  result.state = st;
  return result;
}

std::string format_convergence_log(const OptState& state) {
  std::string out = "m\tj\tJ_PL\tC_Q\tC_V\tgrad_inf\tstep\tsolves\n";
  char buf[256];
  for (const InnerRecord& r : state.history) {
    std::snprintf(buf, sizeof buf, "%d\t%d\t%.12e\t%.12e\t%.12e\t%.6e\t%.6e\t%ld\n",
                  r.m, r.j, r.J_PL, r.C_Q, r.C_V, r.grad_inf, r.step, r.solves);
    out += buf;
  }
  return out;
}

}  // namespace peristokes
