// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/errors.hpp"

namespace edgegnn {
namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Stacked channel h_k in C^{MN}, block m at rows [m*N, (m+1)*N).
std::vector<Vec> stacked_channels(const ProblemInstance& inst) {
  std::vector<Vec> h(inst.K, Vec::Zero(static_cast<Eigen::Index>(inst.M) * inst.N));
  for (int k = 0; k < inst.K; ++k)
    for (int m = 0; m < inst.M; ++m)
      for (int n = 0; n < inst.N; ++n) h[k](m * inst.N + n) = inst.h(m, k, n);
  return h;
}

Beamformer unstack(const Mat& X, int M, int K, int N) {
  Beamformer V(M, K, N);
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      for (int n = 0; n < N; ++n) V.v(m, k, n) = X(m * N + n, k);
  return V;
}

// Solves (A + blockdiag(mu_m I_N)) X = R column-wise.
class UpdateSystem {
 public:
  struct Solution {
    Mat X;
    Eigen::LDLT<Mat> ldlt;
  };

  UpdateSystem(Mat A, Mat rhs, int M, int N) : A_(std::move(A)), rhs_(std::move(rhs)), M_(M), N_(N) {}

  Solution factor_solve(const std::vector<double>& mu) const {
    Mat B = A_;
    for (int m = 0; m < M_; ++m)
      for (int n = 0; n < N_; ++n) B(m * N_ + n, m * N_ + n) += mu[m];
    Solution out;
    out.ldlt.compute(B);
    if (singular(out.ldlt)) {
      double max_diag = 0.0;
      for (Eigen::Index i = 0; i < B.rows(); ++i) max_diag = std::max(max_diag, std::abs(B(i, i).real()));
      B.diagonal().array() += 1e-12 * std::max(max_diag, 1.0);
      out.ldlt.compute(B);
      if (out.ldlt.info() != Eigen::Success)
        throw SolverError("wmmse: beamformer system is singular after regularization");
    }
    out.X = rhs_.isZero(0.0) ? Mat::Zero(rhs_.rows(), rhs_.cols()) : Mat(out.ldlt.solve(rhs_));
    if (!out.X.allFinite()) throw SolverError("wmmse: beamformer system is singular after regularization");
    return out;
  }

  Mat solve(const std::vector<double>& mu) const { return factor_solve(mu).X; }

  std::vector<double> power(const Mat& X) const {
    std::vector<double> p(M_, 0.0);
    for (int m = 0; m < M_; ++m) p[m] = X.middleRows(m * N_, N_).squaredNorm();
    return p;
  }

  /// Lagrange dual -sum_k r_k^H x_k - sum_m mu_m P_m, concave in mu.
  double dual(const Mat& X, const std::vector<double>& mu, std::span<const double> budget) const {
    double g = -(rhs_.adjoint() * X).trace().real();
    for (int m = 0; m < M_; ++m) g -= mu[m] * budget[m];
    return g;
  }

  /// d p_m / d mu_j = -2 Re tr(X_m^H [B^{-1} D_j X]_m).
  Eigen::MatrixXd power_jacobian(const Solution& s) const {
    Eigen::MatrixXd J(M_, M_);
    for (int j = 0; j < M_; ++j) {
      Mat DX = Mat::Zero(s.X.rows(), s.X.cols());
      DX.middleRows(j * N_, N_) = s.X.middleRows(j * N_, N_);
      const Mat Y = s.ldlt.solve(DX);
      for (int m = 0; m < M_; ++m)
        J(m, j) = -2.0 * (s.X.middleRows(m * N_, N_).adjoint() * Y.middleRows(m * N_, N_)).trace().real();
    }
    return J;
  }

 private:
  static bool singular(const Eigen::LDLT<Mat>& ldlt) {
    if (ldlt.info() != Eigen::Success) return true;
    const Eigen::VectorXd d = ldlt.vectorD().real().cwiseAbs();
    const double hi = d.maxCoeff();
    return !(hi > 0.0) || d.minCoeff() <= 1e-14 * hi;
  }

  Mat A_;
  Mat rhs_;
  int M_;
  int N_;
};

bool within_cycle_tolerance(const std::vector<double>& p, const std::vector<double>& mu, std::span<const double> budget,
                            double tol) {
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] > budget[m] * (1.0 + tol)) return false;
    if (mu[m] > 0.0 && p[m] < budget[m] * (1.0 - tol)) return false;
  }
  return true;
}

// Largest relative KKT violation: over-budget power anywhere, or a positive
// multiplier whose BS is under budget.
double kkt_residual(const std::vector<double>& p, const std::vector<double>& mu, std::span<const double> budget) {
  double worst = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) {
    const double gap = (p[m] - budget[m]) / budget[m];
    worst = std::max(worst, mu[m] > 0.0 ? std::abs(gap) : std::max(gap, 0.0));
  }
  return worst;
}

bool all_within_budget(const std::vector<double>& p, std::span<const double> budget) {
  for (std::size_t m = 0; m < p.size(); ++m)
    if (p[m] > budget[m]) return false;
  return true;
}

// Smallest shared multiplier t (to 1e-3 relative) with every BS inside its
// budget at mu = t * 1. Puts all coordinates on the right scale before the
// cyclic refinement; starting that refinement from mu = 0 crawls because the
// system is rank deficient there.
std::vector<double> shared_scale_start(const UpdateSystem& sys, std::span<const double> budget, int M) {
  std::vector<double> mu(M, 0.0);
  if (all_within_budget(sys.power(sys.solve(mu)), budget)) return mu;
  double lo = 0.0, hi = 1e-6;
  for (int grow = 0; !all_within_budget(sys.power(sys.solve(std::vector<double>(M, hi))), budget); ++grow) {
    if (grow > 2000) throw SolverError("wmmse: multiplier bracket did not close");
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (all_within_budget(sys.power(sys.solve(std::vector<double>(M, mid))), budget))
      hi = mid;
    else
      lo = mid;
  }
  return std::vector<double>(M, hi);
}

// Projected Newton ascent on the dual from the current multipliers. Cyclic
// bisection converges only linearly when BS blocks are strongly coupled; a few
// Newton steps finish the job. Returns true when the cycle tolerance is met.
bool newton_polish(const UpdateSystem& sys, std::span<const double> budget, double tol, std::vector<double>& mu,
                   Mat& X) {
  const int M = static_cast<int>(mu.size());
  UpdateSystem::Solution cur = sys.factor_solve(mu);
  double g = sys.dual(cur.X, mu, budget);
  for (int it = 0; it < 30; ++it) {
    std::vector<double> p = sys.power(cur.X);
    const double residual = kkt_residual(p, mu, budget);
    if (within_cycle_tolerance(p, mu, budget, tol)) {
      X = std::move(cur.X);
      return true;
    }
    std::vector<int> free;
    for (int m = 0; m < M; ++m)
      if (mu[m] > 0.0 || p[m] > budget[m]) free.push_back(m);
    const Eigen::MatrixXd J = sys.power_jacobian(cur);
    const int F = static_cast<int>(free.size());
    Eigen::MatrixXd H(F, F);
    Eigen::VectorXd r(F);
    for (int a = 0; a < F; ++a) {
      r(a) = p[free[a]] - budget[free[a]];
      for (int b = 0; b < F; ++b) H(a, b) = J(free[a], free[b]);
    }
    const Eigen::VectorXd step = H.ldlt().solve(-r);
    if (!step.allFinite()) return false;

    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-6; alpha *= 0.5) {
      std::vector<double> trial = mu;
      for (int a = 0; a < F; ++a) trial[free[a]] = std::max(0.0, mu[free[a]] + alpha * step(a));
      UpdateSystem::Solution next = sys.factor_solve(trial);
      const double g_next = sys.dual(next.X, trial, budget);
      // Near the optimum the dual moves by less than its rounding error, so a
      // step that stays within that noise is judged by the KKT residual.
      const bool ascent = g_next >= g;
      const bool flat = g_next >= g - 1e-12 * (1.0 + std::abs(g)) &&
                        kkt_residual(sys.power(next.X), trial, budget) < residual;
      if (ascent || flat) {
        mu = std::move(trial);
        cur = std::move(next);
        g = g_next;
        accepted = true;
        break;
      }
    }
    if (!accepted) return false;
  }
  if (within_cycle_tolerance(sys.power(cur.X), mu, budget, tol)) {
    X = std::move(cur.X);
    return true;
  }
  return false;
}

MultiplierResult search(const UpdateSystem& sys, const ProblemInstance& inst, const MultiplierOptions& options,
                        const std::vector<double>* warm_start) {
  const int M = inst.M;
  std::span<const double> budget = inst.power_budget;
  MultiplierResult out;
  out.mu = warm_start ? *warm_start : shared_scale_start(sys, budget, M);
  Mat X = sys.solve(out.mu);

  for (int cycle = 0; cycle < options.max_cycles; ++cycle) {
    out.cycles = cycle + 1;
    for (int m = 0; m < M; ++m) {
      std::vector<double> mu = out.mu;
      mu[m] = 0.0;
      Mat X0 = sys.solve(mu);
      if (sys.power(X0)[m] <= budget[m]) {
        out.mu = std::move(mu);
        X = std::move(X0);
        continue;
      }
      // Power at BS m is non-increasing in mu_m; bracket, then bisect keeping
      // the feasible end.
      double lo = 0.0;
      double hi = out.mu[m] > 0.0 ? out.mu[m] : 1e-6;
      mu[m] = hi;
      Mat X_hi = sys.solve(mu);
      for (int grow = 0; sys.power(X_hi)[m] > budget[m]; ++grow) {
        if (grow > 2000) throw SolverError("wmmse: multiplier bracket did not close");
        lo = hi;
        hi *= 2.0;
        mu[m] = hi;
        X_hi = sys.solve(mu);
      }
      if (lo == 0.0 && hi > 1e-6) {
        // Warm start from the previous cycle: shrink towards zero while still feasible.
        for (int shrink = 0; shrink < 200; ++shrink) {
          mu[m] = hi * 0.5;
          Mat X_try = sys.solve(mu);
          if (sys.power(X_try)[m] > budget[m]) {
            lo = hi * 0.5;
            break;
          }
          hi *= 0.5;
          X_hi = std::move(X_try);
        }
      }
      for (int it = 0; it < 400; ++it) {
        const double p_hi = sys.power(X_hi)[m];
        if (budget[m] - p_hi <= options.bisection_tol * budget[m] || hi - lo <= 1e-15 * hi) break;
        const double mid = 0.5 * (lo + hi);
        mu[m] = mid;
        Mat X_mid = sys.solve(mu);
        if (sys.power(X_mid)[m] > budget[m]) {
          lo = mid;
        } else {
          hi = mid;
          X_hi = std::move(X_mid);
        }
      }
      mu[m] = hi;
      out.mu = std::move(mu);
      X = std::move(X_hi);
    }
    if (within_cycle_tolerance(sys.power(X), out.mu, budget, options.cycle_tol)) {
      out.converged = true;
      break;
    }
    std::vector<double> polished = out.mu;
    if (newton_polish(sys, budget, options.cycle_tol, polished, X)) {
      out.mu = std::move(polished);
      out.converged = true;
      break;
    }
  }
  out.V = unstack(X, inst.M, inst.K, inst.N);
  return out;
}

UpdateSystem build_system(const ProblemInstance& inst, const std::vector<Vec>& h, std::span<const cdouble> u,
                          std::span<const double> w) {
  const Eigen::Index dim = static_cast<Eigen::Index>(inst.M) * inst.N;
  Mat A = Mat::Zero(dim, dim);
  Mat rhs(dim, inst.K);
  for (int k = 0; k < inst.K; ++k) {
    A.noalias() += (w[k] * std::norm(u[k])) * (h[k] * h[k].adjoint());
    rhs.col(k) = (w[k] * u[k]) * h[k];
  }
  // Enforce exact Hermitian symmetry before factorization.
  Mat sym = 0.5 * (A + A.adjoint());
  return UpdateSystem(std::move(sym), std::move(rhs), inst.M, inst.N);
}

}  // namespace

MultiplierResult multiplier_search(const ProblemInstance& inst, std::span<const cdouble> u, std::span<const double> w,
                                   const MultiplierOptions& options) {
  inst.validate();
  if (u.size() != static_cast<std::size_t>(inst.K) || w.size() != static_cast<std::size_t>(inst.K))
    throw DimensionError("multiplier_search: u and w need one entry per UE");
  return search(build_system(inst, stacked_channels(inst), u, w), inst, options, nullptr);
}

SolverReport wmmse_solve(const ProblemInstance& inst, const WmmseOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  inst.validate();
  SolverReport report;
  report.solver = "wmmse";

  const std::vector<Vec> h = stacked_channels(inst);
  Beamformer V = options.init ? *options.init : matched_filter_init(inst);
  require_matching_shape(inst, V);
  V = project_power(std::move(V), inst.power_budget);
  double f = sum_rate(inst, V);
  report.objective_trace.push_back(f);

  std::vector<cdouble> u(inst.K);
  std::vector<double> w(inst.K);
  bool multipliers_ok = true;
  std::vector<double> mu;
  for (int it = 0; it < options.max_iters; ++it) {
    // Receiver and weight updates: u_k = h_k^H v_k / T_k, w_k = T_k / (T_k - |h_k^H v_k|^2) = 1 + SINR_k.
    for (int k = 0; k < inst.K; ++k) {
      double total = inst.noise_power[k];
      cdouble desired{0.0, 0.0};
      for (int l = 0; l < inst.K; ++l) {
        cdouble s{0.0, 0.0};
        for (int m = 0; m < inst.M; ++m)
          for (int n = 0; n < inst.N; ++n) s += std::conj(inst.h(m, k, n)) * V.v(m, l, n);
        total += std::norm(s);
        if (l == k) desired = s;
      }
      u[k] = desired / total;
      w[k] = std::max(1.0, total / (total - std::norm(desired)));
    }

    MultiplierResult mr = search(build_system(inst, h, u, w), inst, options.multipliers, mu.empty() ? nullptr : &mu);
    mu = mr.mu;
    Beamformer next = std::move(mr.V);
    if (!mr.converged) {
      multipliers_ok = false;
      next = project_power(std::move(next), inst.power_budget);
    }
    const double f_next = sum_rate(inst, next);
    if (!std::isfinite(f_next)) throw NumericError("wmmse: non-finite sum rate");
    const double improvement = f_next - f;
    V = std::move(next);
    f = f_next;
    report.objective_trace.push_back(f);
    ++report.iterations;
    if (improvement < options.tol) {
      report.converged = true;
      break;
    }
  }

  if (!multipliers_ok) report.note = "multiplier search hit its cycle limit";
  report.V = std::move(V);
  report.feasible = is_feasible(report.V, inst.power_budget);
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace edgegnn
