// SPDX-License-Identifier: Apache-2.0
#include "edgegnn/experiments/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "edgegnn/baselines/baselines.hpp"
#include "edgegnn/errors.hpp"
#include "edgegnn/numerics/grad_check.hpp"
#include "edgegnn/scenario/scenario.hpp"
#include "edgegnn/trainer/trainer.hpp"
#include "edgegnn/util/parallel.hpp"
#include "edgegnn/util/seeds.hpp"

namespace edgegnn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

PropertyResult bounded(std::string name, double value, double threshold, std::string detail, Clock::time_point t0) {
  PropertyResult r;
  r.name = std::move(name);
  r.value = value;
  r.threshold = threshold;
  r.passed = std::isfinite(value) && value <= threshold;
  r.detail = std::move(detail);
  r.seconds = seconds_since(t0);
  return r;
}

Beamformer random_beamformer(const ProblemInstance& inst, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Beamformer V(inst.M, inst.K, inst.N);
  for (auto& w : V.weights) w = cdouble(normal(rng), normal(rng));
  return project_power(std::move(V), inst.power_budget, PowerNormalization::Boundary);
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

template <class T>
double equivariance_sweep(const ModelParams<T>& params, const EquivarianceOptions& o) {
  double worst = 0.0;
  for (int t = 0; t < o.trials; ++t) {
    const ProblemInstance inst = sample_instance(o.M, o.K, o.N, derive_seed(o.seed, {10, std::uint64_t(t)}));
    const PermutationPair perm = PermutationPair::random(o.M, o.K, derive_seed(o.seed, {11, std::uint64_t(t)}));
    worst = std::max(worst, equivariance_error(params, inst, perm, o.forward));
  }
  return worst;
}

template <class T>
ad::Tensor<T> random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ad::Tensor<T> t(ad::Shape{rows, cols});
  for (auto& x : t.data()) x = static_cast<T>(normal(rng));
  return t;
}

std::size_t count_mismatch(const ad::Tensor<float>& a, const ad::Tensor<float>& b) {
  if (a.shape() != b.shape()) return std::max(a.size(), b.size());
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace

nlohmann::json to_json(const PropertyResult& r) {
  return {{"name", r.name},   {"passed", r.passed}, {"value", r.value},
          {"threshold", r.threshold}, {"margin", r.margin()}, {"detail", r.detail}};
}

bool PropertyReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.passed; });
}

std::vector<std::string> PropertyReport::failures() const {
  std::vector<std::string> out;
  for (const auto& r : results)
    if (!r.passed) out.push_back(r.name);
  return out;
}

nlohmann::json to_json(const PropertyReport& r) {
  nlohmann::json props = nlohmann::json::array();
  for (const auto& p : r.results) props.push_back(to_json(p));
  return {{"passed", r.all_passed()}, {"failures", r.failures()}, {"properties", props}};
}

template <class T>
double equivariance_error(const ModelParams<T>& params, const ProblemInstance& inst, const PermutationPair& perm,
                          const ForwardOptions& options) {
  const Beamformer expected = apply_permutation(infer<T>(inst, params, options), perm);
  const Beamformer actual = infer<T>(apply_permutation(inst, perm), params, options);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < expected.weights.size(); ++i) {
    diff = std::max(diff, std::abs(expected.weights[i] - actual.weights[i]));
    scale = std::max(scale, std::abs(expected.weights[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

template double equivariance_error<float>(const ModelParams<float>&, const ProblemInstance&, const PermutationPair&,
                                          const ForwardOptions&);
template double equivariance_error<double>(const ModelParams<double>&, const ProblemInstance&, const PermutationPair&,
                                           const ForwardOptions&);

PropertyResult check_equivariance_f32(const ModelParams<float>& params, const EquivarianceOptions& options) {
  const auto t0 = Clock::now();
  const double worst = equivariance_sweep(params, options);
  return bounded("equivariance_f32", worst, 1e-5,
                 format("max relative error over %.0f trials: %.3e", options.trials, worst), t0);
}

PropertyResult check_equivariance_f64(const ModelParams<double>& params, const EquivarianceOptions& options) {
  const auto t0 = Clock::now();
  const double worst = equivariance_sweep(params, options);
  return bounded("equivariance_f64", worst, 1e-10,
                 format("max relative error over %.0f trials: %.3e", options.trials, worst), t0);
}

PropertyResult check_layer_equivariance(const ModelParams<float>& params, const EquivarianceOptions& o) {
  const auto t0 = Clock::now();
  const std::size_t M = o.M, K = o.K;
  const std::size_t d = params.pre_bs.layers.back().weight.cols();
  const EdgeGroups groups = EdgeGroups::build(Topology::full(o.M, o.K));
  const TransposedWeights<float> transposed = transpose_weights(params);
  const int L = static_cast<int>(params.layers.size());

  std::size_t mismatches = 0, compared = 0;
  for (int t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng(derive_seed(o.seed, {20, std::uint64_t(t)}));
    const PermutationPair perm = PermutationPair::random(o.M, o.K, derive_seed(o.seed, {21, std::uint64_t(t)}));
    const int l = 1 + t % L;
    const ad::Tensor<float> bs = random_tensor<float>(M, d, rng), ue = random_tensor<float>(K, d, rng),
                            edge = random_tensor<float>(M * K, d, rng);

    auto run = [&](const ad::Tensor<float>& b, const ad::Tensor<float>& u, const ad::Tensor<float>& e) {
      ad::Tape<float> tape;
      const BoundParams<float> bound = bind_params(tape, params, &transposed);
      GraphState<float> s{tape.constant(b), tape.constant(u), tape.constant(e)};
      const GraphState<float> next = update_layer(s, groups, bound, l, o.forward);
      return std::array<ad::Tensor<float>, 3>{next.bs.value(), next.ue.value(), next.edge.value()};
    };
    const auto plain = run(bs, ue, edge);
    const auto permuted = run(permute_bs_rows(bs, perm), permute_ue_rows(ue, perm), permute_edge_rows(edge, perm));
    mismatches += count_mismatch(permute_bs_rows(plain[0], perm), permuted[0]);
    mismatches += count_mismatch(permute_ue_rows(plain[1], perm), permuted[1]);
    mismatches += count_mismatch(permute_edge_rows(plain[2], perm), permuted[2]);
    compared += plain[0].size() + plain[1].size() + plain[2].size();
  }
  std::ostringstream detail;
  detail << mismatches << " of " << compared << " elements differ (exact comparison, " << o.trials << " states)";
  return bounded("layer_equivariance", static_cast<double>(mismatches), 0.0, detail.str(), t0);
}

PropertyResult check_gradient(const GradientCheckOptions& o) {
  const auto t0 = Clock::now();
  ModelConfig cfg;
  cfg.d = o.d;
  cfg.N = o.N;
  const ModelParams<double> params = init_params<double>(cfg, derive_seed(o.seed, {30}));
  std::vector<ProblemInstance> batch;
  for (int i = 0; i < o.batch; ++i)
    batch.push_back(sample_instance(o.M, o.K, o.N, derive_seed(o.seed, {31, std::uint64_t(i)})));

  ModelParams<double> grads;
  batch_loss<double>(params, batch, &grads);
  const std::vector<double> point = flatten(params);
  const std::vector<double> analytic = flatten(grads);

  ModelParams<double> probe = params;
  auto loss = [&](std::span<const double> x) {
    unflatten<double>(x, probe);
    return batch_loss<double>(probe, batch, nullptr).loss;
  };
  ad::GradCheckOptions gc;
  gc.tolerance = o.tolerance;
  const ad::GradCheckReport rep = ad::grad_check(loss, point, analytic, gc);

  const double miss = 1.0 - rep.pass_fraction();
  std::ostringstream detail;
  detail << rep.passed << " of " << (rep.passed + rep.failed) << " coordinates within " << o.tolerance
         << " relative, " << rep.excluded_count << " kink-adjacent excluded";
  return bounded("gradient_check", miss, 1.0 - o.required_fraction, detail.str(), t0);
}

PropertyResult check_feasibility(const ModelParams<float>& params, const EquivarianceOptions& o) {
  const auto t0 = Clock::now();
  const InferenceModel<float> model(params);
  double worst = -1e300;
  for (int t = 0; t < o.trials; ++t) {
    const ProblemInstance inst = sample_instance(o.M, o.K, o.N, derive_seed(o.seed, {40, std::uint64_t(t)}));
    const std::vector<double> p = bs_power(model.infer(inst, o.forward));
    for (int m = 0; m < inst.M; ++m) worst = std::max(worst, p[m] - inst.power_budget[m]);
  }
  return bounded("power_feasibility", worst, 1e-6, format("largest power excess over budget: %.3e W", worst), t0);
}

double single_user_optimum(const ProblemInstance& inst) {
  if (inst.K != 1) throw ArgumentError("single_user_optimum needs K = 1");
  double amplitude = 0.0;
  for (int m = 0; m < inst.M; ++m) {
    double norm2 = 0.0;
    for (int n = 0; n < inst.N; ++n) norm2 += std::norm(inst.h(m, 0, n));
    amplitude += std::sqrt(inst.power_budget[m] * norm2);
  }
  return std::log2(1.0 + amplitude * amplitude / inst.noise_power[0]);
}

std::vector<PropertyResult> check_solvers(const SolverCheckOptions& o) {
  const auto t0 = Clock::now();
  const std::size_t S = o.single_user_instances, R = o.monotone_instances;
  std::vector<double> gp_gap(S), wm_gap(S), excess(2 * S + R, -1e300), drop(R, 0.0);
  std::vector<int> unconverged(R, 0);

  auto power_excess = [](const ProblemInstance& inst, const Beamformer& V) {
    const std::vector<double> p = bs_power(V);
    double worst = -1e300;
    for (int m = 0; m < inst.M; ++m) worst = std::max(worst, p[m] - inst.power_budget[m]);
    return worst;
  };

  parallel_for(S, o.jobs, [&](std::size_t i) {
    const ProblemInstance inst = sample_instance(o.single_user_M, 1, o.N, derive_seed(o.seed, {50, i}));
    const double opt = single_user_optimum(inst);
    const SolverReport gp = gp_solve(inst);
    const SolverReport wm = wmmse_solve(inst);
    gp_gap[i] = std::abs(opt - gp.final_rate());
    wm_gap[i] = std::abs(opt - wm.final_rate());
    excess[2 * i] = power_excess(inst, gp.V);
    excess[2 * i + 1] = power_excess(inst, wm.V);
  });
  const double single_time = seconds_since(t0);

  const auto t1 = Clock::now();
  parallel_for(R, o.jobs, [&](std::size_t i) {
    const ProblemInstance inst = sample_instance(o.M, o.K, o.N, derive_seed(o.seed, {51, i}));
    const SolverReport wm = wmmse_solve(inst);
    for (std::size_t j = 1; j < wm.objective_trace.size(); ++j)
      drop[i] = std::max(drop[i], wm.objective_trace[j - 1] - wm.objective_trace[j]);
    excess[2 * S + i] = power_excess(inst, wm.V);
    unconverged[i] = !wm.converged;
  });

  auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  std::vector<PropertyResult> out;
  out.push_back(bounded("gp_single_user_optimum", max_of(gp_gap), o.single_user_tol,
                        format("max |rate - closed form| over %.0f instances: %.3e bits", S, max_of(gp_gap)), t0));
  out.push_back(bounded("wmmse_single_user_optimum", max_of(wm_gap), o.single_user_tol,
                        format("max |rate - closed form| over %.0f instances: %.3e bits", S, max_of(wm_gap)), t0));
  out[0].seconds = out[1].seconds = single_time;
  int flagged = 0;
  for (int u : unconverged) flagged += u;
  std::ostringstream detail;
  detail << "largest trace decrease over " << R << " instances: " << max_of(drop) << " (" << flagged
         << " hit the iteration or multiplier limit)";
  out.push_back(bounded("wmmse_monotone", max_of(drop), o.monotone_slack, detail.str(), t1));
  out.push_back(bounded("solver_power_feasibility", max_of(excess), o.power_slack,
                        format("largest power excess over budget: %.3e W", max_of(excess)), t0));
  return out;
}

std::vector<PropertyResult> check_scale_invariance(int trials, std::uint64_t seed) {
  const auto t0 = Clock::now();
  double sinr_gap = 0.0, normalized_gap = 0.0, perm_gap = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t s = derive_seed(seed, {60, std::uint64_t(t)});
    std::mt19937_64 rng(derive_seed(s, {0}));
    const int M = 1 + static_cast<int>(rng() % 5), K = 1 + static_cast<int>(rng() % 5), N = 1 + static_cast<int>(rng() % 3);
    const Scenario scen = sample_scenario(M, K, N, derive_seed(s, {1}));
    const ProblemInstance raw = realize_channels_raw(scen, derive_seed(s, {2}));
    const Beamformer V = random_beamformer(raw, rng);

    const double c = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
    ProblemInstance scaled = raw;
    for (auto& h : scaled.channels) h *= c;
    for (auto& n : scaled.noise_power) n *= c * c;
    const std::vector<double> a = sinr_per_ue(raw, V), b = sinr_per_ue(scaled, V);
    for (int k = 0; k < K; ++k) sinr_gap = std::max(sinr_gap, relative_gap(a[k], b[k]));

    const double rate = sum_rate(raw, V);
    normalized_gap = std::max(normalized_gap, relative_gap(rate, sum_rate(normalize_instance(raw), V)));

    const PermutationPair perm = PermutationPair::random(M, K, derive_seed(s, {3}));
    perm_gap = std::max(perm_gap, relative_gap(rate, sum_rate(apply_permutation(raw, perm), apply_permutation(V, perm))));
  }
  std::vector<PropertyResult> out;
  out.push_back(bounded("sinr_scale_invariance", sinr_gap, 1e-9,
                        format("max relative SINR change under joint rescaling: %.3e", sinr_gap), t0));
  out.push_back(bounded("normalization_preserves_rate", normalized_gap, 1e-9,
                        format("max relative sum-rate change raw vs normalized: %.3e", normalized_gap), t0));
  out.push_back(bounded("permutation_preserves_rate", perm_gap, 1e-9,
                        format("max relative sum-rate change under relabeling: %.3e", perm_gap), t0));
  return out;
}

PropertyReport run_verify(const ModelParams<float>& params, const VerifyOptions& o) {
  PropertyReport report;
  report.results.push_back(check_equivariance_f32(params, o.equivariance));
  report.results.push_back(check_equivariance_f64(cast_params<double>(params), o.equivariance));
  report.results.push_back(check_layer_equivariance(params, o.equivariance));
  report.results.push_back(check_feasibility(params, o.equivariance));
  if (o.include_gradient) report.results.push_back(check_gradient(o.gradient));
  if (o.include_solvers)
    for (auto& r : check_solvers(o.solvers)) report.results.push_back(std::move(r));
  for (auto& r : check_scale_invariance(o.scale_trials, o.equivariance.seed)) report.results.push_back(std::move(r));
  return report;
}

}  // namespace edgegnn
