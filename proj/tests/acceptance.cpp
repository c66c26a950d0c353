// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgegnn/experiments/commands.hpp"
#include "edgegnn/experiments/properties.hpp"
#include "edgegnn/gnn/checkpoint.hpp"
#include "edgegnn/scenario/instance_io.hpp"
#include "edgegnn/trainer/evaluate.hpp"
#include "edgegnn/util/seeds.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace edgegnn;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s %s %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean_rate(const SolverRun& run) {
  double s = 0;
  for (const auto& r : run.reports) s += r.final_rate();
  return s / static_cast<double>(run.reports.size());
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void equivariance() {
  const auto t0 = Clock::now();
  const ModelParams<float> params = init_params<float>(ModelConfig{}, derive_seed(0, {0}));
  EquivarianceOptions o;
  o.trials = 100;
  const PropertyResult f32 = check_equivariance_f32(params, o);
  const PropertyResult f64 = check_equivariance_f64(cast_params<double>(params), o);
  const double t = seconds_since(t0);
  report("C1", f32.passed && f64.passed && t < 30.0,
         "equivariance over 100 trials at (4,3,2): 32-bit max rel err " + fmt("%.2e", f32.value) + " (<= 1e-5), 64-bit " +
             fmt("%.2e", f64.value) + " (<= 1e-10), " + fmt("%.1f", t) + " s (< 30 s)");
}

void layer_equivariance() {
  const auto t0 = Clock::now();
  const ModelParams<float> params = init_params<float>(ModelConfig{}, derive_seed(0, {0}));
  EquivarianceOptions o;
  o.trials = 100;
  const PropertyResult r = check_layer_equivariance(params, o);
  const double t = seconds_since(t0);
  report("C2", r.passed && t < 10.0,
         "per-layer BS/UE/edge updates on 100 random states: " + fmt("%.0f", r.value) + " mismatching elements (== 0), " +
             fmt("%.1f", t) + " s (< 10 s)");
}

void gradient() {
  const auto t0 = Clock::now();
  const PropertyResult r = check_gradient(GradientCheckOptions{});
  const double t = seconds_since(t0);
  report("C3", r.passed && t < 120.0,
         "gradient vs central differences (d=8, M=K=N=2, 64-bit): " + fmt("%.2f%%", 100.0 * (1.0 - r.value)) +
             " of coordinates within 1e-3 (>= 95%); " + r.detail + "; " + fmt("%.1f", t) + " s (< 120 s)");
}

void baselines() {
  const auto t0 = Clock::now();
  SolverCheckOptions o;
  o.single_user_instances = 50;
  o.monotone_instances = 100;
  const std::vector<PropertyResult> rs = check_solvers(o);
  bool pass = true;
  std::string detail;
  for (const auto& r : rs) {
    pass = pass && r.passed;
    detail += r.name + " " + fmt("%.2e", r.value) + " (<= " + fmt("%.0e", r.threshold) + "); ";
  }
  report("C4", pass, detail + fmt("%.1f", seconds_since(t0)) + " s");
}

struct TrainedModel {
  std::string checkpoint;
  std::vector<EpochRecord> log;
  double seconds = 0;
};

TrainedModel train_desk_model(const fs::path& dir) {
  TrainedModel out;
  out.checkpoint = (dir / "desk.json").string();
  const auto t0 = Clock::now();
  run_command("train", json::object(), {{"out", out.checkpoint}, {"seed", 0}});
  out.seconds = seconds_since(t0);
  for (const auto& line : lines_of(read_text_file(sibling_path(out.checkpoint, ".log.jsonl")))) {
    const json j = json::parse(line);
    EpochRecord r;
    r.epoch = j["epoch"];
    r.mean_sum_rate = j["mean_sum_rate"];
    out.log.push_back(r);
  }
  return out;
}

// GNN mean over WMMSE(100 iterations) mean on 100 fresh instances of size (M, K, 2).
struct RatioResult {
  double gnn = 0, wmmse = 0, ratio = 0;
  int violations = 0;
};

RatioResult rate_ratio(const InferenceModel<float>& model, int M, int K) {
  const std::vector<ProblemInstance> test = test_instances(M, K, 2, 100, 0);
  EvaluateOptions eo;
  eo.timing_repeats = 0;
  const EvaluationReport e = evaluate(model, test, eo);
  SolverRunOptions so;
  so.max_iters = 100;
  RatioResult r;
  r.gnn = e.mean_rate;
  r.wmmse = mean_rate(run_solver("wmmse", test, so));
  r.ratio = r.gnn / r.wmmse;
  r.violations = e.feasibility_violations;
  return r;
}

void training_proxies(const fs::path& dir) {
  const TrainedModel tm = train_desk_model(dir);
  const Checkpoint ck = load_checkpoint(tm.checkpoint);
  const InferenceModel<float> model(ck.params);

  double best = 0;
  for (const auto& r : tm.log) best = std::max(best, r.mean_sum_rate);
  const double first = tm.log.empty() ? 0.0 : tm.log.front().mean_sum_rate;
  const RatioResult base = rate_ratio(model, 3, 2);
  report("C5", base.ratio >= 0.85 && base.violations == 0 && tm.seconds < 1800.0,
         "trained at (3,2,2) for " + std::to_string(tm.log.size()) + " epochs in " + fmt("%.0f", tm.seconds) +
             " s (< 1800 s); test mean rate Edge-GNN " + fmt("%.4f", base.gnn) + " vs WMMSE " + fmt("%.4f", base.wmmse) +
             ", ratio " + fmt("%.3f", base.ratio) + " (>= 0.85); training mean rate epoch 1 " + fmt("%.3f", first) +
             " -> best " + fmt("%.3f", best) + " (+" + fmt("%.0f", 100.0 * (best / first - 1.0)) + "%)");

  bool ok = true;
  std::string detail;
  for (auto [M, K] : {std::pair{3, 4}, std::pair{5, 2}}) {
    try {
      const RatioResult r = rate_ratio(model, M, K);
      ok = ok && r.ratio >= 0.75 && r.violations == 0;
      detail += "(M,K)=(" + std::to_string(M) + "," + std::to_string(K) + ") ratio " + fmt("%.3f", r.ratio) + " [" +
                fmt("%.3f", r.gnn) + " vs " + fmt("%.3f", r.wmmse) + "]; ";
    } catch (const std::exception& e) {
      ok = false;
      detail += "(M,K)=(" + std::to_string(M) + "," + std::to_string(K) + ") error: " + e.what() + "; ";
    }
  }
  report("C6", ok, detail + "threshold 0.75, no retraining");

  // Timing: single-threaded medians over per-instance medians of 5 runs.
  const std::vector<ProblemInstance> test = test_instances(3, 2, 2, 100, 0);
  EvaluateOptions eo;
  eo.timing_repeats = 5;
  const EvaluationReport e = evaluate(model, test, eo);
  SolverRunOptions so;
  so.max_iters = 100;
  so.tol = 0.0;  // run all 100 iterations
  so.timing_repeats = 5;
  const double wmmse_median = median(run_solver("wmmse", test, so).times);
  const double speedup = wmmse_median / e.median_time_s;
  report("C7", speedup >= 10.0,
         "median per-instance time at (3,2): Edge-GNN " + fmt("%.3f", e.median_time_s * 1e3) + " ms, WMMSE(100) " +
             fmt("%.3f", wmmse_median * 1e3) + " ms, speedup " + fmt("%.1f", speedup) + "x (>= 10x)");
}

// Epoch records without their wall-clock field.
std::string log_without_timing(const std::string& path) {
  std::string out;
  for (const auto& line : lines_of(read_text_file(path))) {
    json j = json::parse(line);
    j.erase("wall_time");
    out += j.dump() + "\n";
  }
  return out;
}

// CSV rows without the trailing timing column.
std::string csv_without_timing(const std::string& path) {
  std::string out;
  for (const auto& line : lines_of(read_text_file(path))) {
    if (line.rfind("#", 0) == 0) {
      out += line + "\n";
      continue;
    }
    out += line.substr(0, line.rfind(',')) + "\n";
  }
  return out;
}

void determinism(const fs::path& dir) {
  const std::string ck = (dir / "det.json").string();
  const std::string csv = (dir / "det.csv").string();
  const json train_flags = {{"out", ck}, {"d", 16}, {"epochs", 3}, {"minibatches", 3}, {"batch_size", 8}, {"seed", 11}};
  const json sweep_flags = {{"checkpoint", ck},     {"out", csv},   {"sweep_k", {2, 3}}, {"sweep_m", {3, 4}},
                            {"count", 5},           {"seed", 11},   {"baselines", {"wmmse", "gp"}},
                            {"timing_repeats", 1}};
  struct Snapshot {
    std::string manifest, blob, log, sweep;
  };
  auto once = [&] {
    run_command("train", json::object(), train_flags);
    run_command("sweep", json::object(), sweep_flags);
    return Snapshot{read_text_file(ck), read_text_file(checkpoint_blob_path(ck)),
                    log_without_timing(sibling_path(ck, ".log.jsonl")), csv_without_timing(csv)};
  };
  const Snapshot a = once();
  const Snapshot b = once();
  const bool same_ckpt = a.manifest == b.manifest && a.blob == b.blob;
  const bool same_log = a.log == b.log;
  const bool same_sweep = a.sweep == b.sweep;
  report("C8", same_ckpt && same_log && same_sweep,
         std::string("two identical runs: checkpoint manifest+blob ") + (same_ckpt ? "identical" : "DIFFER") +
             ", epoch log " + (same_log ? "identical" : "DIFFERS") + ", sweep CSV " +
             (same_sweep ? "identical" : "DIFFERS") + " (wall-clock fields excluded)");
}

void scale_invariance() {
  const std::vector<PropertyResult> rs = check_scale_invariance(100, 0);
  bool pass = true;
  std::string detail;
  for (const auto& r : rs) {
    pass = pass && r.passed;
    detail += r.name + " " + fmt("%.2e", r.value) + " (<= " + fmt("%.0e", r.threshold) + "); ";
  }
  report("C9", pass, detail + "100 trials");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "edgegnn_acceptance";
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  try {
    equivariance();
    layer_equivariance();
    gradient();
    baselines();
    training_proxies(dir);
    determinism(dir);
    scale_invariance();
  } catch (const std::exception& e) {
    std::printf("ERROR %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed, %.0f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
