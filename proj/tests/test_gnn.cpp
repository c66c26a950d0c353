// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "edgegnn/errors.hpp"
#include "edgegnn/experiments/properties.hpp"
#include "edgegnn/gnn/checkpoint.hpp"
#include "edgegnn/gnn/model.hpp"
#include "edgegnn/gnn/permutation.hpp"
#include "edgegnn/gnn/topology.hpp"
#include "edgegnn/scenario/scenario.hpp"
#include "test_util.hpp"

namespace edgegnn {
namespace {

using ad::Shape;
using ad::Tensor;

ModelConfig small_config(int d = 16, int L = 2, int N = 2) {
  ModelConfig cfg;
  cfg.d = d;
  cfg.L = L;
  cfg.N = N;
  return cfg;
}

// Trainable scalars of one MLP, counted from its layer widths.
std::size_t mlp_size(std::size_t in, std::size_t width, std::size_t out, int depth) {
  std::size_t total = 0, fan_in = in;
  for (int i = 0; i < depth; ++i) {
    const std::size_t fan_out = i + 1 == depth ? out : width;
    total += fan_in * fan_out + fan_out;
    fan_in = fan_out;
  }
  return total;
}

Tensor<float> random_state(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<float> g;
  Tensor<float> t(Shape{rows, cols});
  for (auto& x : t.data()) x = g(rng);
  return t;
}

// Node values live in the tape's node vector, which later ops may reallocate.
template <class T>
Tensor<T> copy(ad::Var<T> v) {
  return v.value();
}

TEST(Params, CountMatchesArchitecture) {
  const ModelConfig cfg;  // L=2, d=64, N=2, three linear layers per MLP
  const std::size_t d = 64;
  const std::size_t want = 2 * mlp_size(1, d, d, 3) + mlp_size(4, d, d, 3) + 2 * 7 * mlp_size(2 * d, d, d, 3) +
                           mlp_size(d, d, 4, 3);
  EXPECT_EQ(want, 266180u);
  EXPECT_EQ(parameter_count(init_params<float>(cfg, 0)), want);
}

TEST(Params, SameSeedSameParameters) {
  auto a = init_params<float>(small_config(), 3);
  auto b = init_params<float>(small_config(), 3);
  EXPECT_EQ(flatten(a), flatten(b));
  EXPECT_EQ(params_fingerprint(a), params_fingerprint(b));
  EXPECT_NE(params_fingerprint(a), params_fingerprint(init_params<float>(small_config(), 4)));
}

TEST(Params, WeightsWithinInitBound) {
  auto p = init_params<float>(ModelConfig{}, 1);
  for_each_param(p, [](const std::string& name, const Tensor<float>& t) {
    if (t.rank() == 2) {
      const double bound = std::sqrt(6.0 / static_cast<double>(t.shape()[0] + t.shape()[1]));
      for (float x : t.data()) ASSERT_LE(std::abs(x), bound) << name;
    } else {
      for (float x : t.data()) ASSERT_EQ(x, 0.0f) << name;
    }
  });
}

TEST(Params, FlattenRoundTrip) {
  auto p = init_params<double>(small_config(8), 2);
  auto flat = flatten(p);
  auto q = zero_params<double>(small_config(8));
  unflatten<double>(flat, q);
  EXPECT_EQ(flatten(q), flat);
}

TEST(Params, InvalidConfigRejected) {
  ModelConfig cfg;
  cfg.L = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.aggregator = "mean";
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Model, SameParametersServeAnySize) {
  auto p = init_params<float>(ModelConfig{}, 0);
  const std::size_t count = parameter_count(p);
  for (auto [M, K] : {std::pair{3, 2}, std::pair{5, 2}, std::pair{8, 8}}) {
    auto inst = sample_instance(M, K, 2, 10 + M);
    auto V = infer(inst, p);
    EXPECT_EQ(V.M, M);
    EXPECT_EQ(V.K, K);
    EXPECT_EQ(V.N, 2);
    EXPECT_TRUE(is_feasible(V, inst.power_budget));
  }
  EXPECT_EQ(parameter_count(p), count);
}

TEST(Model, WrongAntennaCountRejected) {
  auto p = init_params<float>(small_config(), 0);
  EXPECT_THROW(infer(sample_instance(2, 2, 3, 0), p), DimensionError);
}

TEST(Preprocess, ShapesAndSharedWeights) {
  auto p = init_params<float>(ModelConfig{}, 0);
  auto inst = sample_instance(3, 2, 2, 4);
  ad::Tape<float> tape;
  auto c = place_instance(tape, inst);
  auto s = preprocess(c, bind_params(tape, p));
  EXPECT_EQ(s.bs.shape(), (Shape{3, 64}));
  EXPECT_EQ(s.ue.shape(), (Shape{2, 64}));
  EXPECT_EQ(s.edge.shape(), (Shape{6, 64}));
  // Equal budgets give equal rows.
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_EQ(s.bs.value().at(0, j), s.bs.value().at(1, j));
    EXPECT_EQ(s.bs.value().at(0, j), s.bs.value().at(2, j));
  }
}

TEST(Preprocess, PermutesWithInstance) {
  auto p = init_params<float>(small_config(), 1);
  auto inst = sample_instance(4, 3, 2, 5);
  inst.power_budget = {1.0, 2.0, 3.0, 4.0};
  auto perm = PermutationPair::random(4, 3, 9);
  ad::Tape<float> tape;
  auto bound = bind_params(tape, p);
  auto a = preprocess(place_instance(tape, inst), bound);
  auto b = preprocess(place_instance(tape, apply_permutation(inst, perm)), bound);
  EXPECT_EQ(permute_bs_rows(a.bs.value(), perm), b.bs.value());
  EXPECT_EQ(permute_ue_rows(a.ue.value(), perm), b.ue.value());
  EXPECT_EQ(permute_edge_rows(a.edge.value(), perm), b.edge.value());
}

TEST(Topology, EdgeNeighborsOfFirstEdge) {
  auto g = EdgeGroups::build(Topology::full(2, 3));
  // Edge (0,0) hears edges (0,1), (0,2) through its BS and edge (1,0) through
  // its UE; the latter lives in the second block of stacked rows.
  EXPECT_EQ(g.edge_nbrs[0], (std::vector<std::size_t>{1, 2, 6 + 3}));
  EXPECT_EQ(g.by_bs[1], (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(g.by_ue[2], (std::vector<std::size_t>{2, 5}));
}

TEST(Topology, PartialAndInvalid) {
  auto t = Topology::from_edges(2, 2, {{0, 0}, {1, 1}, {1, 0}});
  EXPECT_FALSE(t.is_full());
  EXPECT_TRUE(t.connected(1, 0));
  EXPECT_FALSE(t.connected(0, 1));
  EXPECT_EQ(t.nbr_ue[0], (std::vector<int>{0, 1}));
  EXPECT_THROW(Topology::from_edges(2, 2, {{2, 0}}), ArgumentError);
  Topology bad = Topology::full(2, 2);
  bad.nbr_bs[0] = {0};
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(Topology, NonEdgesGetZeroBeamformers) {
  auto p = init_params<float>(small_config(), 2);
  auto inst = sample_instance(2, 2, 2, 3);
  auto t = Topology::from_edges(2, 2, {{0, 0}, {1, 1}, {1, 0}});
  auto V = infer(inst, p, {}, &t);
  for (int n = 0; n < 2; ++n) EXPECT_EQ(V.v(0, 1, n), cdouble(0.0));
}

class LayerTest : public ::testing::Test {
 protected:
  ModelParams<float> params = init_params<float>(small_config(8, 1), 5);
  std::mt19937_64 rng{6};
};

TEST_F(LayerTest, SingleUserAggregationIsThatMessage) {
  ad::Tape<float> tape;
  auto b = bind_params(tape, params);
  auto g = EdgeGroups::build(Topology::full(2, 1));
  GraphState<float> s{tape.constant(random_state(2, 8, rng)), tape.constant(random_state(1, 8, rng)),
                      tape.constant(random_state(2, 8, rng))};
  auto got = bs_update(s, g, b, 1);
  std::array<ad::Var<float>, 2> in1{tape.constant(Tensor<float>(Shape{2, 8}, [&] {
                                      std::vector<float> v;
                                      for (int r = 0; r < 2; ++r)
                                        for (float x : s.ue.value().row(0)) v.push_back(x);
                                      return v;
                                    }())),
                                    s.edge};
  auto msg = apply_mlp(b.layers[0].mlp[0], ad::concat<float>(in1));
  std::array<ad::Var<float>, 2> in2{s.bs, msg};
  auto want = apply_mlp(b.layers[0].mlp[1], ad::concat<float>(in2));
  EXPECT_EQ(copy(got), copy(want));
}

TEST_F(LayerTest, NeighborOrderDoesNotMatter) {
  ad::Tape<float> tape;
  auto b = bind_params(tape, params);
  GraphState<float> s{tape.constant(random_state(3, 8, rng)), tape.constant(random_state(4, 8, rng)),
                      tape.constant(random_state(12, 8, rng))};
  Topology fwd = Topology::full(3, 4);
  Topology rev = fwd;
  for (auto& l : rev.nbr_bs) std::reverse(l.begin(), l.end());
  for (auto& l : rev.nbr_ue) std::reverse(l.begin(), l.end());
  auto g1 = EdgeGroups::build(fwd);
  auto g2 = EdgeGroups::build(rev);
  EXPECT_EQ(copy(bs_update(s, g1, b, 1)), copy(bs_update(s, g2, b, 1)));
  EXPECT_EQ(copy(ue_update(s, g1, b, 1)), copy(ue_update(s, g2, b, 1)));
  EXPECT_EQ(copy(edge_update(s, g1, b, 1)), copy(edge_update(s, g2, b, 1)));
}

TEST_F(LayerTest, SingleEdgeSeesEmptyAggregate) {
  ad::Tape<float> tape;
  auto b = bind_params(tape, params);
  auto g = EdgeGroups::build(Topology::full(1, 1));
  GraphState<float> s{tape.constant(random_state(1, 8, rng)), tape.constant(random_state(1, 8, rng)),
                      tape.constant(random_state(1, 8, rng))};
  std::array<ad::Var<float>, 2> in{s.edge, tape.constant(Tensor<float>(Shape{1, 8}))};
  auto want = apply_mlp(b.layers[0].mlp[6], ad::concat<float>(in));
  EXPECT_EQ(copy(edge_update(s, g, b, 1)), copy(want));
}

TEST_F(LayerTest, SingleBsUeUpdateIsMlp4OfItsMessage) {
  ad::Tape<float> tape;
  auto b = bind_params(tape, params);
  auto g = EdgeGroups::build(Topology::full(1, 2));
  GraphState<float> s{tape.constant(random_state(1, 8, rng)), tape.constant(random_state(2, 8, rng)),
                      tape.constant(random_state(2, 8, rng))};
  std::vector<float> bs_rows;
  for (int r = 0; r < 2; ++r)
    for (float x : s.bs.value().row(0)) bs_rows.push_back(x);
  std::array<ad::Var<float>, 2> in1{tape.constant(Tensor<float>(Shape{2, 8}, bs_rows)), s.edge};
  auto msg = apply_mlp(b.layers[0].mlp[2], ad::concat<float>(in1));
  std::array<ad::Var<float>, 2> in2{s.ue, msg};
  auto got = copy(ue_update(s, g, b, 1));
  EXPECT_EQ(got, copy(apply_mlp(b.layers[0].mlp[3], ad::concat<float>(in2))));
}

TEST_F(LayerTest, LayerUpdatesAreExactlyEquivariant) {
  EquivarianceOptions o;
  o.trials = 20;
  auto r = check_layer_equivariance(params, o);
  EXPECT_TRUE(r.passed) << r.detail;
  EXPECT_EQ(r.value, 0.0);
}

TEST(Postprocess, EqualEdgeStatesGiveEqualBeamformers) {
  auto p = init_params<float>(small_config(8, 1), 7);
  ProblemInstance inst(2, 3, 2);
  for (auto& h : inst.channels) h = {0.1, 0.2};
  inst.power_budget = {1e30, 1e30};
  inst.noise_power = {1, 1, 1};
  ad::Tape<float> tape;
  auto b = bind_params(tape, p);
  auto c = place_instance(tape, inst);
  std::mt19937_64 rng(1);
  auto row = random_state(1, 8, rng);
  std::vector<float> rows;
  for (int e = 0; e < 6; ++e) rows.insert(rows.end(), row.data().begin(), row.data().end());
  GraphState<float> s{tape.constant(random_state(2, 8, rng)), tape.constant(random_state(3, 8, rng)),
                      tape.constant(Tensor<float>(Shape{6, 8}, rows))};
  auto V = postprocess(s, c, Topology::full(2, 3), b).value();
  for (std::size_t e = 1; e < 6; ++e)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(V.at(e, j), V.at(0, j));
}

TEST(Forward, ZeroChannelIsFiniteAndFeasible) {
  auto p = init_params<float>(ModelConfig{}, 0);
  ProblemInstance inst(3, 2, 2);
  inst.power_budget.assign(3, 2.0);
  inst.noise_power.assign(2, 1.0);
  auto V = infer(inst, p);
  for (const auto& v : V.weights) EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
  EXPECT_TRUE(is_feasible(V, inst.power_budget));
}

TEST(Forward, OutputAlwaysFeasible) {
  auto p = init_params<float>(ModelConfig{}, 8);
  for (int t = 0; t < 20; ++t) {
    auto inst = sample_instance(3 + t % 3, 2 + t % 4, 2, 100 + t);
    EXPECT_TRUE(is_feasible(infer(inst, p), inst.power_budget, 1e-6));
  }
}

TEST(Forward, CachedTransposesMatchPlainInference) {
  auto p = init_params<float>(ModelConfig{}, 9);
  InferenceModel<float> model(p);
  for (int t = 0; t < 5; ++t) {
    auto inst = sample_instance(4, 3, 2, t);
    EXPECT_EQ(model.infer(inst), infer(inst, p));
  }
}

TEST(Forward, GradientRecordingDoesNotChangeValues) {
  auto p = init_params<double>(small_config(), 2);
  auto inst = sample_instance(3, 2, 2, 1);
  ad::Tape<double> tape;
  auto V = forward(place_instance(tape, inst), Topology::full(3, 2), bind_params(tape, p));
  EXPECT_EQ(beamformer_from_tensor(V.value(), 3, 2, 2), infer(inst, p));
}

TEST(Equivariance, RandomParametersBothPrecisions) {
  auto p = init_params<float>(ModelConfig{}, 11);
  EquivarianceOptions o;
  o.trials = 20;
  auto r32 = check_equivariance_f32(p, o);
  EXPECT_TRUE(r32.passed) << r32.value;
  EXPECT_LE(r32.value, 1e-5);
  auto r64 = check_equivariance_f64(cast_params<double>(p), o);
  EXPECT_TRUE(r64.passed) << r64.value;
  EXPECT_LE(r64.value, 1e-10);
}

TEST(Equivariance, SharedMessageWeightsStillEquivariant) {
  auto p = init_params<float>(small_config(), 12);
  EquivarianceOptions o;
  o.trials = 10;
  o.forward.fault = Fault::TieMlp56;
  EXPECT_TRUE(check_equivariance_f32(p, o).passed);
}

TEST(Equivariance, UeIndexedFaultDetected) {
  auto p = init_params<float>(small_config(), 12);
  EquivarianceOptions o;
  o.trials = 10;
  o.forward.fault = Fault::UeIndexedMlp1;
  EXPECT_FALSE(check_equivariance_f32(p, o).passed);
  EXPECT_FALSE(check_layer_equivariance(p, o).passed);
}

TEST(Equivariance, FaultNamesRoundTrip) {
  for (auto f : {Fault::None, Fault::TieMlp56, Fault::UeIndexedMlp1}) EXPECT_EQ(fault_from_string(to_string(f)), f);
  EXPECT_THROW(fault_from_string("bogus"), ArgumentError);
}

TEST(Permutation, IdentityLeavesObjectsUnchanged) {
  auto inst = sample_instance(3, 4, 2, 1);
  std::mt19937_64 rng(2);
  auto V = testing::random_beamformer(3, 4, 2, rng);
  auto id = PermutationPair::identity(3, 4);
  EXPECT_EQ(apply_permutation(inst, id).channels, inst.channels);
  EXPECT_EQ(apply_permutation(V, id), V);
}

TEST(Permutation, InverseRestoresObjects) {
  auto inst = sample_instance(4, 3, 2, 2);
  inst.power_budget = {1, 2, 3, 4};
  std::mt19937_64 rng(3);
  auto V = testing::random_beamformer(4, 3, 2, rng);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto p = PermutationPair::random(4, 3, s);
    p.validate();
    auto back = apply_permutation(apply_permutation(inst, p), p.inverse());
    EXPECT_EQ(back.channels, inst.channels);
    EXPECT_EQ(back.power_budget, inst.power_budget);
    EXPECT_EQ(apply_permutation(apply_permutation(V, p), p.inverse()), V);
  }
}

TEST(Permutation, SumRateInvariant) {
  std::mt19937_64 rng(4);
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto inst = sample_instance(4, 3, 2, s);
    auto V = testing::random_beamformer(4, 3, 2, rng);
    auto p = PermutationPair::random(4, 3, s + 50);
    EXPECT_LT(testing::rel_diff(sum_rate(inst, V), sum_rate(apply_permutation(inst, p), apply_permutation(V, p))), 1e-9);
  }
}

TEST(Permutation, NonBijectionRejected) {
  PermutationPair p{{0, 0}, {0}};
  EXPECT_THROW(p.validate(), ArgumentError);
}

TEST(Checkpoint, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "edgegnn_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "model.json").string();
  Checkpoint c;
  c.config = small_config(8, 2, 3);
  c.params = init_params<float>(c.config, 4);
  c.extra["opt.x"] = Tensor<float>(Shape{2}, {1.5f, -2.0f});
  c.metadata = {{"epochs_done", 7}};
  save_checkpoint(path, c);
  EXPECT_TRUE(std::filesystem::exists(checkpoint_blob_path(path)));
  EXPECT_EQ(checkpoint_blob_path(path), (dir / "model.bin").string());
  auto back = load_checkpoint(path);
  EXPECT_EQ(back.config, c.config);
  EXPECT_EQ(flatten(back.params), flatten(c.params));
  EXPECT_EQ(back.extra.at("opt.x"), c.extra.at("opt.x"));
  EXPECT_EQ(back.metadata["epochs_done"], 7);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, MissingFileIsIoError) { EXPECT_THROW(load_checkpoint("/nonexistent/ckpt.json"), IoError); }

}  // namespace
}  // namespace edgegnn
