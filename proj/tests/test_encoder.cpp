#include <gtest/gtest.h>

#include "sprl/model/encoder.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace sprl;
using namespace sprl::testing;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double range = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-range, range);
  return t;
}

double max_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void copy_weights(const Encoder& from, const Encoder& to) {
  auto src = from.parameters();
  auto dst = to.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
}

}  // namespace

TEST(LstmCell, ZeroWeightsGiveZeroState) {
  Graph g;
  const std::size_t d = 3;
  auto s = lstm_cell(g.input(Tensor::vector({0.3, -2.0})), g.input(Tensor({d})), g.input(Tensor({d})),
                     g.input(Tensor({2, 4 * d})), g.input(Tensor({d, 4 * d})), g.input(Tensor({4 * d})));
  EXPECT_EQ(s.h.value(), Tensor({d}));
  EXPECT_EQ(s.c.value(), Tensor({d}));
}

TEST(LstmCell, SaturatedGatesKeepCell) {
  const std::size_t d = 2;
  Rng rng(1);
  Tensor b({4 * d});
  for (std::size_t j = 0; j < d; ++j) {
    b[j] = -50.0;
    b[d + j] = 50.0;
  }
  Graph g;
  const Tensor c_prev = Tensor::vector({0.7, -1.3});
  auto s = lstm_cell(g.input(random_tensor({3}, rng)), g.input(random_tensor({d}, rng, 0.01)), g.input(c_prev),
                     g.input(random_tensor({3, 4 * d}, rng, 0.01)), g.input(random_tensor({d, 4 * d}, rng, 0.01)),
                     g.input(b));
  for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(s.c.value()[j], c_prev[j], 1e-9);
}

TEST(LstmCell, MatchesScalarOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t in = 1 + rng.below(5), d = 3;
    const Tensor x = random_tensor({in}, rng), h = random_tensor({d}, rng), c = random_tensor({d}, rng);
    const Tensor wx = random_tensor({in, 4 * d}, rng), wh = random_tensor({d, 4 * d}, rng), b = random_tensor({4 * d}, rng);
    Graph g;
    auto got = lstm_cell(g.input(x), g.input(h), g.input(c), g.input(wx), g.input(wh), g.input(b));
    const RefCell ref = ref_lstm_cell(vec_of(x), vec_of(h), vec_of(c), wx, wh, b);
    EXPECT_LE(max_diff(vec_of(got.h.value()), ref.h), 1e-12);
    EXPECT_LE(max_diff(vec_of(got.c.value()), ref.c), 1e-12);
  }
}

TEST(LstmCell, ShapeMismatch) {
  Graph g;
  EXPECT_THROW(lstm_cell(g.input(Tensor({2})), g.input(Tensor({3})), g.input(Tensor({3})), g.input(Tensor({2, 8})),
                         g.input(Tensor({3, 12})), g.input(Tensor({12}))),
               DimensionError);
}

TEST(Encoder, SingleTokenIsOneStepEachWay) {
  ParamStore store;
  Encoder enc(store, {4, 3});
  Rng rng(2);
  enc.initialize(rng);
  const Tensor x = random_tensor({1, 4}, rng);
  Graph g;
  auto out = enc.encode(g, x);
  ASSERT_EQ(out.length, 1u);
  const Vec zero(3, 0.0);
  const auto& f = enc.forward_weights();
  const auto& b = enc.backward_weights();
  const RefCell fw = ref_lstm_cell(row_of(x, 0), zero, zero, f.wx->value, f.wh->value, f.b->value);
  const RefCell bw = ref_lstm_cell(row_of(x, 0), zero, zero, b.wx->value, b.wh->value, b.b->value);
  Vec expected = fw.h;
  expected.insert(expected.end(), bw.h.begin(), bw.h.end());
  EXPECT_LE(max_diff(row_of(out.states.value(), 0), expected), 1e-12);
}

TEST(Encoder, MatchesCellByCellOracle) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    ParamStore store;
    const std::size_t in = 1 + rng.below(5), n = 4, d = 3;
    Encoder enc(store, {in, d});
    enc.initialize(rng);
    const Tensor x = random_tensor({n, in}, rng);
    Graph g;
    const Tensor states = enc.encode(g, x).states.value();
    const auto& f = enc.forward_weights();
    const auto& b = enc.backward_weights();
    const auto fwd = ref_lstm_run(x, f.wx->value, f.wh->value, f.b->value, false);
    const auto bwd = ref_lstm_run(x, b.wx->value, b.wh->value, b.b->value, true);
    for (std::size_t t = 0; t < n; ++t) {
      Vec expected = fwd[t];
      expected.insert(expected.end(), bwd[t].begin(), bwd[t].end());
      EXPECT_LE(max_diff(row_of(states, t), expected), 1e-12);
    }
  }
}

TEST(Encoder, ReversalSymmetryWithTiedDirections) {
  ParamStore store;
  const std::size_t n = 5, d = 3;
  Encoder enc(store, {4, d});
  Rng rng(6);
  enc.initialize(rng);
  const auto& f = enc.forward_weights();
  const auto& b = enc.backward_weights();
  b.wx->value = f.wx->value;
  b.wh->value = f.wh->value;
  b.b->value = f.b->value;
  const Tensor x = random_tensor({n, 4}, rng);
  Tensor reversed({n, 4});
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t k = 0; k < 4; ++k) reversed.at(t, k) = x.at(n - 1 - t, k);
  Graph g;
  const Tensor s = enc.encode(g, x).states.value();
  const Tensor r = enc.encode(g, reversed).states.value();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < d; ++k) {
      EXPECT_NEAR(r.at(t, k), s.at(n - 1 - t, d + k), 1e-14);
      EXPECT_NEAR(r.at(t, d + k), s.at(n - 1 - t, k), 1e-14);
    }
  }
}

TEST(Encoder, EmptySentenceAndDeterminism) {
  ParamStore store;
  Encoder enc(store, {2, 2});
  EmbeddingTable table(2, 1);
  Graph g;
  EXPECT_THROW(enc.encode(g, std::vector<std::string>{}, table), DomainError);
  Rng rng(1);
  enc.initialize(rng);
  const Tensor a = enc.encode(g, {"a", "b", "c"}, table).states.value();
  const Tensor b = enc.encode(g, {"a", "b", "c"}, table).states.value();
  EXPECT_EQ(a, b);
}

TEST(Encoder, InitializationConvention) {
  ParamStore store;
  const std::size_t d = 16;
  Encoder enc(store, {8, d});
  Rng rng(3);
  enc.initialize(rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  for (auto* p : enc.parameters()) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const bool forget_bias = p->name.ends_with(".b") && i >= d && i < 2 * d;
      if (forget_bias) {
        EXPECT_EQ(p->value[i], 1.0);
      } else {
        EXPECT_LE(std::abs(p->value[i]), s);
      }
    }
  }
}

TEST(PairState, SlicingAndSymmetry) {
  ParamStore store;
  const std::size_t n = 4, d = 2;
  Encoder enc(store, {3, d});
  Rng rng(9);
  enc.initialize(rng);
  Graph g;
  auto s = enc.encode(g, random_tensor({n, 3}, rng));
  const Tensor states = s.states.value();
  const Tensor ea = pair_state(s, 0, n - 1).value();
  Vec expected = row_of(states, 0);
  const Vec last = row_of(states, n - 1);
  expected.insert(expected.end(), last.begin(), last.end());
  EXPECT_EQ(vec_of(ea), expected);
  const Tensor ae = pair_state(s, n - 1, 0).value();
  for (std::size_t k = 0; k < 2 * d; ++k) {
    EXPECT_EQ(ae[k], ea[2 * d + k]);
    EXPECT_EQ(ae[2 * d + k], ea[k]);
  }
  const Tensor same = pair_state(s, 2, 2).value();
  for (std::size_t k = 0; k < 2 * d; ++k) EXPECT_EQ(same[k], same[2 * d + k]);
  try {
    pair_state(s, 1, 4);
    FAIL();
  } catch (const BoundsError& e) {
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("length 4"), std::string::npos);
  }
}

TEST(PairState, GradientOnlyAtHeads) {
  Graph g;
  Var states = g.input(Tensor({5, 4}, std::vector<double>(20, 0.5)), true);
  EncodedSentence s{states, states, states, 5};
  g.backward(sum(square(pair_state(s, 1, 3))));
  const Tensor grad = g.grad(states);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (t == 1 || t == 3) {
        EXPECT_NE(grad.at(t, k), 0.0);
      } else {
        EXPECT_EQ(grad.at(t, k), 0.0);
      }
    }
  }
}

TEST(Encoder, GradientsReachBothDirections) {
  ParamStore store;
  Encoder enc(store, {3, 3});
  Rng rng(12);
  enc.initialize(rng);
  Graph g;
  auto s = enc.encode(g, random_tensor({5, 3}, rng));
  g.backward(sum(row(s.states, 2)));
  for (auto* p : enc.parameters()) EXPECT_GT(p->grad.mat().norm(), 0.0) << p->name;
}

TEST(Encoder, GradCheckThroughPairState) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    ParamStore store;
    const std::size_t n = 1 + rng.below(5);
    Encoder enc(store, {1 + rng.below(4), 1 + rng.below(4)});
    enc.initialize(rng);
    const Tensor x = random_tensor({n, enc.config().input_dim}, rng);
    const std::size_t e = rng.below(n), a = rng.below(n);
    auto loss = [&](Graph& g) { return sum(tanh(pair_state(enc.encode(g, x), e, a))); };
    const auto report = gradcheck(enc.parameters(), loss);
    EXPECT_LE(report.max_rel_error, 1e-4) << report.worst;
  }
}

TEST(Encoder, CopiedWeightsEncodeIdentically) {
  ParamStore a_store, b_store;
  Encoder a(a_store, {3, 2}), b(b_store, {3, 2});
  Rng rng(5);
  a.initialize(rng);
  copy_weights(a, b);
  const Tensor x = random_tensor({3, 3}, rng);
  Graph g;
  EXPECT_EQ(a.encode(g, x).states.value(), b.encode(g, x).states.value());
}
