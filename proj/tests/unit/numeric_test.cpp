#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "smarttodo/numeric/checkpoint.hpp"
#include "smarttodo/numeric/gradcheck.hpp"
#include "smarttodo/numeric/layers.hpp"
#include "smarttodo/numeric/optim.hpp"
#include "smarttodo/numeric/tape.hpp"

using namespace smarttodo::numeric;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Tensor t(r, c);
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Projects an output onto a fixed random direction so the loss is not
// invariant to the op (e.g. sum(softmax(x)) is constant).
Var project(Tape& tape, Var out, std::uint64_t seed) {
  Rng rng(seed);
  const Tensor& v = tape.value(out);
  return tape.sum(tape.mul(out, tape.constant(random_tensor(rng, v.rows(), v.cols()))));
}

}  // namespace

TEST(Tape, SoftmaxOfZerosIsUniform) {
  Tape tape(false);
  Var s = tape.softmax(tape.constant(Tensor::column({0.0, 0.0})));
  EXPECT_DOUBLE_EQ(tape.value(s)[0], 0.5);
  EXPECT_DOUBLE_EQ(tape.value(s)[1], 0.5);
}

TEST(Tape, IdentityMatmul) {
  Rng rng(3);
  Tape tape(false);
  Tensor x = random_tensor(rng, 3, 4);
  Var y = tape.matmul(tape.constant(Tensor::identity(3)), tape.constant(x));
  EXPECT_EQ(tape.value(y), x);
}

TEST(Tape, CrossEntropyOfUniformIsLogFour) {
  Tape tape(false);
  Var probs = tape.softmax(tape.constant(Tensor::column({0, 0, 0, 0})));
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_NEAR(tape.value(tape.nll(probs, t))[0], std::log(4.0), 1e-11);
    EXPECT_NEAR(tape.value(tape.cross_entropy(tape.constant(Tensor::column({0, 0, 0, 0})), t))[0],
                1.386294, 1e-6);
  }
}

TEST(Tape, SoftmaxRowsAndColumnsAreDistributions) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape(false);
    Tensor x = random_tensor(rng, 3, 5, 50.0);
    for (int axis : {0, 1}) {
      const Tensor& y = tape.value(tape.softmax(tape.constant(x), axis));
      const std::size_t outer = axis == 0 ? y.cols() : y.rows();
      for (std::size_t o = 0; o < outer; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < (axis == 0 ? y.rows() : y.cols()); ++i) {
          const double v = axis == 0 ? y(i, o) : y(o, i);
          EXPECT_GE(v, 0.0);
          s += v;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
}

TEST(Tape, BackwardOfSumIsOnes) {
  Tape tape;
  Var x = tape.variable(Tensor::column({0.3, -1.0, 2.0}));
  tape.backward(tape.sum(x));
  const Tensor g = tape.grad(x);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Tape, BackwardOfTanhAtZeroIsOnes) {
  Tape tape;
  Var x = tape.variable(Tensor::column({0.0, 0.0, 0.0}));
  tape.backward(tape.sum(tape.tanh(x)));
  const Tensor g = tape.grad(x);
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Tape, ErrorsAreReported) {
  Tape tape;
  Var a = tape.variable(Tensor(2, 3));
  Var b = tape.variable(Tensor(2, 3));
  EXPECT_THROW(tape.matmul(a, b), smarttodo::NumericError);
  EXPECT_THROW(tape.backward(a), smarttodo::NumericError);  // not scalar
  Var c = tape.sum(tape.constant(Tensor(2, 2, 1.0)));
  EXPECT_THROW(tape.backward(c), smarttodo::NumericError);  // detached
  EXPECT_THROW(tape.softmax(a, 2), smarttodo::NumericError);
  Rng rng(1);
  EXPECT_THROW(tape.dropout(a, 1.0, true, rng), smarttodo::NumericError);
  Var huge = tape.constant(Tensor::column({800.0}));
  EXPECT_THROW(tape.scale(huge, 1e306), smarttodo::NumericError);
}

TEST(Tape, BackwardConsumesTape) {
  Tape tape;
  Var x = tape.variable(Tensor::column({1.0}));
  Var l = tape.sum(x);
  tape.backward(l);
  EXPECT_THROW(tape.backward(l), smarttodo::NumericError);
}

TEST(Tape, DropoutEvalIsIdentityAndTrainIsInverted) {
  Rng rng(5);
  Tape tape;
  Var x = tape.variable(Tensor(1000, 1, 1.0));
  Var eval = tape.dropout(x, 0.5, false, rng);
  EXPECT_EQ(eval.id, x.id);
  EXPECT_FALSE(tape.stochastic());
  Var train = tape.dropout(x, 0.5, true, rng);
  EXPECT_TRUE(tape.stochastic());
  for (double v : tape.value(train).values()) EXPECT_TRUE(v == 0.0 || v == 2.0);
  EXPECT_NEAR(tape.value(train).sum() / 1000.0, 1.0, 0.15);
}

class PrimitiveGradients : public ::testing::Test {
 protected:
  void check(const std::function<Var(Tape&, Var, Var)>& op, std::size_t ar, std::size_t ac,
             std::size_t br, std::size_t bc, double tol = 1e-4) {
    ParameterSet ps;
    Parameter& a = ps.add("a", ar, ac);
    Parameter& b = ps.add("b", br, bc);
    Rng rng(17);
    ps.init_uniform(rng, -1.0, 1.0);
    auto ptrs = ps.pointers();
    auto res = finite_diff_check(
        [&](Tape& t) { return project(t, op(t, t.param(a), t.param(b)), 99); }, ptrs);
    EXPECT_LT(res.max_relative_error, tol) << res.worst_param;
    EXPECT_GT(res.coords_checked, 0u);
  }
};

TEST_F(PrimitiveGradients, MatMul) {
  check([](Tape& t, Var a, Var b) { return t.matmul(a, b); }, 3, 4, 4, 2);
}
TEST_F(PrimitiveGradients, MatMulTN) {
  check([](Tape& t, Var a, Var b) { return t.matmul_tn(a, b); }, 4, 3, 4, 2);
}
TEST_F(PrimitiveGradients, AddMulAndAddCol) {
  check([](Tape& t, Var a, Var b) { return t.add(a, b); }, 3, 2, 3, 2);
  check([](Tape& t, Var a, Var b) { return t.mul(a, b); }, 3, 2, 3, 2);
  check([](Tape& t, Var a, Var b) { return t.add_col(a, b); }, 3, 4, 3, 1);
}
TEST_F(PrimitiveGradients, ScaleAndOneMinus) {
  check([](Tape& t, Var a, Var b) { return t.scale_var(t.one_minus(a), t.scale(b, 0.7)); }, 3, 2,
        1, 1);
}
TEST_F(PrimitiveGradients, Concat) {
  check([](Tape& t, Var a, Var b) { return t.concat_rows({a, b, a}); }, 2, 3, 1, 3);
  check([](Tape& t, Var a, Var b) { return t.concat_cols(std::vector<Var>{a, b}); }, 3, 2, 3, 1);
}
TEST_F(PrimitiveGradients, SliceAndNonlinearities) {
  check([](Tape& t, Var a, Var b) { return t.mul(t.tanh(t.slice_rows(a, 1, 2)), t.sigmoid(b)); },
        4, 3, 2, 3);
}
TEST_F(PrimitiveGradients, SoftmaxBothAxes) {
  check([](Tape& t, Var a, Var b) { return t.add(t.softmax(a, 0), t.softmax(b, 1)); }, 3, 4, 3,
        4);
}
TEST_F(PrimitiveGradients, EmbeddingLookup) {
  check([](Tape& t, Var a, Var b) { return t.mul(t.embedding(a, 2), b); }, 5, 3, 3, 1);
}
TEST_F(PrimitiveGradients, LossesAndScatter) {
  check([](Tape& t, Var a, Var) { return t.cross_entropy(a, 1); }, 5, 1, 1, 1);
  check([](Tape& t, Var a, Var) { return t.nll(t.softmax(a), 3); }, 5, 1, 1, 1);
  check([](Tape& t, Var, Var b) { return t.bce_with_logits(b, 1.0); }, 1, 1, 1, 1);
  check([](Tape& t, Var, Var b) { return t.bce_with_logits(b, 0.0); }, 1, 1, 1, 1);
  const std::vector<std::size_t> idx{0, 3, 3, 1};
  check([&](Tape& t, Var a, Var b) { return t.add(t.scatter_add(a, idx, 5), t.pad_rows(b, 5)); },
        4, 1, 2, 1);
}

TEST(GradCheck, LinearModelIsExact) {
  ParameterSet ps;
  Linear lin = Linear::create(ps, "lin", 4, 3);
  Rng rng(2);
  ps.init_uniform(rng, -0.5, 0.5);
  Tensor x = random_tensor(rng, 4, 1);
  auto ptrs = ps.pointers();
  auto res = finite_diff_check([&](Tape& t) { return project(t, lin(t, t.constant(x)), 4); }, ptrs);
  EXPECT_LT(res.max_relative_error, 1e-8);
}

TEST(GradCheck, TwoLayerNet) {
  ParameterSet ps;
  Linear l1 = Linear::create(ps, "l1", 5, 7);
  Linear l2 = Linear::create(ps, "l2", 7, 4);
  Rng rng(8);
  ps.init_uniform(rng, -0.8, 0.8);
  Tensor x = random_tensor(rng, 5, 1);
  auto ptrs = ps.pointers();
  auto res = finite_diff_check(
      [&](Tape& t) { return t.cross_entropy(l2(t, t.tanh(l1(t, t.constant(x)))), 2); }, ptrs);
  EXPECT_LT(res.max_relative_error, 1e-4);
}

TEST(GradCheck, LstmCell32Hidden) {
  ParameterSet ps;
  LstmCell cell = LstmCell::create(ps, "lstm", 6, 32);
  Rng rng(21);
  ps.init_uniform(rng, -0.1, 0.1);
  std::vector<Tensor> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(random_tensor(rng, 6, 1));
  auto ptrs = ps.pointers();
  auto res = finite_diff_check(
      [&](Tape& t) {
        auto s = cell.zero_state(t);
        for (const auto& x : xs) s = cell.step(t, t.constant(x), s);
        return project(t, s.h, 5);
      },
      ptrs);
  EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_param;
}

TEST(GradCheck, AttentionBlock) {
  ParameterSet ps;
  AdditiveAttention attn = AdditiveAttention::create(ps, "attn", 5, 4, 6);
  Parameter& states = ps.add("states", 5, 7);
  Parameter& query = ps.add("query", 4, 1);
  Rng rng(31);
  ps.init_uniform(rng, -1.0, 1.0);
  auto ptrs = ps.pointers();
  auto res = finite_diff_check(
      [&](Tape& t) {
        Var h = t.param(states);
        auto r = attn.attend(t, h, attn.keys(t, h), t.param(query));
        return t.add(project(t, r.context, 3), project(t, r.weights, 4));
      },
      ptrs);
  EXPECT_LT(res.max_relative_error, 1e-4) << res.worst_param;
}

TEST(GradCheck, RejectsActiveDropout) {
  ParameterSet ps;
  Parameter& w = ps.add("w", 3, 1);
  Rng rng(1);
  auto ptrs = ps.pointers();
  EXPECT_THROW(finite_diff_check(
                   [&](Tape& t) { return t.sum(t.dropout(t.param(w), 0.5, true, rng)); }, ptrs),
               smarttodo::NumericError);
}

TEST(Attention, DegenerateCases) {
  ParameterSet ps;
  AdditiveAttention attn = AdditiveAttention::create(ps, "attn", 3, 3, 4);
  Rng rng(4);
  ps.init_uniform(rng, -1, 1);
  Tape tape(false);
  Tensor h1 = random_tensor(rng, 3, 1);
  Var one = tape.constant(h1);
  auto r1 = attn.attend(tape, one, attn.keys(tape, one), tape.constant(random_tensor(rng, 3, 1)));
  EXPECT_DOUBLE_EQ(tape.value(r1.weights)[0], 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(tape.value(r1.context)[i], h1[i], 1e-15);

  attn.w_h->value.fill(0.0);
  attn.w_s->value.fill(0.0);
  attn.b->value.fill(0.0);
  Var many = tape.constant(random_tensor(rng, 3, 5));
  auto r2 = attn.attend(tape, many, attn.keys(tape, many), tape.constant(random_tensor(rng, 3, 1)));
  for (double a : tape.value(r2.weights).values()) EXPECT_NEAR(a, 0.2, 1e-15);
}

TEST(ClipGradNorm, Examples) {
  ParameterSet ps;
  Parameter& p = ps.add("p", 2, 1);
  auto ptrs = ps.pointers();
  p.grad = Tensor::column({0.6, 0.8});
  EXPECT_DOUBLE_EQ(clip_grad_norm(ptrs, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(p.grad[0], 0.6);
  p.grad = Tensor::column({2.4, 3.2});
  EXPECT_NEAR(clip_grad_norm(ptrs, 2.0), 0.5, 1e-15);
  EXPECT_NEAR(grad_norm(ptrs), 2.0, 1e-9);
  p.grad = Tensor::column({0.0, 0.0});
  EXPECT_DOUBLE_EQ(clip_grad_norm(ptrs, 2.0), 1.0);
}

TEST(Adagrad, HandComputedStep) {
  ParameterSet ps;
  Parameter& p = ps.add("p", 1, 1);
  p.value[0] = 1.0;
  auto ptrs = ps.pointers();
  Adagrad opt(ptrs);
  p.grad[0] = 1.0;
  opt.step();
  EXPECT_NEAR(opt.accumulators()[0][0], 1.1, 1e-15);
  // 1 - 0.15 / sqrt(1.1)
  EXPECT_NEAR(p.value[0], 0.8569806116, 1e-9);
  EXPECT_DOUBLE_EQ(p.grad[0], 0.0);
  const double first = 1.0 - p.value[0];
  const double before = p.value[0];
  p.grad[0] = 1.0;
  opt.step();
  EXPECT_LT(before - p.value[0], first);
}

TEST(Adagrad, ZeroGradientIsIdentity) {
  ParameterSet ps;
  ps.add("a", 3, 2);
  ps.add("b", 4, 1);
  Rng rng(9);
  ps.init_uniform(rng, -1, 1);
  auto before = ps.snapshot();
  auto ptrs = ps.pointers();
  Adagrad opt(ptrs);
  opt.step();
  auto after = ps.snapshot();
  EXPECT_EQ(before, after);
  for (const auto& acc : opt.accumulators()) {
    for (double v : acc.values()) EXPECT_GE(v, 0.1);
  }
}

TEST(Adagrad, TrainingTrajectoryIsDeterministic) {
  auto run = [] {
    ParameterSet ps;
    Linear l = Linear::create(ps, "l", 3, 3);
    Rng rng(42);
    ps.init_uniform(rng, -0.1, 0.1);
    auto ptrs = ps.pointers();
    Adagrad opt(ptrs);
    for (int step = 0; step < 20; ++step) {
      Tape t;
      Var x = t.dropout(t.constant(Tensor::column({1.0, 2.0, 3.0})), 0.3, true, rng);
      t.backward(t.cross_entropy(l(t, x), step % 3));
      clip_grad_norm(ptrs, 2.0);
      opt.step();
    }
    return ps.snapshot();
  };
  EXPECT_EQ(run(), run());
}

TEST(Checkpoint, ExactRoundTrip) {
  ParameterSet ps;
  ps.add("emb", 4, 3);
  ps.add("bias", 3, 1);
  Rng rng(123);
  ps.init_uniform(rng, -1, 1);
  ps[0].value[5] = 1.0 / 3.0;
  std::stringstream buf;
  write_checkpoint(buf, to_checkpoint(ps, {{"init", "uniform(-0.1,0.1)"}}));
  Checkpoint back = read_checkpoint(buf);
  EXPECT_EQ(back.header.at("init"), "uniform(-0.1,0.1)");
  ParameterSet ps2;
  ps2.add("emb", 4, 3);
  ps2.add("bias", 3, 1);
  load_into(ps2, back);
  EXPECT_EQ(ps.snapshot(), ps2.snapshot());

  ParameterSet wrong;
  wrong.add("emb", 3, 3);
  EXPECT_THROW(load_into(wrong, back), smarttodo::NumericError);
  std::stringstream junk("not a checkpoint");
  EXPECT_THROW(read_checkpoint(junk), smarttodo::NumericError);
}
