#include "tet/eval/metrics.hpp"
#include "tet/fusion/fusion_head.hpp"
#include "tet/model/gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace tet {
namespace {

constexpr int kDb = 6, kDLlm = 5, kTopics = 3;

FusionConfig config() {
  FusionConfig c;
  c.d_c = 4;
  c.d_f = 8;
  return c;
}

Mat row(std::initializer_list<double> v) {
  Mat m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

TEST(Interval, NinetyPercentAroundFour) {
  const auto [lo, hi] = interval({4.0, 0.0}, 0.90);
  EXPECT_NEAR(lo, 2.3551, 5e-5);
  EXPECT_NEAR(hi, 5.6449, 5e-5);
  EXPECT_DOUBLE_EQ(hi - 4.0, kZ95);
}

TEST(Interval, CollapsesAsSigmaVanishes) {
  const auto [lo, hi] = interval({3.2, -60.0}, 0.90);
  EXPECT_NEAR(lo, 3.2, 1e-12);
  EXPECT_NEAR(hi, 3.2, 1e-12);
}

TEST(Interval, QuantileMatchesHardCodedValue) {
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536, 1e-7);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_THROW(interval({0.0, 0.0}, 1.0), std::invalid_argument);
}

TEST(Interval, MonteCarloCoverageOfCalibratedResiduals) {
  Rng rng(21);
  const int n = 100000;
  std::vector<GaussianPrediction> preds(n);
  std::vector<double> labels(n);
  for (int i = 0; i < n; ++i) {
    const double mu = 3.0 * uniform01(rng);
    const double lv = 2.0 * uniform01(rng) - 1.0;
    preds[i] = {mu, lv};
    labels[i] = mu + std::exp(0.5 * lv) * standard_normal(rng);
  }
  EXPECT_NEAR(coverage_and_width(preds, labels, 0.90).coverage, 0.90, 0.005);
}

TEST(Nll, HandValues) {
  EXPECT_DOUBLE_EQ(nll_loss({4.0, 0.0}, 5.0), 0.5);
  EXPECT_DOUBLE_EQ(nll_loss({4.0, 0.0}, 4.0), 0.0);
  EXPECT_DOUBLE_EQ(nll_loss({2.0, std::log(3.0)}, 2.0), 0.5 * std::log(3.0));
  TapeD tape;
  VarD l = gaussian_nll(tape.constant(row({4.0})), tape.constant(row({0.0})), 5.0);
  EXPECT_DOUBLE_EQ(l.scalar(), 0.5);
}

TEST(Nll, UnitVarianceIsHalfSquaredError) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double mu = 5.0 * uniform01(rng), y = 1.0 + 4.0 * uniform01(rng);
    EXPECT_DOUBLE_EQ(nll_loss({mu, 0.0}, y), 0.5 * (y - mu) * (y - mu));
  }
}

class Head : public ::testing::Test {
 protected:
  Rng rng{17};
  FusionHead head{config(), kDb, kDLlm, kTopics, rng};
  Mat behavior = row({0.3, -1.0, 0.2, 0.8, -0.4, 1.1});
  Mat text = row({0.1, 0.9, -0.3, 0.2, 0.4});
  RowVec theta = RowVec::Constant(kTopics, 1.0 / kTopics);
};

TEST_F(Head, ZeroParametersGiveUnitVariance) {
  for (ParamD* p : head.parameters()) p->value.setZero();
  TapeD tape;
  auto fused = head.fuse(tape, tape.constant(behavior), tape.constant(text), theta, false, false, rng);
  auto [mu, lv] = head.predict(tape, fused.z, false, rng);
  EXPECT_EQ(mu.scalar(), 0.0);
  EXPECT_EQ(lv.scalar(), 0.0);
}

TEST_F(Head, LogVarianceIsClamped) {
  head.b2.value(0, 1) = 1e3;
  TapeD tape;
  auto fused = head.fuse(tape, tape.constant(behavior), tape.constant(text), theta, false, false, rng);
  EXPECT_EQ(head.predict(tape, fused.z, false, rng).second.scalar(), kLogVarMax);
  head.b2.value(0, 1) = -1e3;
  EXPECT_EQ(head.predict(tape, fused.z, false, rng).second.scalar(), kLogVarMin);
}

TEST_F(Head, MissingTextZeroesBlocksAndSetsBit) {
  for (bool train : {false, true}) {
    TapeD tape;
    auto fused = head.fuse(tape, tape.constant(behavior), tape.constant(text), theta, true, train, rng);
    const Mat& z = fused.z.value();
    ASSERT_EQ(z.cols(), 3 * 4 + 1);
    EXPECT_TRUE(z.block(0, 4, 1, 8).isZero(0.0));
    EXPECT_EQ(z(0, 12), 1.0);
  }
}

TEST_F(Head, PresentTextClearsBit) {
  TapeD tape;
  auto fused = head.fuse(tape, tape.constant(behavior), tape.constant(text), theta, false, false, rng);
  EXPECT_EQ(fused.z.value()(0, 12), 0.0);
  EXPECT_FALSE(fused.z.value().block(0, 4, 1, 8).isZero(0.0));
}

TEST_F(Head, FullTextDropoutIgnoresText) {
  FusionConfig c = config();
  c.p_mod_text = 0.999999;
  Rng init(5);
  FusionHead h(c, kDb, kDLlm, kTopics, init);
  Mat other_text = row({5, 5, 5, 5, 5});
  RowVec other_theta = RowVec::Zero(kTopics);
  other_theta[0] = 1.0;
  Rng r1(8), r2(8);
  TapeD tape;
  auto a = h.fuse(tape, tape.constant(behavior), tape.constant(text), theta, false, true, r1);
  auto b = h.fuse(tape, tape.constant(behavior), tape.constant(other_text), other_theta, false, true, r2);
  EXPECT_TRUE(a.text_dropped);
  EXPECT_EQ(a.z.value(), b.z.value());
}

TEST_F(Head, ModalityDropoutRates) {
  int text_drops = 0, behavior_drops = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    TapeD tape;
    auto f = head.fuse(tape, tape.constant(behavior), tape.constant(text), theta, false, true, rng);
    text_drops += f.text_dropped;
    behavior_drops += f.behavior_dropped;
    if (f.behavior_dropped) {
      ASSERT_TRUE(f.z.value().block(0, 0, 1, 4).isZero(0.0));
    }
  }
  EXPECT_NEAR(static_cast<double>(text_drops) / n, 0.3, 0.015);
  EXPECT_NEAR(static_cast<double>(behavior_drops) / n, 0.1, 0.01);
}

TEST_F(Head, EvalModeIsDeterministic) {
  Rng r1(1), r2(2);
  TapeD t1, t2;
  auto f1 = head.fuse(t1, t1.constant(behavior), t1.constant(text), theta, false, false, r1);
  auto f2 = head.fuse(t2, t2.constant(behavior), t2.constant(text), theta, false, false, r2);
  EXPECT_EQ(head.predict(t1, f1.z, false, r1).first.scalar(), head.predict(t2, f2.z, false, r2).first.scalar());
}

TEST_F(Head, GradientMatchesFiniteDifferences) {
  for (ParamD* p : head.parameters()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.2 * standard_normal(rng);
  }
  const std::uint64_t stream = rng();
  ParamD b("behavior", behavior), t("text", text);
  auto loss = [&](TapeD& tape) {
    Rng r(stream);
    auto fused = head.fuse(tape, tape.param(b), tape.param(t), theta, false, true, r);
    auto [mu, lv] = head.predict(tape, fused.z, true, r);
    return gaussian_nll(mu, lv, 4.0);
  };
  auto params = head.parameters();
  params.push_back(&b);
  params.push_back(&t);
  EXPECT_LT(check_gradients(params, loss, 1e-5, 1e-5).max_rel_error, 1e-4);
}

}  // namespace
}  // namespace tet
