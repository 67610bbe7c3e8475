#include "tet/text/embedding_cache.hpp"
#include "tet/text/snippet_pool.hpp"
#include "tet/text/stub_embed.hpp"
#include "tet/text/topics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

namespace tet {
namespace {

TEST(Stub, HashOfKnownInputs) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Stub, MatchesIndependentReference) {
  // Values from a separate big-integer implementation of the stub contract.
  const double a[8] = {0.6493741728484893,  -0.007661553369958344, -0.022764798791431267, -0.05347140267665754,
                       0.5590582153147945,  0.07415064009628836,   -0.2638485194463267,   -0.4326853481658524};
  const RowVec v = stub_embed("a", 8);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(v[i], a[i], 1e-15) << i;

  const double odd[5] = {0.7560738823803281, -0.008920435464931917, -0.026505319311275227, -0.062257374420548434,
                         0.6509179653319769};
  const RowVec w = stub_embed("a", 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], odd[i], 1e-15) << i;

  const RowVec c = stub_embed("course was great", 8);
  EXPECT_NEAR(c[0], -0.10034551752728331, 1e-15);
  EXPECT_NEAR(c[7], -0.26436584475551755, 1e-15);
}

TEST(Stub, DeterministicAndUnitNorm) {
  EXPECT_EQ(stub_embed("a", 64), stub_embed("a", 64));
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const auto len = uniform_index(rng, 12);
    for (std::uint64_t k = 0; k < len; ++k) s.push_back(static_cast<char>('a' + uniform_index(rng, 26)));
    EXPECT_NEAR(stub_embed(s, 64).norm(), 1.0, 1e-12) << s;
  }
}

TEST(Stub, DistinctStringsAreNearlyOrthogonal) {
  Rng rng(2);
  int low = 0;
  const int pairs = 1000;
  for (int i = 0; i < pairs; ++i) {
    const std::string a = "snippet " + std::to_string(uniform_index(rng, 1000000));
    std::string b;
    do {
      b = "snippet " + std::to_string(uniform_index(rng, 1000000));
    } while (b == a);
    low += stub_embed(a, 64).dot(stub_embed(b, 64)) < 0.5 ? 1 : 0;
  }
  EXPECT_GE(low, 990);
}

EmbeddingCache random_cache(int n, std::uint32_t d, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingCache cache(d);
  for (int i = 0; i < n; ++i) {
    RowVec v(d);
    for (std::uint32_t j = 0; j < d; ++j) v[j] = static_cast<float>(standard_normal(rng));
    cache.add("s" + std::to_string(i), v);
  }
  return cache;
}

TEST(Cache, TwoSnippets) {
  EmbeddingCache cache(4);
  cache.add("x", stub_embed("x", 4));
  cache.add("y", stub_embed("y", 4));
  const EmbeddingCache back = decode_embedding_cache(encode_embedding_cache(cache));
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(back.d_llm(), 4u);
}

TEST(Cache, HundredVectorsRoundTripAtFloatPrecision) {
  const EmbeddingCache cache = random_cache(100, 16, 3);
  const std::string bytes = encode_embedding_cache(cache);
  const EmbeddingCache back = decode_embedding_cache(bytes);
  EXPECT_EQ(back, cache);
  EXPECT_EQ(encode_embedding_cache(back), bytes);
  EXPECT_EQ(bytes.size(), 4u + 4u + 4u + 8u + 100u * 2u + (10u * 2u + 90u * 3u) + 100u * 16u * 4u);
}

TEST(Cache, StoresFloat32Payload) {
  EmbeddingCache cache(1);
  RowVec v(1);
  v << 0.1;
  cache.add("id", v);
  const std::string bytes = encode_embedding_cache(cache);
  float f;
  std::memcpy(&f, bytes.data() + bytes.size() - 4, 4);
  EXPECT_EQ(f, 0.1f);
  EXPECT_EQ(decode_embedding_cache(bytes).at("id")[0], static_cast<double>(0.1f));
}

TEST(Cache, TruncatedPayloadNamesRecord) {
  const std::string bytes = encode_embedding_cache(random_cache(3, 4, 5));
  try {
    decode_embedding_cache(bytes.substr(0, bytes.size() - 5));
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("record 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("s2"), std::string::npos) << msg;
  }
}

TEST(Cache, RejectsDuplicatesAndWidthMismatch) {
  EmbeddingCache cache(2);
  cache.add("a", RowVec::Zero(2));
  EXPECT_THROW(cache.add("a", RowVec::Zero(2)), std::invalid_argument);
  EXPECT_THROW(cache.add("b", RowVec::Zero(3)), std::invalid_argument);
  EXPECT_THROW(cache.at("c"), std::out_of_range);
  std::string bad = encode_embedding_cache(cache);
  bad[1] = 'X';
  EXPECT_THROW(decode_embedding_cache(bad), std::runtime_error);
}

TEST(SnippetPool, SingleSnippetIsReturnedUnchanged) {
  Rng rng(1);
  SnippetScorer scorer(4, 3, rng);
  TapeD tape;
  Mat s = stub_embed("only", 4);
  const auto r = pool_snippets(tape, tape.constant(s), scorer);
  EXPECT_DOUBLE_EQ(r.weights(0, 0), 1.0);
  EXPECT_TRUE(r.pooled.value().isApprox(s, 1e-15));
}

TEST(SnippetPool, IdenticalSnippetsGiveUniformWeights) {
  Rng rng(1);
  SnippetScorer scorer(4, 3, rng);
  TapeD tape;
  Mat s(3, 4);
  for (int k = 0; k < 3; ++k) s.row(k) = stub_embed("same", 4);
  const auto r = pool_snippets(tape, tape.constant(s), scorer);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r.weights(0, k), 1.0 / 3.0, 1e-15);
}

TEST(SnippetPool, TwoSnippetHandComputation) {
  Rng rng(1);
  SnippetScorer scorer(2, 1, rng);
  scorer.projection.value << 1.0, 0.0;  // U: 2 x 1
  scorer.weight.value << 2.0;
  Mat s(2, 2);
  s << 0.5, 3.0, -1.0, 7.0;
  TapeD tape;
  const auto r = pool_snippets(tape, tape.constant(s), scorer);
  const double e1 = 2.0 * std::tanh(0.5), e2 = 2.0 * std::tanh(-1.0);
  const double b1 = std::exp(e1) / (std::exp(e1) + std::exp(e2));
  EXPECT_NEAR(r.weights(0, 0), b1, 1e-15);
  EXPECT_NEAR(r.pooled.value()(0, 0), b1 * 0.5 - (1.0 - b1), 1e-14);
  EXPECT_NEAR(r.pooled.value()(0, 1), b1 * 3.0 + (1.0 - b1) * 7.0, 1e-14);
}

TEST(Topics, SnippetAtCentroidWithSmallTemperatureIsOneHot) {
  TopicModel m;
  m.centroids = Mat(3, 2);
  m.centroids << 0, 0, 1, 0, 0, 1;
  m.temperature = 1e-3;
  Mat s(1, 2);
  s << 1, 0;
  const RowVec theta = topic_distribution(s, m);
  EXPECT_NEAR(theta[1], 1.0, 1e-12);
  EXPECT_NEAR(theta.sum(), 1.0, 1e-15);
}

TEST(Topics, SymmetricSnippetsGiveUniformOverTwoTopics) {
  TopicModel m;
  m.centroids = Mat(2, 1);
  m.centroids << -1, 1;
  m.temperature = 0.7;
  Mat s(2, 1);
  s << -1.3, 1.3;
  const RowVec theta = topic_distribution(s, m);
  EXPECT_NEAR(theta[0], 0.5, 1e-15);
  EXPECT_NEAR(theta[1], 0.5, 1e-15);
}

TEST(Topics, KMeansRecoversTwoClusters) {
  Rng rng(11);
  Mat x(200, 3);
  for (int i = 0; i < 200; ++i) {
    const double center = i % 2 == 0 ? -1.0 : 1.0;
    x(i, 0) = center + 0.05 * standard_normal(rng);
    x(i, 1) = 0.05 * standard_normal(rng);
    x(i, 2) = 0.05 * standard_normal(rng);
  }
  const TopicModel m = fit_topics(x, 2, 7);
  const double c0 = m.centroids(0, 0), c1 = m.centroids(1, 0);
  EXPECT_NEAR(std::min(c0, c1), -1.0, 0.1);
  EXPECT_NEAR(std::max(c0, c1), 1.0, 0.1);
  // Temperature is the mean squared distance to the nearest centroid.
  double sq = 0.0;
  for (int i = 0; i < 200; ++i) {
    sq += std::min((x.row(i) - m.centroids.row(0)).squaredNorm(), (x.row(i) - m.centroids.row(1)).squaredNorm());
  }
  EXPECT_NEAR(m.temperature, sq / 200.0, 1e-12);
  EXPECT_EQ(fit_topics(x, 2, 7).centroids, m.centroids);
}

TEST(Topics, TooFewDistinctVectorsIsAnError) {
  Mat x = Mat::Ones(10, 2);
  EXPECT_EQ(count_distinct_rows(x), 1u);
  EXPECT_THROW(fit_topics(x, 2, 1), std::invalid_argument);
  EXPECT_THROW(fit_topics(Mat::Identity(4, 4), 1, 1), std::invalid_argument);
}

}  // namespace
}  // namespace tet
