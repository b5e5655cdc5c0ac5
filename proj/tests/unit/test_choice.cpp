#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "oracles.hpp"
#include "slatesim/choice.hpp"
#include "slatesim/error.hpp"

namespace slatesim {
namespace {

void expect_profile(const std::vector<double>& sigma, const std::vector<double>& beta, double abandon) {
  const auto p = selection_probabilities(sigma);
  ASSERT_EQ(p.betas.size(), beta.size());
  for (std::size_t k = 0; k < beta.size(); ++k) EXPECT_NEAR(p.betas[k], beta[k], 1e-15);
  EXPECT_NEAR(p.abandon, abandon, 1e-15);
}

TEST(SelectionProbabilities, Examples) {
  expect_profile({0.5, 0.5}, {0.5, 0.25}, 0.25);
  expect_profile({1.0, 0.7}, {1.0, 0.0}, 0.0);
  expect_profile({0.2, 0.3, 0.5}, {0.2, 0.24, 0.28}, 0.28);
}

TEST(SelectionProbabilities, EmptySlateAbandonsSurely) {
  const auto p = selection_probabilities({});
  EXPECT_TRUE(p.betas.empty());
  EXPECT_EQ(p.abandon, 1.0);
  EXPECT_EQ(p.slate_prob, 0.0);
}

TEST(SelectionProbabilities, RejectsSigmaOutsideUnitInterval) {
  EXPECT_THROW(selection_probabilities(std::vector<double>{0.2, 1.01}), DomainError);
  EXPECT_THROW(selection_probabilities(std::vector<double>{-0.1}), DomainError);
  EXPECT_THROW(selection_probabilities(std::vector<double>{std::nan("")}), DomainError);
}

TEST(SelectionProbabilities, MatchesOutcomeEnumeration) {
  for (std::uint64_t c = 0; c < 300; ++c) {
    RngStream rng = testing::case_stream("cascade-enum", c);
    const auto sigma = testing::gen_sigmas(rng, 1, 12);
    const auto p = selection_probabilities(sigma);
    const auto oracle = testing::cascade_by_enumeration(sigma);
    for (std::size_t k = 0; k < sigma.size(); ++k) EXPECT_NEAR(p.betas[k], oracle.select[k], 1e-12);
    EXPECT_NEAR(p.abandon, oracle.abandon, 1e-12);
  }
}

TEST(SelectionProbabilities, NormalisesForAllLengths) {
  for (std::uint64_t c = 0; c < 2000; ++c) {
    RngStream rng = testing::case_stream("cascade-norm", c);
    const auto sigma = testing::gen_sigmas(rng, 1, 1000);
    const auto p = selection_probabilities(sigma);
    const double sum = std::accumulate(p.betas.begin(), p.betas.end(), 0.0);
    ASSERT_NEAR(sum + p.abandon, 1.0, 1e-12) << "case " << c;
    ASSERT_NEAR(p.slate_prob, sum, 1e-12);
    for (double b : p.betas) {
      ASSERT_GE(b, 0.0);
      ASSERT_LE(b, 1.0);
    }
  }
}

TEST(SelectionProbabilities, RaisingSigmaRaisesBetaAndLowersAbandon) {
  for (std::uint64_t c = 0; c < 500; ++c) {
    RngStream rng = testing::case_stream("cascade-mono", c);
    auto sigma = testing::gen_sigmas(rng, 1, 40);
    const std::size_t k = rng.below(sigma.size());
    const auto before = selection_probabilities(sigma);
    sigma[k] = sigma[k] + (1.0 - sigma[k]) * rng.uniform();
    const auto after = selection_probabilities(sigma);
    EXPECT_GE(after.betas[k], before.betas[k]);
    EXPECT_LE(after.abandon, before.abandon);
  }
}

TEST(SelectionProbabilities, PrefixConsistency) {
  for (std::uint64_t c = 0; c < 300; ++c) {
    RngStream rng = testing::case_stream("cascade-prefix", c);
    const auto sigma = testing::gen_sigmas(rng, 1, 100);
    const std::size_t k = 1 + rng.below(sigma.size());
    const auto full = selection_probabilities(sigma);
    const auto part = selection_probabilities(std::span<const double>(sigma.data(), k));
    for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(part.betas[j], full.betas[j]);
  }
}

TEST(ChoiceProbabilities, AlreadyNormalised) {
  const auto p = choice_probabilities(std::vector<double>{0.5, 0.25}, 0.25);
  EXPECT_EQ(p, (std::vector<double>{0.5, 0.25, 0.25}));
}

TEST(ChoiceProbabilities, AbandonAsNoChoiceRecoversCascadeExactly) {
  for (std::uint64_t c = 0; c < 300; ++c) {
    RngStream rng = testing::case_stream("cascade-categorical", c);
    const auto sigma = testing::gen_sigmas(rng, 1, 60);
    const auto prof = selection_probabilities(sigma);
    const auto p = choice_probabilities(prof.betas, prof.abandon);
    ASSERT_EQ(p.size(), sigma.size() + 1);
    for (std::size_t k = 0; k < sigma.size(); ++k) EXPECT_NEAR(p[k], prof.betas[k], 1e-12);
    EXPECT_NEAR(p.back(), prof.abandon, 1e-12);
  }
}

TEST(ChoiceProbabilities, RejectsDegenerateWeights) {
  EXPECT_THROW(choice_probabilities(std::vector<double>{0.0, 0.0}, 0.0), DomainError);
  EXPECT_THROW(choice_probabilities(std::vector<double>{-0.1, 0.5}, 0.1), DomainError);
}

TEST(SampleUserChoice, PointMassAlwaysClicksFirst) {
  RngStream rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto r = sample_user_choice(std::vector<double>{1.0, 0.0}, 0.0, rng);
    ASSERT_EQ(r.clicked_slot, 0u);
    ASSERT_EQ(r.click_vector, (std::vector<int>{1, 0}));
  }
}

TEST(SampleUserChoice, EmpiricalFrequenciesMatchCategorical) {
  RngStream rng(2);
  const std::vector<double> beta{0.2, 0.24, 0.28};
  std::vector<int> counts(4, 0);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto r = sample_user_choice(beta, 0.28, rng);
    int ones = std::accumulate(r.click_vector.begin(), r.click_vector.end(), 0);
    if (r.no_choice()) {
      ASSERT_EQ(ones, 0);
      ++counts[3];
    } else {
      ASSERT_EQ(ones, 1);
      ASSERT_EQ(r.click_vector[*r.clicked_slot], 1);
      ++counts[*r.clicked_slot];
    }
  }
  const double expect[] = {0.2, 0.24, 0.28, 0.28};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / double(n), expect[k], 0.01);
}

TEST(SampleUserChoice, LogitsFormAgreesWithMasses) {
  const std::vector<double> beta{0.2, 0.24, 0.28};
  const std::vector<double> logb{std::log(0.2), std::log(0.24), std::log(0.28)};
  RngStream a(3);
  std::vector<int> counts(4, 0);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto r = sample_user_choice_logits(logb, std::log(0.28), a);
    ++counts[r.no_choice() ? 3 : *r.clicked_slot];
  }
  const double expect[] = {0.2, 0.24, 0.28, 0.28};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(counts[static_cast<std::size_t>(k)] / double(n), expect[k], 0.01);
}

TEST(SampleUserChoice, ProfileOverloadUsesAbandonMass) {
  const auto prof = selection_probabilities(std::vector<double>{0.0, 0.0});
  RngStream rng(4);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(sample_user_choice(prof, rng).no_choice());
}

TEST(BernoulliClick, Endpoints) {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(bernoulli_click(0.0, rng), 0);
    ASSERT_EQ(bernoulli_click(1.0, rng), 1);
  }
}

TEST(BernoulliClick, Mean) {
  RngStream rng(6);
  int sum = 0;
  for (int i = 0; i < 100000; ++i) sum += bernoulli_click(0.3, rng);
  EXPECT_GE(sum / 100000.0, 0.29);
  EXPECT_LE(sum / 100000.0, 0.31);
}

TEST(BernoulliClick, RejectsInvalidBeta) {
  RngStream rng(7);
  EXPECT_THROW(bernoulli_click(1.5, rng), DomainError);
  EXPECT_THROW(bernoulli_click(-0.5, rng), DomainError);
}

}  // namespace
}  // namespace slatesim
