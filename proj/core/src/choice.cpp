#include "slatesim/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slatesim/error.hpp"

namespace slatesim {

SelectionProfile selection_probabilities(std::span<const double> sigmas) {
  SelectionProfile p;
  p.betas.reserve(sigmas.size());
  double survival = 1.0;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const double s = sigmas[k];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw DomainError("selection_probabilities: sigma[" + std::to_string(k) +
                        "] outside [0, 1]");
    }
    const double beta = s * survival;
    p.betas.push_back(beta);
    p.slate_prob += beta;
    survival *= (1.0 - s);
  }
  p.abandon = survival;
  return p;
}

std::vector<double> choice_probabilities(std::span<const double> betas, double no_choice_weight) {
  double total = 0.0;
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("choice weights must be finite and >= 0");
    total += b;
  }
  if (!(no_choice_weight >= 0.0) || !std::isfinite(no_choice_weight)) {
    throw DomainError("no-choice weight must be finite and >= 0");
  }
  total += no_choice_weight;
  if (total <= 0.0) throw DomainError("degenerate choice distribution: all weights are zero");
  std::vector<double> probs(betas.size() + 1);
  for (std::size_t k = 0; k < betas.size(); ++k) probs[k] = betas[k] / total;
  probs.back() = no_choice_weight / total;
  return probs;
}

namespace {

UserResponse draw(std::span<const double> probs, RngStream& rng) {
  const std::size_t slots = probs.size() - 1;
  UserResponse r;
  r.click_vector.assign(slots, 0);
  const double u = rng.uniform();
  double acc = 0.0;
  std::optional<std::size_t> last_positive;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    acc += probs[k];
    if (u < acc) {
      if (k < slots) {
        r.clicked_slot = k;
        r.click_vector[k] = 1;
      }
      return r;
    }
  }
  // Rounding left u beyond the accumulated mass: take the last outcome with mass.
  if (last_positive && *last_positive < slots) {
    r.clicked_slot = *last_positive;
    r.click_vector[*last_positive] = 1;
  }
  return r;
}

}  // namespace

UserResponse sample_user_choice(std::span<const double> betas, double no_choice_weight,
                                RngStream& rng) {
  const auto probs = choice_probabilities(betas, no_choice_weight);
  return draw(probs, rng);
}

UserResponse sample_user_choice(const SelectionProfile& profile, RngStream& rng) {
  return sample_user_choice(profile.betas, profile.abandon, rng);
}

UserResponse sample_user_choice_logits(std::span<const double> log_betas, double no_choice_logit,
                                       RngStream& rng) {
  double hi = no_choice_logit;
  for (double l : log_betas) hi = std::max(hi, l);
  if (hi == -std::numeric_limits<double>::infinity() || std::isnan(hi)) {
    throw DomainError("degenerate choice distribution: all logits are -inf");
  }
  std::vector<double> weights(log_betas.size());
  for (std::size_t k = 0; k < log_betas.size(); ++k) weights[k] = std::exp(log_betas[k] - hi);
  return sample_user_choice(weights, std::exp(no_choice_logit - hi), rng);
}

int bernoulli_click(double beta, RngStream& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("bernoulli_click: beta outside [0, 1]");
  return rng.uniform() < beta ? 1 : 0;
}

}  // namespace slatesim
