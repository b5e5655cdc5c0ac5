#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slatesim/rng.hpp"

namespace slatesim {

// Cascade selection masses for an ordered slate.
struct SelectionProfile {
  std::vector<double> betas;  // beta_k = sigma_k * prod_{m<k} (1 - sigma_m)
  double abandon = 1.0;       // prod_m (1 - sigma_m)
  double slate_prob = 0.0;    // sum_k beta_k
};

struct UserResponse {
  std::optional<std::size_t> clicked_slot;  // empty: no-choice
  std::vector<int> click_vector;            // one-hot or all zero

  bool no_choice() const { return !clicked_slot.has_value(); }
};

// Throws DomainError if any sigma lies outside [0, 1].
SelectionProfile selection_probabilities(std::span<const double> sigmas);

// Exact categorical probabilities over (slot 0..K-1, no-choice) obtained by
// normalising the weights. Throws DomainError for negative or all-zero mass.
std::vector<double> choice_probabilities(std::span<const double> betas, double no_choice_weight);

// One observation per slate from Categorical(betas..., no_choice_weight),
// i.e. a softmax over log-masses.
UserResponse sample_user_choice(std::span<const double> betas, double no_choice_weight,
                                RngStream& rng);
// Cascade-consistent default: the no-choice mass is the abandon probability.
UserResponse sample_user_choice(const SelectionProfile& profile, RngStream& rng);
// Softmax over explicit log-relevances plus a no-choice logit.
UserResponse sample_user_choice_logits(std::span<const double> log_betas,
                                       double no_choice_logit, RngStream& rng);

// 1 with probability beta. Throws DomainError unless beta is in [0, 1].
int bernoulli_click(double beta, RngStream& rng);

}  // namespace slatesim
