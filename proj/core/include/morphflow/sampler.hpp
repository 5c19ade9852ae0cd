#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "morphflow/rng.hpp"

namespace morphflow {

inline constexpr std::size_t kMaxCategoricalSupport = 16;

/// Categorical distribution over {0, ..., n-1}. An empty weight list is the
/// empty channel: it never draws and contributes nothing to signed expectations.
struct Categorical {
  std::vector<double> weights;

  bool empty() const noexcept { return weights.empty(); }
  double mean() const noexcept;
  double variance() const noexcept;

  /// Non-negative weights summing to 1 within 1e-9, support <= 16.
  bool well_formed() const noexcept;

  friend bool operator==(const Categorical&, const Categorical&) = default;
};

/// Point mass at `value`.
Categorical delta(int value);

/// Inverse-CDF draw; consumes exactly one rng value. Empty channels return 0
/// without consuming.
int sample_categorical(const Categorical& dist, Rng& rng);

/// Returns latest_p with probability 1 - alpha and latest_q otherwise.
/// Always consumes exactly one rng value.
int mixture_sample(int latest_p, int latest_q, double alpha, Rng& rng);

/// A sampler stream. Without `mixture_alpha` it draws from `distribution`
/// every tick; with it, it mixes the latest samples of its two sampler sources.
struct Sampler {
  Categorical distribution;
  int latest = 0;
  int pending = 0;
  std::optional<double> mixture_alpha;

  friend bool operator==(const Sampler&, const Sampler&) = default;
};

/// Two channels realizing negation for probabilistic streams. The signed value
/// of a draw is pos_weight * pos - neg_weight * neg.
struct SignedSampler {
  Sampler pos_channel;
  Sampler neg_channel;
  double pos_weight = 1.0;
  double neg_weight = 0.0;

  double signed_latest() const noexcept;
  double signed_expectation() const noexcept;

  friend bool operator==(const SignedSampler&, const SignedSampler&) = default;
};

/// Swaps channels and weights.
SignedSampler signed_negate(const SignedSampler& s);

/// Draws both channels (one rng value per non-empty channel) into `pending`
/// and returns the signed value of the new pair.
double draw_signed(SignedSampler& s, Rng& rng);

}  // namespace morphflow
