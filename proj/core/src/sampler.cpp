#include "morphflow/sampler.hpp"

#include <cmath>

#include "morphflow/error.hpp"

namespace morphflow {

double Categorical::mean() const noexcept {
  double m = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) m += static_cast<double>(k) * weights[k];
  return m;
}

double Categorical::variance() const noexcept {
  const double m = mean();
  double v = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double d = static_cast<double>(k) - m;
    v += d * d * weights[k];
  }
  return v;
}

bool Categorical::well_formed() const noexcept {
  if (weights.empty()) return true;
  if (weights.size() > kMaxCategoricalSupport) return false;
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) return false;
    total += w;
  }
  return std::abs(total - 1.0) <= 1e-9;
}

Categorical delta(int value) {
  if (value < 0 || static_cast<std::size_t>(value) >= kMaxCategoricalSupport) {
    throw Error(Errc::invalid_argument, "categorical support is limited to 0..15");
  }
  Categorical c;
  c.weights.assign(static_cast<std::size_t>(value) + 1, 0.0);
  c.weights.back() = 1.0;
  return c;
}

int sample_categorical(const Categorical& dist, Rng& rng) {
  if (dist.empty()) return 0;
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t k = 0; k < dist.weights.size(); ++k) {
    cumulative += dist.weights[k];
    if (u < cumulative) return static_cast<int>(k);
  }
  // Rounding left u above the accumulated total; take the last supported value.
  for (std::size_t k = dist.weights.size(); k-- > 0;) {
    if (dist.weights[k] > 0.0) return static_cast<int>(k);
  }
  return 0;
}

int mixture_sample(int latest_p, int latest_q, double alpha, Rng& rng) {
  return rng.uniform() < alpha ? latest_q : latest_p;
}

double SignedSampler::signed_latest() const noexcept {
  const double pos = pos_channel.distribution.empty() ? 0.0 : pos_weight * pos_channel.latest;
  const double neg = neg_channel.distribution.empty() ? 0.0 : neg_weight * neg_channel.latest;
  return pos - neg;
}

double SignedSampler::signed_expectation() const noexcept {
  return pos_weight * pos_channel.distribution.mean() - neg_weight * neg_channel.distribution.mean();
}

SignedSampler signed_negate(const SignedSampler& s) {
  SignedSampler out;
  out.pos_channel = s.neg_channel;
  out.neg_channel = s.pos_channel;
  out.pos_weight = s.neg_weight;
  out.neg_weight = s.pos_weight;
  return out;
}

double draw_signed(SignedSampler& s, Rng& rng) {
  s.pos_channel.pending = sample_categorical(s.pos_channel.distribution, rng);
  s.neg_channel.pending = sample_categorical(s.neg_channel.distribution, rng);
  const double pos = s.pos_channel.distribution.empty() ? 0.0 : s.pos_weight * s.pos_channel.pending;
  const double neg = s.neg_channel.distribution.empty() ? 0.0 : s.neg_weight * s.neg_channel.pending;
  return pos - neg;
}

}  // namespace morphflow
