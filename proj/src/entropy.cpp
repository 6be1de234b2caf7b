#include "entroheat/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "entroheat/error.hpp"

namespace entroheat {

namespace {

TokenEntropy record_entropy(const TokenRecord& record) {
  // Up to 21 alternatives in practice; stay off the heap for those.
  constexpr std::size_t kInline = 32;
  double inline_buffer[kInline];
  std::vector<double> heap_buffer;
  double* probs = inline_buffer;
  if (record.alternatives.size() > kInline) {
    heap_buffer.resize(record.alternatives.size());
    probs = heap_buffer.data();
  }
  for (std::size_t j = 0; j < record.alternatives.size(); ++j) {
    probs[j] = std::exp(record.alternatives[j].logprob);
  }
  return truncated_entropy(std::span<const double>(probs, record.alternatives.size()));
}

void fill_position(const Transcript& transcript, bool exclude_special, std::size_t i,
                   EntropySeries& out) {
  const auto& record = transcript.tokens[i];
  const TokenEntropy e = record_entropy(record);
  out.tail_masses[i] = e.tail_mass;
  if (exclude_special && record.is_special) {
    out.values[i] = 0.0;
    out.excluded[i] = 1;
  } else {
    out.values[i] = e.bits;
  }
}

EntropySeries allocate_series(std::size_t n, bool exclude_special) {
  EntropySeries out;
  out.values.resize(n);
  out.tail_masses.resize(n);
  out.excluded_special = exclude_special;
  if (exclude_special) out.excluded.assign(n, 0);
  return out;
}

}  // namespace

FullDistribution::FullDistribution(std::vector<double> probabilities)
    : probabilities_(std::move(probabilities)) {
  if (probabilities_.empty()) throw ValidationError("distribution has no outcomes");
  double sum = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("probability " + std::to_string(p) + " outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

TokenRecord CoarseGrained::to_record(std::size_t position) const {
  TokenRecord record;
  record.index = position;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    record.alternatives.push_back({"v" + std::to_string(kept_indices[j]), std::log(kept[j])});
  }
  if (!record.alternatives.empty()) record.chosen_text = record.alternatives.front().text;
  return record;
}

double surprisal_term(double p) noexcept { return p > 0.0 ? -p * std::log2(p) : 0.0; }

TokenEntropy truncated_entropy(std::span<const double> top_probabilities) noexcept {
  double bits = 0.0;
  double mass = 0.0;
  for (double p : top_probabilities) {
    bits += surprisal_term(p);
    mass += p;
  }
  const double tail = std::max(0.0, 1.0 - mass);
  bits += surprisal_term(tail);
  return {bits, tail};
}

TokenEntropy truncated_entropy(const TokenRecord& record) {
  validate(record);
  return record_entropy(record);
}

TokenEntropy truncated_entropy(const CoarseGrained& truncation) noexcept {
  return truncated_entropy(std::span<const double>(truncation.kept));
}

double full_entropy(const FullDistribution& distribution) noexcept {
  double bits = 0.0;
  for (double p : distribution.probabilities()) bits += surprisal_term(p);
  return bits;
}

CoarseGrained coarse_grain(const FullDistribution& distribution, std::ptrdiff_t k) {
  const auto m = static_cast<std::ptrdiff_t>(distribution.size());
  if (k <= 0) throw DomainError("coarse_grain: k must be positive, got " + std::to_string(k));
  if (k > m) {
    throw DomainError("coarse_grain: k = " + std::to_string(k) + " exceeds the " +
                      std::to_string(m) + " outcomes");
  }
  const auto probs = distribution.probabilities();
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  CoarseGrained out;
  out.kept_indices.assign(order.begin(), order.begin() + k);
  double mass = 0.0;
  for (std::size_t idx : out.kept_indices) {
    out.kept.push_back(probs[idx]);
    mass += probs[idx];
  }
  out.tail_mass = std::max(0.0, 1.0 - mass);
  return out;
}

EntropySeries entropy_series(const Transcript& transcript, bool exclude_special) {
  validate(transcript);
  const auto n = static_cast<std::ptrdiff_t>(transcript.tokens.size());
  EntropySeries out = allocate_series(transcript.tokens.size(), exclude_special);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (n > 2048)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    fill_position(transcript, exclude_special, static_cast<std::size_t>(i), out);
  }
  return out;
}

EntropySeries entropy_series_serial(const Transcript& transcript, bool exclude_special) {
  validate(transcript);
  EntropySeries out = allocate_series(transcript.tokens.size(), exclude_special);
  for (std::size_t i = 0; i < transcript.tokens.size(); ++i) {
    fill_position(transcript, exclude_special, i, out);
  }
  return out;
}

}  // namespace entroheat
