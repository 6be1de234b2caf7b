#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "entroheat/token_stream.hpp"

namespace entroheat {

/// Entropy of one position in bits, with the probability mass left outside
/// the listed alternatives.
struct TokenEntropy {
  double bits = 0.0;
  double tail_mass = 0.0;
};

struct EntropySeries {
  std::vector<double> values;       // bits, one per token
  std::vector<double> tail_masses;  // in [0, 1]
  bool excluded_special = false;
  // 1 where a special token was zeroed; empty unless excluded_special.
  std::vector<std::uint8_t> excluded;

  std::size_t size() const noexcept { return values.size(); }
};

/// A complete distribution over a finite vocabulary. Used as the reference
/// against which the top-k+tail approximation is checked.
class FullDistribution {
 public:
  /// Throws ValidationError unless every p is in [0,1] and they sum to 1
  /// within 1e-9.
  explicit FullDistribution(std::vector<double> probabilities);

  std::span<const double> probabilities() const noexcept { return probabilities_; }
  std::size_t size() const noexcept { return probabilities_.size(); }

 private:
  std::vector<double> probabilities_;
};

/// The k largest probabilities of a distribution (ties keep the original
/// order) and the mass of everything merged into the tail.
struct CoarseGrained {
  std::vector<double> kept;
  std::vector<std::size_t> kept_indices;  // 0-based positions in the source
  double tail_mass = 0.0;

  /// Same truncation as a token record, alternatives named "v<index>".
  TokenRecord to_record(std::size_t position = 1) const;
};

/// -p log2 p with the 0 log 0 = 0 convention.
double surprisal_term(double p) noexcept;

/// Top-k+tail entropy of explicit probabilities. The tail is 1 - sum(p),
/// clamped at 0 when rounding pushes the sum past 1.
TokenEntropy truncated_entropy(std::span<const double> top_probabilities) noexcept;
TokenEntropy truncated_entropy(const TokenRecord& record);
TokenEntropy truncated_entropy(const CoarseGrained& truncation) noexcept;

double full_entropy(const FullDistribution& distribution) noexcept;

/// Throws DomainError when k <= 0 or k > m.
CoarseGrained coarse_grain(const FullDistribution& distribution, std::ptrdiff_t k);

/// Per-token truncated entropy over a transcript. With exclude_special the
/// special tokens get entropy 0 but keep their position.
/// Parallel across tokens when built with OpenMP; results do not depend on
/// the thread count.
EntropySeries entropy_series(const Transcript& transcript, bool exclude_special);

/// Single-threaded reference for entropy_series.
EntropySeries entropy_series_serial(const Transcript& transcript, bool exclude_special);

}  // namespace entroheat
