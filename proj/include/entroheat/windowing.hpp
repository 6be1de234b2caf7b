#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entroheat/entropy.hpp"

namespace entroheat {

/// Window sums and means for a fixed window length W. Entry i (0-based here,
/// start i+1 in 1-based token positions) covers tokens [i+1, i+W].
struct WindowSeries {
  std::size_t window_length = 0;
  std::vector<double> sums;
  std::vector<double> means;

  std::size_t size() const noexcept { return means.size(); }
  bool empty() const noexcept { return means.empty(); }
  /// Number of tokens n the windows were computed over.
  std::size_t series_length() const noexcept {
    return means.empty() ? 0 : means.size() + window_length - 1;
  }
};

/// Window starts processed between full recomputations of the running sum.
/// Also the unit of parallel work.
inline constexpr std::size_t kRefreshInterval = 4096;

/// Optional instrumentation: counts accumulator updates so tests can check
/// the arithmetic stays linear in n.
struct WindowOpCounter {
  std::size_t accumulations = 0;
};

/// Sliding-window means by the running-sum recurrence
///   S_1 = h_1 + ... + h_W,   S_i = S_{i-1} + h_{i+W-1} - h_{i-1}.
/// The running sum is kept in double-double form and rebuilt from scratch at
/// the start of every block of max(kRefreshInterval, W) window starts, so
/// error does not accumulate. Each mean is the correctly rounded quotient of
/// that sum by W, which makes a constant series map to itself exactly.
/// W == 1 returns the input bit for bit.
///
/// Throws DomainError when W <= 0 or W > n (including n == 0).
WindowSeries window_means(std::span<const double> values, std::ptrdiff_t window,
                          WindowOpCounter* counter = nullptr);
WindowSeries window_means(const EntropySeries& series, std::ptrdiff_t window);

/// Same blocked recurrence on one thread. Matches window_means bit for bit.
WindowSeries window_means_serial(std::span<const double> values, std::ptrdiff_t window);

/// Direct O(nW) summation of every window. Reference oracle.
WindowSeries window_means_naive(std::span<const double> values, std::ptrdiff_t window);
WindowSeries window_means_naive(const EntropySeries& series, std::ptrdiff_t window);

}  // namespace entroheat
