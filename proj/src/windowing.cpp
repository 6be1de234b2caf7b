#include "entroheat/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entroheat/error.hpp"

namespace entroheat {

namespace {

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
class DoubleDouble {
 public:
  void add(double x) noexcept {
    const double s = hi_ + x;
    const double bb = s - hi_;
    const double err = (hi_ - (s - bb)) + (x - bb);
    renormalize(s, lo_ + err);
  }
  void subtract(double x) noexcept { add(-x); }

  double value() const noexcept { return hi_; }

  /// Correctly rounded (hi + lo) / w for the values that occur here: the
  /// first quotient's remainder is exact under FMA.
  double divided_by(double w) const noexcept {
    const double q1 = hi_ / w;
    const double r = std::fma(-q1, w, hi_) + lo_;
    return q1 + r / w;
  }

 private:
  void renormalize(double a, double b) noexcept {
    hi_ = a + b;
    lo_ = b - (hi_ - a);
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

void check_window(std::size_t n, std::ptrdiff_t window) {
  if (window <= 0) {
    throw DomainError("window length must be positive, got " + std::to_string(window));
  }
  if (static_cast<std::size_t>(window) > n) {
    throw DomainError("window length W = " + std::to_string(window) +
                      " exceeds series length n = " + std::to_string(n));
  }
}

WindowSeries allocate(std::size_t n, std::size_t w) {
  WindowSeries out;
  out.window_length = w;
  out.sums.resize(n - w + 1);
  out.means.resize(n - w + 1);
  return out;
}

std::size_t block_length(std::size_t w) { return std::max(kRefreshInterval, w); }

/// Fills window starts [first, last) from a freshly built sum. Returns the
/// number of accumulator updates.
std::size_t fill_block(std::span<const double> h, std::size_t w, std::size_t first,
                       std::size_t last, WindowSeries& out) {
  DoubleDouble sum;
  for (std::size_t r = first; r < first + w; ++r) sum.add(h[r]);
  std::size_t ops = w;
  const double wd = static_cast<double>(w);
  for (std::size_t i = first; i < last; ++i) {
    if (i > first) {
      sum.add(h[i + w - 1]);
      sum.subtract(h[i - 1]);
      ops += 2;
    }
    out.sums[i] = sum.value();
    out.means[i] = sum.divided_by(wd);
  }
  return ops;
}

}  // namespace

WindowSeries window_means(std::span<const double> values, std::ptrdiff_t window,
                          WindowOpCounter* counter) {
  check_window(values.size(), window);
  const auto w = static_cast<std::size_t>(window);
  WindowSeries out = allocate(values.size(), w);
  if (w == 1) {
    std::copy(values.begin(), values.end(), out.sums.begin());
    std::copy(values.begin(), values.end(), out.means.begin());
    if (counter) counter->accumulations += values.size();
    return out;
  }
  const std::size_t starts = out.size();
  const std::size_t block = block_length(w);
  const auto blocks = static_cast<std::ptrdiff_t>((starts + block - 1) / block);
  std::size_t ops = 0;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) reduction(+ : ops) if (blocks > 1)
#endif
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t first = static_cast<std::size_t>(b) * block;
    ops += fill_block(values, w, first, std::min(first + block, starts), out);
  }
  if (counter) counter->accumulations += ops;
  return out;
}

WindowSeries window_means(const EntropySeries& series, std::ptrdiff_t window) {
  return window_means(std::span<const double>(series.values), window);
}

WindowSeries window_means_serial(std::span<const double> values, std::ptrdiff_t window) {
  check_window(values.size(), window);
  const auto w = static_cast<std::size_t>(window);
  WindowSeries out = allocate(values.size(), w);
  if (w == 1) {
    std::copy(values.begin(), values.end(), out.sums.begin());
    std::copy(values.begin(), values.end(), out.means.begin());
    return out;
  }
  const std::size_t starts = out.size();
  const std::size_t block = block_length(w);
  for (std::size_t first = 0; first < starts; first += block) {
    fill_block(values, w, first, std::min(first + block, starts), out);
  }
  return out;
}

WindowSeries window_means_naive(std::span<const double> values, std::ptrdiff_t window) {
  check_window(values.size(), window);
  const auto w = static_cast<std::size_t>(window);
  WindowSeries out = allocate(values.size(), w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t r = i; r < i + w; ++r) s += values[r];
    out.sums[i] = s;
    out.means[i] = s / static_cast<double>(w);
  }
  return out;
}

WindowSeries window_means_naive(const EntropySeries& series, std::ptrdiff_t window) {
  return window_means_naive(std::span<const double>(series.values), window);
}

}  // namespace entroheat
