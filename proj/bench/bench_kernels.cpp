// Wall-clock comparison of the OpenMP kernels against their serial references.
//   bench_kernels [n] [repeats]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "entroheat/entropy.hpp"
#include "entroheat/windowing.hpp"

using namespace entroheat;

namespace {

Transcript random_transcript(std::size_t n, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Transcript t;
  t.tokens.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> w(k + 1);
    for (auto& x : w) x = u(rng);
    double total = 0;
    for (double x : w) total += x;
    std::sort(w.begin(), w.end(), std::greater<>());
    TokenRecord r;
    r.index = i + 1;
    r.chosen_text = "t";
    for (int j = 0; j < k; ++j) r.alternatives.push_back({"a" + std::to_string(j), std::log(w[j] / total)});
    t.tokens.push_back(std::move(r));
  }
  return t;
}

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double ms, double reference_ms) {
  std::printf("%-34s %10.3f ms   x%.2f\n", name, ms, reference_ms / ms);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1000000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
#if defined(_OPENMP)
  std::printf("n=%zu repeats=%d threads=%d\n", n, repeats, omp_get_max_threads());
#else
  std::printf("n=%zu repeats=%d (built without OpenMP)\n", n, repeats);
#endif

  const Transcript t = random_transcript(n, 5, 1);
  EntropySeries par, ser;
  const double es = best_ms(repeats, [&] { ser = entropy_series_serial(t, false); });
  const double ep = best_ms(repeats, [&] { par = entropy_series(t, false); });
  row("entropy_series_serial", es, es);
  row("entropy_series", ep, es);
  if (par.values != ser.values) {
    std::fprintf(stderr, "entropy kernels disagree\n");
    return 1;
  }

  for (std::ptrdiff_t w : {10, 1000}) {
    WindowSeries a, b;
    const double ws = best_ms(repeats, [&] { a = window_means_serial(ser.values, w); });
    const double wp = best_ms(repeats, [&] { b = window_means(ser.values, w); });
    std::printf("W=%td\n", w);
    row("  window_means_serial", ws, ws);
    row("  window_means", wp, ws);
    if (a.means != b.means) {
      std::fprintf(stderr, "window kernels disagree at W=%td\n", w);
      return 1;
    }
    const std::size_t small = std::min<std::size_t>(n, 100000);
    const std::span<const double> head(ser.values.data(), small);
    const double wn = best_ms(1, [&] { (void)window_means_naive(head, w); });
    const double wh = best_ms(repeats, [&] { (void)window_means_serial(head, w); });
    std::printf("  naive vs serial on n=%zu: %.3f ms vs %.3f ms\n", small, wn, wh);
  }
  return 0;
}
