#include "superres/phase1.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "superres/error.hpp"

namespace superres {

namespace {

constexpr int kGoldenIterations = 40;

// Maximise |z| on [lo, hi] by golden-section search.
double golden_max(const Spectrum& zhat, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double t) { return std::abs(eval_point(zhat, CirclePoint(t))); };
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < kGoldenIterations; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? x1 : x2;
}

}  // namespace

void Phase1Config::validate() const {
  if (oversample < 4) throw Error("phase1: oversample must be >= 4");
  if (!(eta >= 0.0)) throw Error("phase1: eta must be >= 0");
  if (max_peaks && *max_peaks < 0) throw Error("phase1: max_peaks must be >= 0");
}

double choose_eta(double noise_linf) {
  if (noise_linf < 0.0) throw Error("noise L-infinity norm must be >= 0");
  return 2.0 * noise_linf;
}

double grid_linf(const Spectrum& s, int oversample) {
  const auto v = eval_grid(s, oversample * s.size());
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Phase1Result run_phase1(const Spectrum& y, const SlepianKernel& kernel, const Phase1Config& cfg) {
  cfg.validate();
  if (y.fc() != kernel.fc()) throw Error("phase1: measurement and kernel cut-off differ");

  const Spectrum zhat = pointwise_mul(kernel.spectrum(), y);
  const int m = cfg.oversample * y.size();
  const auto z = eval_grid(zhat, m);
  std::vector<double> mag(z.size());
  std::transform(z.begin(), z.end(), mag.begin(), [](double v) { return std::abs(v); });

  const double sigma = kernel.sigma();
  const double erase = 2.0 * sigma;
  int cap = static_cast<int>(std::ceil(1.0 / erase));
  if (cfg.max_peaks) cap = std::min(cap, *cfg.max_peaks);

  std::vector<bool> masked(mag.size(), false);
  Phase1Result res;
  const double cell = 1.0 / m;

  while (res.k_tilde < cap) {
    ++res.iterations;
    // Masked argmax; strict comparison keeps the smallest index on ties.
    std::size_t best = mag.size();
    double best_val = -1.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
      if (!masked[i] && mag[i] > best_val) {
        best_val = mag[i];
        best = i;
      }
    }
    if (best == mag.size() || best_val <= cfg.eta) break;

    double loc = static_cast<double>(best) * cell;
    if (cfg.refine) {
      const double t = golden_max(zhat, loc - cell, loc + cell);
      const double v = std::abs(eval_point(zhat, CirclePoint(t)));
      const CirclePoint cand(t);
      const bool clear = std::all_of(res.tau0.begin(), res.tau0.end(),
                                     [&](CirclePoint p) { return wrap_dist(p, cand) > erase; });
      if (v > best_val && clear) loc = cand.value();
    }

    const CirclePoint peak(loc);
    res.tau0.push_back(peak);
    res.peak_values.push_back(best_val);
    res.grid_indices.push_back(best);
    ++res.k_tilde;

    for (std::size_t i = 0; i < mag.size(); ++i) {
      if (!masked[i] && wrap_dist(CirclePoint(static_cast<double>(i) * cell), peak) <= erase) {
        masked[i] = true;
      }
    }
  }
  return res;
}

}  // namespace superres
