#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "superres/slepian.hpp"
#include "superres/spectral.hpp"

namespace superres {

struct Phase1Config {
  double eta = 0.0;          // stop once the masked maximum of |z| is <= eta
  int oversample = 32;       // grid size M = oversample * N, >= 4
  bool refine = true;        // golden-section polish of each peak
  std::optional<int> max_peaks;

  void validate() const;
};

struct Phase1Result {
  int k_tilde = 0;
  Positions tau0;
  std::vector<double> peak_values;         // grid maximum of |z| at each accepted peak
  std::vector<std::size_t> grid_indices;   // grid argmax before polishing
  int iterations = 0;                      // argmax evaluations, including the final one
};

/// Greedy peak selection with neighbourhood erasure on z = g (*) y.
/// Each accepted peak masks every grid point within wraparound distance
/// 2 sigma of it; selection ends when the masked maximum is <= eta or after
/// min(max_peaks, ceil(1 / (2 sigma))) peaks.
[[nodiscard]] Phase1Result run_phase1(const Spectrum& y, const SlepianKernel& kernel,
                                      const Phase1Config& cfg);

/// eta = 2 ||n||_inf.
[[nodiscard]] double choose_eta(double noise_linf);

/// max_t |n(t)| estimated on an oversample * N grid.
[[nodiscard]] double grid_linf(const Spectrum& s, int oversample = 32);

}  // namespace superres
