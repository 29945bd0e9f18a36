#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "superres/circle.hpp"

namespace superres {

using cplx = std::complex<double>;

/// Atomic measure sum_i amplitudes[i] * delta(t - positions[i]).
struct SpikeTrain {
  Positions positions;
  std::vector<double> amplitudes;

  /// Throws unless lengths match, K >= 1 and positions are distinct.
  void validate() const;
  [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
};

/// Fourier coefficients on the band [-fc, fc]. Immutable once built.
class Spectrum {
 public:
  /// `real_signal` asserts Hermitian symmetry; it is checked to 1e-12
  /// relative and the constructor throws if it does not hold.
  Spectrum(int fc, std::vector<cplx> coeffs, bool real_signal);

  [[nodiscard]] static Spectrum zeros(int fc);

  [[nodiscard]] int fc() const noexcept { return fc_; }
  [[nodiscard]] int size() const noexcept { return 2 * fc_ + 1; }
  [[nodiscard]] bool real_signal() const noexcept { return real_signal_; }

  /// Coefficient at frequency l, -fc <= l <= fc.
  [[nodiscard]] cplx operator[](int l) const { return coeffs_[static_cast<std::size_t>(l + fc_)]; }

  /// Storage order is l = -fc, ..., fc.
  [[nodiscard]] std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  /// Sum_l |coeffs[l]|^2.
  [[nodiscard]] double energy() const noexcept;

 private:
  int fc_;
  std::vector<cplx> coeffs_;
  bool real_signal_;
};

/// max_l |c[-l] - conj(c[l])| / max_l |c[l]| (0 for the zero spectrum).
[[nodiscard]] double hermitian_residue(std::span<const cplx> coeffs);

/// coeffs[l] = sum_i alpha[i] exp(-i 2 pi l tau[i]).
[[nodiscard]] Spectrum spike_fourier(const SpikeTrain& x, int fc);

/// Band-limited Gaussian noise rescaled to total energy (2 fc + 1) nu^2.
[[nodiscard]] Spectrum synth_noise(int fc, double nu, std::uint64_t seed);

[[nodiscard]] Spectrum add(const Spectrum& a, const Spectrum& b);
[[nodiscard]] Spectrum scale(const Spectrum& a, double gamma);
/// Entrywise product, i.e. circular convolution of the two signals.
[[nodiscard]] Spectrum pointwise_mul(const Spectrum& a, const Spectrum& b);
/// coeffs[l] * exp(-i 2 pi l delta): the signal delayed by delta.
[[nodiscard]] Spectrum modulate(const Spectrum& a, double delta);

/// Values of the real signal at t = k / m, k = 0..m-1, by a zero-padded
/// inverse DFT. Requires m >= 2 fc + 1 ("grid too coarse" otherwise).
[[nodiscard]] std::vector<double> eval_grid(const Spectrum& s, int m);

/// Value of the real signal at a single point by direct summation.
[[nodiscard]] double eval_point(const Spectrum& s, CirclePoint t);

}  // namespace superres
