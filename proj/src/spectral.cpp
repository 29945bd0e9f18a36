#include "superres/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "superres/error.hpp"
#include "superres/rng.hpp"

namespace superres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHermitianTol = 1e-12;
constexpr double kGridImagTol = 1e-9;

void require_same_band(const Spectrum& a, const Spectrum& b) {
  if (a.fc() != b.fc()) {
    throw Error("spectrum band mismatch: fc " + std::to_string(a.fc()) + " vs " +
                std::to_string(b.fc()));
  }
}

// Hermitian symmetry is exact for these coefficients by construction; the
// (a[l] + conj(a[-l]))/2 projection removes the rounding asymmetry.
std::vector<cplx> hermitian_part(std::vector<cplx> c) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const cplx avg = 0.5 * (c[j] + std::conj(c[i]));
    c[j] = avg;
    c[i] = std::conj(avg);
  }
  c[n / 2] = cplx(c[n / 2].real(), 0.0);
  return c;
}

}  // namespace

void SpikeTrain::validate() const {
  if (positions.empty()) throw Error("spike train must contain at least one spike");
  if (positions.size() != amplitudes.size()) throw Error("positions/amplitudes length mismatch");
  if (positions.size() > 1 && separation(positions) <= 0.0) {
    throw Error("spike positions must be distinct");
  }
}

double hermitian_residue(std::span<const cplx> coeffs) {
  double scale = 0.0;
  for (const auto& c : coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  const std::size_t n = coeffs.size();
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(coeffs[n - 1 - i] - std::conj(coeffs[i])));
  }
  return worst / scale;
}

Spectrum::Spectrum(int fc, std::vector<cplx> coeffs, bool real_signal)
    : fc_(fc), coeffs_(std::move(coeffs)), real_signal_(real_signal) {
  if (fc < 1) throw Error("cut-off frequency must be >= 1");
  if (coeffs_.size() != static_cast<std::size_t>(2 * fc + 1)) {
    throw Error("spectrum length " + std::to_string(coeffs_.size()) + " != 2*fc+1 = " +
                std::to_string(2 * fc + 1));
  }
  if (real_signal_ && hermitian_residue(coeffs_) > kHermitianTol) {
    throw Error("spectrum flagged real_signal is not Hermitian symmetric");
  }
}

Spectrum Spectrum::zeros(int fc) {
  return Spectrum(fc, std::vector<cplx>(static_cast<std::size_t>(2 * fc + 1)), true);
}

double Spectrum::energy() const noexcept {
  double e = 0.0;
  for (const auto& c : coeffs_) e += std::norm(c);
  return e;
}

Spectrum spike_fourier(const SpikeTrain& x, int fc) {
  x.validate();
  if (fc < 1) throw Error("cut-off frequency must be >= 1");
  std::vector<cplx> c(static_cast<std::size_t>(2 * fc + 1));
  for (int l = -fc; l <= fc; ++l) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      // l * tau reduced mod 1 keeps the phase argument small for large l.
      const double ph = wrap_unit(static_cast<double>(l) * x.positions[i].value());
      acc += x.amplitudes[i] * std::polar(1.0, -kTwoPi * ph);
    }
    c[static_cast<std::size_t>(l + fc)] = acc;
  }
  return Spectrum(fc, hermitian_part(std::move(c)), true);
}

Spectrum synth_noise(int fc, double nu, std::uint64_t seed) {
  if (nu < 0.0) throw Error("noise level must be >= 0");
  if (nu == 0.0) return Spectrum::zeros(fc);
  Xoshiro256 rng(seed);
  const auto n = static_cast<std::size_t>(2 * fc + 1);
  std::vector<cplx> c(n);
  c[static_cast<std::size_t>(fc)] = cplx(rng.normal(), 0.0);
  for (int l = 1; l <= fc; ++l) {
    const double re = rng.normal() * std::numbers::sqrt2 / 2.0;
    const double im = rng.normal() * std::numbers::sqrt2 / 2.0;
    c[static_cast<std::size_t>(fc + l)] = cplx(re, im);
    c[static_cast<std::size_t>(fc - l)] = cplx(re, -im);
  }
  double e = 0.0;
  for (const auto& v : c) e += std::norm(v);
  const double target = static_cast<double>(n) * nu * nu;
  const double g = std::sqrt(target / e);
  for (auto& v : c) v *= g;
  return Spectrum(fc, std::move(c), true);
}

Spectrum add(const Spectrum& a, const Spectrum& b) {
  require_same_band(a, b);
  std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.coeffs()[i];
  return Spectrum(a.fc(), std::move(c), a.real_signal() && b.real_signal());
}

Spectrum scale(const Spectrum& a, double gamma) {
  std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
  for (auto& v : c) v *= gamma;
  return Spectrum(a.fc(), std::move(c), a.real_signal());
}

Spectrum pointwise_mul(const Spectrum& a, const Spectrum& b) {
  require_same_band(a, b);
  std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b.coeffs()[i];
  if (a.real_signal() && b.real_signal()) return Spectrum(a.fc(), hermitian_part(std::move(c)), true);
  return Spectrum(a.fc(), std::move(c), false);
}

Spectrum modulate(const Spectrum& a, double delta) {
  std::vector<cplx> c(a.coeffs().begin(), a.coeffs().end());
  for (int l = -a.fc(); l <= a.fc(); ++l) {
    const double ph = wrap_unit(static_cast<double>(l) * delta);
    c[static_cast<std::size_t>(l + a.fc())] *= std::polar(1.0, -kTwoPi * ph);
  }
  if (a.real_signal()) return Spectrum(a.fc(), hermitian_part(std::move(c)), true);
  return Spectrum(a.fc(), std::move(c), false);
}

std::vector<double> eval_grid(const Spectrum& s, int m) {
  if (!s.real_signal()) throw Error("eval_grid requires a real (Hermitian) spectrum");
  if (m < s.size()) throw Error("grid too coarse: M must be >= 2*fc+1");
  std::vector<cplx> padded(static_cast<std::size_t>(m));
  double l1 = 0.0;
  for (int l = -s.fc(); l <= s.fc(); ++l) {
    const int bin = l >= 0 ? l : m + l;
    padded[static_cast<std::size_t>(bin)] = s[l];
    l1 += std::abs(s[l]);
  }
  const auto values = detail::inverse_dft(padded);
  std::vector<double> out(values.size());
  double worst_imag = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = values[k].real();
    worst_imag = std::max(worst_imag, std::abs(values[k].imag()));
  }
  if (worst_imag > kGridImagTol * l1) {
    throw NumericalError("eval_grid: imaginary residue above tolerance");
  }
  return out;
}

double eval_point(const Spectrum& s, CirclePoint t) {
  if (!s.real_signal()) throw Error("eval_point requires a real (Hermitian) spectrum");
  double acc = s[0].real();
  for (int l = 1; l <= s.fc(); ++l) {
    const double ph = wrap_unit(static_cast<double>(l) * t.value());
    acc += 2.0 * (s[l] * std::polar(1.0, kTwoPi * ph)).real();
  }
  return acc;
}

}  // namespace superres
