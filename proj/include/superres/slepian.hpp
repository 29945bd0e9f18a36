#pragma once

#include <iosfwd>
#include <vector>

#include "superres/spectral.hpp"

namespace superres {

/// Top discrete prolate spheroidal kernel g_{sigma,N}: a real, even,
/// unit-energy trigonometric polynomial of degree fc that is maximally
/// concentrated on [-sigma, sigma].
class SlepianKernel {
 public:
  [[nodiscard]] int fc() const noexcept { return fc_; }
  [[nodiscard]] int n() const noexcept { return 2 * fc_ + 1; }
  [[nodiscard]] double c() const noexcept { return c_; }
  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  /// Fraction of L2 energy on [-sigma, sigma] (top eigenvalue lambda_0).
  [[nodiscard]] double concentration() const noexcept { return concentration_; }

  /// Fourier coefficients in storage order l = -fc..fc.
  [[nodiscard]] const std::vector<double>& ghat() const noexcept { return ghat_; }
  [[nodiscard]] double ghat(int l) const { return ghat_[static_cast<std::size_t>(l + fc_)]; }

  /// Coefficients as a real-signal Spectrum (for filtering).
  [[nodiscard]] Spectrum spectrum() const;
  /// g(0) = sum_l ghat[l].
  [[nodiscard]] double peak() const noexcept;

 private:
  friend SlepianKernel build_kernel(int fc, double c);
  SlepianKernel(int fc, double c, std::vector<double> ghat, double concentration);

  int fc_;
  double c_;
  double sigma_;
  std::vector<double> ghat_;
  double concentration_;
};

/// Builds the kernel for sigma = c / (2 fc + 1) from the tridiagonal matrix
/// that commutes with the time-concentration operator.
/// Throws Error("sigma out of range") unless 0 < sigma < 1/2.
[[nodiscard]] SlepianKernel build_kernel(int fc, double c);

/// Symmetric tridiagonal matrix commuting with the concentration operator
/// for half-width w, as (diagonal, off-diagonal) of lengths n and n-1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;
};
[[nodiscard]] Tridiagonal commuting_tridiagonal(int n, double w);

/// sum_{l,m} v[l] v[m] sin(2 pi w (l-m)) / (pi (l-m)), diagonal 2w.
[[nodiscard]] double sinc_rayleigh_quotient(const std::vector<double>& v, double w);

/// (i 2 pi l) ghat[l]: Fourier coefficients of g'.
[[nodiscard]] std::vector<cplx> kernel_derivative_coeffs(const SlepianKernel& k);

/// Empirical constants of the decay / correlation / flatness behaviour the
/// two phases rely on, measured at the kernel's finite N. Nothing here is a
/// pass/fail test; the criteria are asymptotic.
struct CriteriaReport {
  int fc = 0;
  double sigma = 0.0;
  double g0 = 0.0;                    // g(0)
  double g0_sqrt_sigma = 0.0;         // g(0) * sqrt(sigma)
  double decay_constant = 0.0;        // max_{sigma<=t<=1/2} |g(t)| sin(pi t) sqrt(N)
  double tail_ratio_quarter = 0.0;    // |g(1/4)| / g(0)
  double autocorr_far = 0.0;          // max_{d>=2 sigma} |a(d)| N sin(pi d)
  double crosscorr_far = 0.0;         // max_{d>=2 sigma} |b(d)| sin(pi d)
  double derivcorr_far = 0.0;         // max_{d>=2 sigma} |c(d)| sin(pi d) / N
  double derivative_energy = 0.0;     // ||g'||^2
  double derivative_energy_per_n2 = 0.0;
  double near_curvature = 0.0;        // max_{0<d<=h} (1 - a(d)) / d^2
  double near_slope = 0.0;            // min_{0<d<=h} |b(d)| / (N^2 d)
  double flat_width = 0.0;            // largest h <= sigma with the sign rule on (0, h]
  double self_crosscorr = 0.0;        // |<g, g'>| at zero lag (should vanish)
};

/// a(d) = <g(.-r1), g(.-r2)>, b(d) = <g(.-r1), g'(.-r2)>, c(d) = <g'(.-r1), g'(.-r2)>
/// as functions of d = r1 - r2, evaluated in frequency.
[[nodiscard]] double autocorrelation(const SlepianKernel& k, double d);
[[nodiscard]] double cross_correlation(const SlepianKernel& k, double d);
[[nodiscard]] double derivative_correlation(const SlepianKernel& k, double d);

/// Measures the report on grids of oversample * N points. If `sink` is not
/// null a human-readable summary is written to it.
[[nodiscard]] CriteriaReport check_criteria(const SlepianKernel& k, std::ostream* sink = nullptr,
                                            int oversample = 32);

}  // namespace superres
