#include "superres/slepian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "superres/error.hpp"

namespace superres {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

SlepianKernel::SlepianKernel(int fc, double c, std::vector<double> ghat, double concentration)
    : fc_(fc),
      c_(c),
      sigma_(c / static_cast<double>(2 * fc + 1)),
      ghat_(std::move(ghat)),
      concentration_(concentration) {}

Spectrum SlepianKernel::spectrum() const {
  std::vector<cplx> c(ghat_.begin(), ghat_.end());
  return Spectrum(fc_, std::move(c), true);
}

double SlepianKernel::peak() const noexcept {
  double s = 0.0;
  for (double g : ghat_) s += g;
  return s;
}

Tridiagonal commuting_tridiagonal(int n, double w) {
  Tridiagonal t;
  t.diag.resize(static_cast<std::size_t>(n));
  t.offdiag.resize(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  const double cw = std::cos(kTwoPi * w);
  const double half = 0.5 * static_cast<double>(n - 1);
  for (int k = 0; k < n; ++k) {
    const double x = half - k;
    t.diag[static_cast<std::size_t>(k)] = x * x * cw;
  }
  for (int k = 1; k < n; ++k) {
    t.offdiag[static_cast<std::size_t>(k - 1)] = 0.5 * k * static_cast<double>(n - k);
  }
  return t;
}

double sinc_rayleigh_quotient(const std::vector<double>& v, double w) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  // The Gram matrix is Toeplitz: accumulate by lag.
  double acc = 0.0;
  for (std::ptrdiff_t lag = 0; lag < n; ++lag) {
    const double a = lag == 0 ? 2.0 * w : std::sin(kTwoPi * w * lag) / (kPi * lag);
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i + lag < n; ++i) s += v[i] * v[i + lag];
    acc += (lag == 0 ? 1.0 : 2.0) * a * s;
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  return acc / norm2;
}

SlepianKernel build_kernel(int fc, double c) {
  if (fc < 1) throw Error("cut-off frequency must be >= 1");
  const int n = 2 * fc + 1;
  const double sigma = c / n;
  if (!(sigma > 0.0 && sigma < 0.5)) throw Error("sigma out of range: need 0 < c/N < 1/2");

  const Tridiagonal t = commuting_tridiagonal(n, sigma);
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(t.diag.data(), n);
  Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(t.offdiag.data(), n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");

  // The eigenvalue order of the commuting matrix is not used directly: pick
  // the eigenvector with the largest concentration.
  std::vector<double> best;
  double best_q = -std::numeric_limits<double>::infinity();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int j = n - 1; j >= 0; --j) {
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = es.eigenvectors()(k, j);
    const double q = sinc_rayleigh_quotient(v, sigma);
    if (q > best_q) {
      best_q = q;
      best = v;
    }
  }

  std::vector<double> ghat(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const auto j = static_cast<std::size_t>(n - 1 - k);
    ghat[i] = 0.5 * (best[i] + best[j]);
  }
  double norm2 = 0.0;
  double dc = 0.0;
  for (double g : ghat) {
    norm2 += g * g;
    dc += g;
  }
  if (norm2 == 0.0) throw NumericalError("top concentration eigenvector is odd");
  const double scale = (dc < 0.0 ? -1.0 : 1.0) / std::sqrt(norm2);
  for (auto& g : ghat) g *= scale;
  // Evenness must be exact after scaling.
  for (int k = 0; k < fc; ++k) ghat[static_cast<std::size_t>(n - 1 - k)] = ghat[static_cast<std::size_t>(k)];

  const double conc = sinc_rayleigh_quotient(ghat, sigma);
  return SlepianKernel(fc, c, std::move(ghat), conc);
}

std::vector<cplx> kernel_derivative_coeffs(const SlepianKernel& k) {
  std::vector<cplx> out(static_cast<std::size_t>(k.n()));
  for (int l = -k.fc(); l <= k.fc(); ++l) {
    out[static_cast<std::size_t>(l + k.fc())] = cplx(0.0, kTwoPi * l * k.ghat(l));
  }
  return out;
}

double autocorrelation(const SlepianKernel& k, double d) {
  double acc = k.ghat(0) * k.ghat(0);
  for (int l = 1; l <= k.fc(); ++l) acc += 2.0 * k.ghat(l) * k.ghat(l) * std::cos(kTwoPi * l * d);
  return acc;
}

double cross_correlation(const SlepianKernel& k, double d) {
  double acc = 0.0;
  for (int l = 1; l <= k.fc(); ++l) {
    acc -= 2.0 * kTwoPi * l * k.ghat(l) * k.ghat(l) * std::sin(kTwoPi * l * d);
  }
  return acc;
}

double derivative_correlation(const SlepianKernel& k, double d) {
  double acc = 0.0;
  for (int l = 1; l <= k.fc(); ++l) {
    const double w = kTwoPi * l;
    acc += 2.0 * w * w * k.ghat(l) * k.ghat(l) * std::cos(kTwoPi * l * d);
  }
  return acc;
}

CriteriaReport check_criteria(const SlepianKernel& k, std::ostream* sink, int oversample) {
  CriteriaReport r;
  const int n = k.n();
  const int m = oversample * n;
  const double sigma = k.sigma();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  r.fc = k.fc();
  r.sigma = sigma;
  r.g0 = k.peak();
  r.g0_sqrt_sigma = r.g0 * std::sqrt(sigma);

  const auto g = eval_grid(k.spectrum(), m);
  for (int i = 0; i <= m / 2; ++i) {
    const double t = static_cast<double>(i) / m;
    if (t < sigma) continue;
    r.decay_constant = std::max(r.decay_constant, std::abs(g[static_cast<std::size_t>(i)]) * std::sin(kPi * t) * sqrt_n);
  }
  r.tail_ratio_quarter = std::abs(eval_point(k.spectrum(), CirclePoint(0.25))) / r.g0;

  for (int i = 0; i <= m / 2; ++i) {
    const double d = static_cast<double>(i) / m;
    if (d < 2.0 * sigma) continue;
    const double s = std::sin(kPi * d);
    r.autocorr_far = std::max(r.autocorr_far, std::abs(autocorrelation(k, d)) * n * s);
    r.crosscorr_far = std::max(r.crosscorr_far, std::abs(cross_correlation(k, d)) * s);
    r.derivcorr_far = std::max(r.derivcorr_far, std::abs(derivative_correlation(k, d)) * s / n);
  }

  r.derivative_energy = derivative_correlation(k, 0.0);
  r.derivative_energy_per_n2 = r.derivative_energy / (static_cast<double>(n) * n);
  r.self_crosscorr = std::abs(cross_correlation(k, 0.0));

  // Flatness near the origin, probed on a fine lag grid in (0, sigma].
  constexpr int kNearSteps = 400;
  r.near_slope = std::numeric_limits<double>::infinity();
  r.flat_width = 0.0;
  for (int i = 1; i <= kNearSteps; ++i) {
    const double d = sigma * i / kNearSteps;
    const double b = cross_correlation(k, d);
    if (!(b < 0.0)) break;  // sign(b) must equal sign(d - 1/2) < 0
    r.flat_width = d;
    r.near_curvature = std::max(r.near_curvature, (1.0 - autocorrelation(k, d)) / (d * d));
    r.near_slope = std::min(r.near_slope, std::abs(b) / (static_cast<double>(n) * n * d));
  }
  if (r.flat_width == 0.0) r.near_slope = 0.0;

  if (sink != nullptr) {
    auto& os = *sink;
    os << "fc " << r.fc << " sigma " << r.sigma << " concentration " << k.concentration() << '\n'
       << "g(0) " << r.g0 << "  g(0)*sqrt(sigma) " << r.g0_sqrt_sigma << '\n'
       << "decay |g(t)| sin(pi t) sqrt(N), t>=sigma: " << r.decay_constant << '\n'
       << "|g(1/4)|/g(0): " << r.tail_ratio_quarter << '\n'
       << "far autocorr * N sin(pi d): " << r.autocorr_far << '\n'
       << "far cross-corr * sin(pi d): " << r.crosscorr_far << '\n'
       << "far deriv-corr * sin(pi d) / N: " << r.derivcorr_far << '\n'
       << "||g'||^2 / N^2: " << r.derivative_energy_per_n2 << '\n'
       << "near (1-a(d))/d^2 max: " << r.near_curvature << '\n'
       << "near |b(d)|/(N^2 d) min: " << r.near_slope << '\n'
       << "sign-rule width h: " << r.flat_width << '\n';
  }
  return r;
}

}  // namespace superres
