#include "superres/phase2.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "superres/error.hpp"

namespace superres {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGramImagTol = 1e-10;
constexpr double kNormalEqImagTol = 1e-9;
constexpr double kRealPartTol = 1e-8;
constexpr double kMinPivot = 1e-8;
constexpr double kBoxSlack = 1e-12;

Eigen::VectorXcd as_vector(const Spectrum& s) {
  Eigen::VectorXcd v(s.size());
  for (int i = 0; i < s.size(); ++i) v[i] = s.coeffs()[static_cast<std::size_t>(i)];
  return v;
}

// Real part of a quantity that is real in exact arithmetic. `bound` is an
// a-priori magnitude bound used when the value itself is close to zero.
template <typename Derived>
auto checked_real(const Eigen::MatrixBase<Derived>& m, double bound, double tol, const char* what) {
  const double imag = m.imag().cwiseAbs().maxCoeff();
  const double scale = std::max(m.real().cwiseAbs().maxCoeff(), bound);
  if (imag > tol * scale) {
    throw NumericalError(std::string("non-real ") + what + ": imaginary residue " + std::to_string(imag) +
                         " vs scale " + std::to_string(scale));
  }
  return m.real().eval();
}

double step_norm(const Positions& a, const Positions& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = signed_offset(a[i], b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

// rho - lambda v clamped onto the box, in each center's local offset coordinate.
Positions step_in_box(const Positions& rho, const Eigen::VectorXd& v, double lambda, const BoxConstraint& box) {
  Positions out(rho.size());
  const double rad = box.radius();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const CirclePoint c = box.center()[i];
    const double o = signed_offset(rho[i], c) - lambda * v[static_cast<Eigen::Index>(i)];
    out[i] = shift(c, std::clamp(o, -rad, rad));
  }
  return out;
}

void require_match(const SlepianKernel& kernel, const Spectrum& zhat) {
  if (kernel.fc() != zhat.fc()) throw Error("phase2: kernel and spectrum cut-off differ");
}

}  // namespace

DictionaryMatrix::DictionaryMatrix(const Positions& rho, const SlepianKernel& kernel) : rho_(rho) {
  const int n = kernel.n();
  const int fc = kernel.fc();
  const auto k = static_cast<Eigen::Index>(rho.size());
  if (k > 1 && separation(rho) <= 0.0) throw NumericalError("degenerate dictionary: repeated positions");

  freqs_.resize(n);
  for (int l = -fc; l <= fc; ++l) freqs_[l + fc] = l;

  g_.resize(n, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double r = rho[static_cast<std::size_t>(i)].value();
    for (int l = -fc; l <= fc; ++l) {
      const double ph = wrap_unit(static_cast<double>(l) * r);
      g_(l + fc, i) = kernel.ghat(l) * std::polar(1.0, -kTwoPi * ph);
    }
  }
  const Eigen::MatrixXcd gram_c = g_.adjoint() * g_;
  gram_ = checked_real(gram_c, 1.0, kGramImagTol, "Gram matrix");
  gram_ = (0.5 * (gram_ + gram_.transpose())).eval();
  chol_.compute(gram_);
  if (chol_.info() != Eigen::Success) throw NumericalError("degenerate dictionary: Gram matrix not positive definite");
  if (k > 0) {
    const Eigen::MatrixXd lower = chol_.matrixL();
    const double min_pivot = lower.diagonal().cwiseAbs2().minCoeff();
    if (min_pivot < kMinPivot) throw NumericalError("degenerate dictionary: Gram matrix numerically singular");
  }
}

DictionaryMatrix build_G(const Positions& rho, const SlepianKernel& kernel) { return DictionaryMatrix(rho, kernel); }

double orthonormality_defect(const DictionaryMatrix& d) {
  const auto k = d.cols();
  if (k == 0) return 0.0;
  const Eigen::MatrixXd e = Eigen::MatrixXd::Identity(k, k) - d.gram();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

BoxConstraint::BoxConstraint(Positions center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius > 0.0 && radius < 0.25)) throw Error("box radius must lie in (0, 1/4)");
  if (center_.size() > 1 && separation(center_) <= 2.0 * radius) {
    throw Error("box centers must be more than 2*radius apart");
  }
}

Eigen::VectorXd least_squares_beta(const DictionaryMatrix& d, const Spectrum& zhat) {
  if (!zhat.real_signal()) throw Error("least squares requires a real (Hermitian) spectrum");
  if (zhat.size() != d.G().rows()) throw Error("phase2: spectrum length does not match dictionary");
  const Eigen::VectorXcd z = as_vector(zhat);
  const Eigen::VectorXcd b = d.G().adjoint() * z;
  // |b_i| <= sum_l |ghat[l]| |z[l]|, the same for every column.
  double bound = 0.0;
  if (d.cols() > 0) {
    for (Eigen::Index l = 0; l < z.size(); ++l) bound += std::abs(d.G()(l, 0)) * std::abs(z[l]);
  }
  const double imag = d.cols() > 0 ? b.imag().cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max(d.cols() > 0 ? b.real().cwiseAbs().maxCoeff() : 0.0, bound);
  if (imag > kNormalEqImagTol * scale) throw NumericalError("non-real normal equations");
  return d.gram_chol().solve(b.real());
}

Evaluation evaluate(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat, bool with_hessian) {
  require_match(kernel, zhat);
  const DictionaryMatrix d(rho, kernel);
  const Eigen::MatrixXcd& g = d.G();
  const Eigen::VectorXcd z = as_vector(zhat);

  Evaluation ev;
  ev.beta = least_squares_beta(d, zhat);
  const Eigen::VectorXcd r = z - g * ev.beta.cast<cplx>();
  ev.F = r.squaredNorm();

  // L = diag(i 2 pi l).
  const Eigen::VectorXcd lv = (kTwoPi * d.freqs()).cast<cplx>() * cplx(0.0, 1.0);
  const Eigen::VectorXd gabs = g.rows() > 0 && g.cols() > 0 ? g.col(0).cwiseAbs().eval() : Eigen::VectorXd();
  const Eigen::VectorXd labs = lv.cwiseAbs();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(d.cols());
  if (d.cols() > 0) {
    const Eigen::VectorXcd lr = lv.cwiseProduct(r);
    // r carries rounding of order eps * |z|, so bound with |r| + |z|.
    const double bound = gabs.dot(labs.cwiseProduct(r.cwiseAbs() + z.cwiseAbs()));
    u = checked_real(g.adjoint() * lr, bound, kRealPartTol, "gradient");
  }
  ev.gradient = -2.0 * ev.beta.cwiseProduct(u);

  if (with_hessian) {
    const auto k = d.cols();
    ev.hessian = Eigen::MatrixXd::Zero(k, k);
    if (k > 0) {
      const Eigen::VectorXcd l2 = lv.cwiseProduct(lv);
      const Eigen::VectorXd g2 = gabs.cwiseAbs2();
      const Eigen::MatrixXd a1 =
          checked_real(g.adjoint() * lv.asDiagonal() * g, g2.dot(labs), kRealPartTol, "G*LG");
      const Eigen::MatrixXd a1_star =
          checked_real(g.adjoint() * lv.conjugate().asDiagonal() * g, g2.dot(labs), kRealPartTol, "G*L*G");
      const Eigen::MatrixXd a2 =
          checked_real(g.adjoint() * l2.asDiagonal() * g, g2.dot(labs.cwiseAbs2()), kRealPartTol, "G*L^2G");
      const Eigen::VectorXcd l2r = l2.cwiseProduct(r);
      const Eigen::VectorXd w2 =
          checked_real(g.adjoint() * l2r, gabs.dot(labs.cwiseAbs2().cwiseProduct(r.cwiseAbs() + z.cwiseAbs())),
                       kRealPartTol, "G*L^2 r");

      const auto db = ev.beta.asDiagonal();
      const Eigen::MatrixXd du = u.asDiagonal();
      const Eigen::MatrixXd left = db * a1 - du;
      const Eigen::MatrixXd right = a1_star * db - du;
      Eigen::MatrixXd h = -2.0 * (db * a2 * db);
      h -= 2.0 * Eigen::MatrixXd(ev.beta.cwiseProduct(w2).asDiagonal());
      h -= 2.0 * left * d.gram_chol().solve(right);

      const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
      const double hmax = h.cwiseAbs().maxCoeff();
      if (asym > kRealPartTol * std::max(hmax, 1e-300)) {
        throw NumericalError("Hessian asymmetry residue " + std::to_string(asym) + " above tolerance");
      }
      ev.hessian = 0.5 * (h + h.transpose());
    }
  }
  return ev;
}

double objective_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat) {
  return evaluate(rho, kernel, zhat, false).F;
}

Eigen::VectorXd gradient_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat) {
  return evaluate(rho, kernel, zhat, false).gradient;
}

Eigen::MatrixXd hessian_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat) {
  return evaluate(rho, kernel, zhat, true).hessian;
}

std::vector<int> eps_active_set(const Positions& rho, const BoxConstraint& box, double eps) {
  if (rho.size() != box.size()) throw Error("active set: dimension mismatch");
  std::vector<int> active;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = wrap_dist(rho[i], box.center()[i]);
    if (d > box.radius() + kBoxSlack) throw Error("active set: point outside the box");
    if (d >= box.radius() - eps - kBoxSlack) active.push_back(static_cast<int>(i));
  }
  return active;
}

Eigen::MatrixXd reduced_hessian(const Eigen::MatrixXd& h, const std::vector<int>& active) {
  Eigen::MatrixXd r = h;
  for (int i : active) {
    r.row(i).setZero();
    r.col(i).setZero();
    r(i, i) = 1.0;
  }
  return r;
}

Positions project_box(const Positions& rho, const BoxConstraint& box) {
  if (rho.size() != box.size()) throw Error("projection: dimension mismatch");
  Positions out(rho.size());
  const double rad = box.radius();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const CirclePoint c = box.center()[i];
    const double s = signed_offset(rho[i], c);
    if (std::abs(s) <= rad) {
      out[i] = rho[i];
    } else {
      // signed_offset returns -1/2 for the antipode; send it to c + radius.
      out[i] = shift(c, (s > 0.0 || s == -0.5) ? rad : -rad);
    }
  }
  return out;
}

std::string_view to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::HessianNotPD: return "HessianNotPD";
    case SolveStatus::LineSearchFailed: return "LineSearchFailed";
  }
  return "Unknown";
}

double stationarity_residual(const Positions& rho, const Eigen::VectorXd& gradient, const BoxConstraint& box) {
  double s2 = 0.0;
  const double rad = box.radius();
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double off = signed_offset(rho[i], box.center()[i]);
    double gi = gradient[static_cast<Eigen::Index>(i)];
    if (off >= rad - kBoxSlack) {
      gi = std::max(gi, 0.0);  // may only move down
    } else if (off <= -rad + kBoxSlack) {
      gi = std::min(gi, 0.0);  // may only move up
    }
    s2 += gi * gi;
  }
  return std::sqrt(s2);
}

double stationarity_residual(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat,
                             const BoxConstraint& box) {
  return stationarity_residual(rho, gradient_F(rho, kernel, zhat), box);
}

namespace {

void finish(SolveReport& rep, const Positions& tau, const SlepianKernel& kernel, const Spectrum& zhat,
            const BoxConstraint& box) {
  rep.tau_tilde = tau;
  if (tau.empty()) {
    rep.beta = Eigen::VectorXd();
    rep.grad_norm_final = 0.0;
    return;
  }
  const Evaluation ev = evaluate(tau, kernel, zhat, false);
  rep.beta = ev.beta;
  rep.grad_norm_final = ev.gradient.norm();
  rep.active_set_final = eps_active_set(tau, box, 0.0);
}

}  // namespace

SolveReport run_newton(const Positions& tau0, const SlepianKernel& kernel, const Spectrum& zhat,
                       const BoxConstraint& box, NewtonConfig cfg) {
  require_match(kernel, zhat);
  if (tau0.size() != box.size()) throw Error("newton: tau0 and box differ in dimension");
  const auto k = tau0.size();
  const double radius = box.radius();
  if (cfg.eta_stop <= 0.0) cfg.eta_stop = 1e-12 * std::sqrt(static_cast<double>(std::max<std::size_t>(k, 1)));
  if (cfg.eps0 <= 0.0) cfg.eps0 = 0.5 * radius;
  if (!(cfg.eps0 < radius)) throw Error("newton: eps0 must lie in (0, radius)");
  if (!(cfg.armijo_const > 0.0 && cfg.armijo_const < 0.5)) throw Error("newton: armijo constant must lie in (0, 1/2)");

  SolveReport rep;
  Positions tau = project_box(tau0, box);
  if (k == 0) {
    rep.status = SolveStatus::Converged;
    rep.F_trace.push_back(zhat.energy());
    finish(rep, tau, kernel, zhat, box);
    return rep;
  }

  double eps = cfg.eps0;
  Evaluation ev = evaluate(tau, kernel, zhat, true);
  rep.F_trace.push_back(ev.F);
  if (cfg.record_trajectory) rep.trajectory.push_back(tau);
  rep.status = SolveStatus::MaxIter;

  for (int j = 0; j < cfg.max_iter; ++j) {
    const auto active = eps_active_set(tau, box, eps);
    const Eigen::MatrixXd red = reduced_hessian(ev.hessian, active);
    const Eigen::LLT<Eigen::MatrixXd> llt(red);
    if (llt.info() != Eigen::Success) {
      rep.status = SolveStatus::HessianNotPD;
      break;
    }
    const Eigen::VectorXd v = llt.solve(ev.gradient);

    const Positions full = step_in_box(tau, v, 1.0, box);
    const double full_step = step_norm(full, tau);
    if (full_step <= cfg.eta_stop) {
      rep.status = SolveStatus::Converged;
      break;
    }
    eps = std::min(full_step, radius);

    bool accepted = false;
    double lambda = 1.0;
    Positions trial;
    Evaluation trial_ev;
    for (int m = 0; m <= cfg.max_backtracks; ++m, lambda *= 0.5) {
      trial = m == 0 ? full : step_in_box(tau, v, lambda, box);
      const double s = step_norm(trial, tau);
      trial_ev = evaluate(trial, kernel, zhat, false);
      if (trial_ev.F - ev.F <= -cfg.armijo_const / lambda * s * s) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::LineSearchFailed;
      break;
    }
    tau = std::move(trial);
    ev = evaluate(tau, kernel, zhat, true);
    rep.F_trace.push_back(ev.F);
    if (cfg.record_trajectory) rep.trajectory.push_back(tau);
    ++rep.iterations;
  }
  finish(rep, tau, kernel, zhat, box);
  return rep;
}

SolveReport run_gradient_projection(const Positions& tau0, const SlepianKernel& kernel, const Spectrum& zhat,
                                    const BoxConstraint& box, GradientStepRule rule, int max_iter) {
  require_match(kernel, zhat);
  if (tau0.size() != box.size()) throw Error("gradient projection: tau0 and box differ in dimension");
  if (rule.grad_tol <= 0.0) rule.grad_tol = 1e-10 * kernel.n() * std::max(zhat.energy(), 1e-300);

  SolveReport rep;
  Positions tau = project_box(tau0, box);
  if (tau.empty()) {
    rep.status = SolveStatus::Converged;
    rep.F_trace.push_back(zhat.energy());
    finish(rep, tau, kernel, zhat, box);
    return rep;
  }

  Evaluation ev = evaluate(tau, kernel, zhat, false);
  rep.F_trace.push_back(ev.F);
  if (rule.record_trajectory) rep.trajectory.push_back(tau);
  rep.status = SolveStatus::MaxIter;
  double step = rule.initial_step;

  for (int j = 0; j < max_iter; ++j) {
    if (stationarity_residual(tau, ev.gradient, box) <= rule.grad_tol) {
      rep.status = SolveStatus::Converged;
      break;
    }
    bool accepted = false;
    Positions trial;
    Evaluation trial_ev;
    double moved = 0.0;
    for (int m = 0; m <= rule.max_backtracks; ++m, step *= 0.5) {
      trial = step_in_box(tau, ev.gradient, step, box);
      moved = step_norm(trial, tau);
      trial_ev = evaluate(trial, kernel, zhat, false);
      if (trial_ev.F - ev.F <= -rule.armijo_const / step * moved * moved) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = SolveStatus::LineSearchFailed;
      break;
    }
    tau = std::move(trial);
    ev = std::move(trial_ev);
    rep.F_trace.push_back(ev.F);
    if (rule.record_trajectory) rep.trajectory.push_back(tau);
    ++rep.iterations;
    if (moved <= rule.step_tol) {
      rep.status = SolveStatus::Converged;
      break;
    }
    step *= 2.0;  // let the step grow back after a run of backtracks
  }
  finish(rep, tau, kernel, zhat, box);
  return rep;
}

}  // namespace superres
