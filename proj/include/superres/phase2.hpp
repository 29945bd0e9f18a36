#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <string_view>
#include <vector>

#include "superres/slepian.hpp"
#include "superres/spectral.hpp"

namespace superres {

/// G[l, i] = ghat[l] exp(-i 2 pi l rho[i]) with its Gram matrix G^* G
/// (real by symmetry) and the Cholesky factor of the Gram matrix.
class DictionaryMatrix {
 public:
  /// Throws NumericalError("degenerate dictionary") for repeated positions
  /// or a Gram matrix whose Cholesky factor has a pivot below 1e-8.
  DictionaryMatrix(const Positions& rho, const SlepianKernel& kernel);

  [[nodiscard]] const Positions& rho() const noexcept { return rho_; }
  [[nodiscard]] Eigen::Index cols() const noexcept { return g_.cols(); }
  [[nodiscard]] const Eigen::MatrixXcd& G() const noexcept { return g_; }
  [[nodiscard]] const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  [[nodiscard]] const Eigen::LLT<Eigen::MatrixXd>& gram_chol() const noexcept { return chol_; }
  /// Frequencies l = -fc..fc as a column, matching the row order of G.
  [[nodiscard]] const Eigen::VectorXd& freqs() const noexcept { return freqs_; }

 private:
  Positions rho_;
  Eigen::MatrixXcd g_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd freqs_;
};

[[nodiscard]] DictionaryMatrix build_G(const Positions& rho, const SlepianKernel& kernel);

/// Spectral norm of I - G^* G.
[[nodiscard]] double orthonormality_defect(const DictionaryMatrix& d);

/// Coordinate-wise box {rho : d(rho[i], center[i]) <= radius}.
class BoxConstraint {
 public:
  /// Requires 0 < radius < 1/4 and centers pairwise more than 2 radius apart.
  BoxConstraint(Positions center, double radius);

  [[nodiscard]] const Positions& center() const noexcept { return center_; }
  [[nodiscard]] double radius() const noexcept { return radius_; }
  [[nodiscard]] std::size_t size() const noexcept { return center_.size(); }

 private:
  Positions center_;
  double radius_;
};

/// Real amplitudes minimising ||G beta - zhat||.
[[nodiscard]] Eigen::VectorXd least_squares_beta(const DictionaryMatrix& d, const Spectrum& zhat);

/// Everything the solvers need at one point, sharing one factorisation.
struct Evaluation {
  Eigen::VectorXd beta;
  double F = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;  // empty unless requested
};

[[nodiscard]] Evaluation evaluate(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat,
                                  bool with_hessian);

/// F(rho) = ||(I - P_rho) zhat||^2.
[[nodiscard]] double objective_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat);
/// -2 diag(beta) Re(G^* L (I - P_rho) zhat).
[[nodiscard]] Eigen::VectorXd gradient_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat);
/// Four-term analytic Hessian, symmetrised.
[[nodiscard]] Eigen::MatrixXd hessian_F(const Positions& rho, const SlepianKernel& kernel, const Spectrum& zhat);

/// Indices with radius - eps <= d(rho[i], center[i]) <= radius.
/// Throws Error if rho lies outside the box.
[[nodiscard]] std::vector<int> eps_active_set(const Positions& rho, const BoxConstraint& box, double eps);

/// Active rows and columns replaced by those of the identity.
[[nodiscard]] Eigen::MatrixXd reduced_hessian(const Eigen::MatrixXd& h, const std::vector<int>& active);

/// Coordinate-wise clamp onto the box. An exactly antipodal coordinate goes
/// to center + radius.
[[nodiscard]] Positions project_box(const Positions& rho, const BoxConstraint& box);

enum class SolveStatus { Converged, MaxIter, HessianNotPD, LineSearchFailed };

[[nodiscard]] std::string_view to_string(SolveStatus s) noexcept;

struct NewtonConfig {
  double eta_stop = 0.0;      // <= 0 selects 1e-12 * sqrt(K)
  double eps0 = 0.0;          // <= 0 selects radius / 2
  int max_iter = 100;
  double armijo_const = 1e-4;
  int max_backtracks = 40;
  bool record_trajectory = false;
};

struct SolveReport {
  Positions tau_tilde;
  Eigen::VectorXd beta;
  std::vector<double> F_trace;
  double grad_norm_final = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  std::vector<int> active_set_final;
  std::vector<Positions> trajectory;  // iterates, when requested
};

/// Projected Newton refinement of tau0 inside the box.
/// `zhat` must already be filtered by the kernel passed here.
[[nodiscard]] SolveReport run_newton(const Positions& tau0, const SlepianKernel& kernel, const Spectrum& zhat,
                                     const BoxConstraint& box, NewtonConfig cfg = {});

struct GradientStepRule {
  double initial_step = 1.0;
  double armijo_const = 1e-4;
  int max_backtracks = 60;
  double grad_tol = 0.0;      // <= 0 selects 1e-10 * N * ||zhat||^2
  double step_tol = 1e-14;
  bool record_trajectory = false;
};

/// Gradient projection with Armijo backtracking on the step size.
[[nodiscard]] SolveReport run_gradient_projection(const Positions& tau0, const SlepianKernel& kernel,
                                                  const Spectrum& zhat, const BoxConstraint& box,
                                                  GradientStepRule rule = {}, int max_iter = 5000);

/// Norm of the projected gradient: the raw entry for interior coordinates,
/// only the outward-infeasible part for coordinates on the boundary.
[[nodiscard]] double stationarity_residual(const Positions& rho, const SlepianKernel& kernel,
                                           const Spectrum& zhat, const BoxConstraint& box);

/// Same, from an already computed gradient.
[[nodiscard]] double stationarity_residual(const Positions& rho, const Eigen::VectorXd& gradient,
                                           const BoxConstraint& box);

}  // namespace superres
