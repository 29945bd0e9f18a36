#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"
#include "superres/error.hpp"
#include "superres/phase1.hpp"
#include "superres/phase2.hpp"

using namespace superres;

namespace {
const std::vector<double> kTau{0.2995, 0.3663, 0.4332, 0.5000, 0.5668, 0.6337, 0.7005};
const std::vector<double> kAlpha{10, -1, 1, -3, 2, -5, 2};

struct Setup {
  SlepianKernel k1 = build_kernel(50, 1.5);
  SlepianKernel k2 = build_kernel(50, 2.25);
};

const Setup& kernels() {
  static const Setup s;
  return s;
}

Spectrum filtered(const SlepianKernel& k2, const SpikeTrain& x, double nu = 0.0, std::uint64_t seed = 0) {
  Spectrum y = spike_fourier(x, k2.fc());
  if (nu > 0.0) y = add(y, synth_noise(k2.fc(), nu, seed));
  return pointwise_mul(k2.spectrum(), y);
}

Eigen::VectorXd as_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

double alpha_sq(const std::vector<double>& a) { return as_eigen(a).squaredNorm(); }

// Random instance with sep >= 4 sigma1 and |alpha| in [1, dyn].
props::Instance instance(Xoshiro256& rng, int k, double dyn = 10.0) {
  return props::phase1_instance(rng, 50, kernels().k1.sigma(), k, dyn);
}

Positions jitter(Xoshiro256& rng, const Positions& t, double r) {
  Positions out;
  for (auto p : t) out.push_back(shift(p, r * (2.0 * rng.uniform() - 1.0)));
  return out;
}
}  // namespace

TEST_CASE("build_G: unit columns and Gram against quadrature") {
  const auto& k2 = kernels().k2;
  const DictionaryMatrix one = build_G(make_positions(std::vector<double>{0.37}), k2);
  REQUIRE(one.gram().rows() == 1);
  CHECK(std::fabs(one.gram()(0, 0) - 1.0) < 1e-12);

  const std::vector<double> rho{0.1, 0.13, 0.5, 0.93};
  const DictionaryMatrix d = build_G(make_positions(rho), k2);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::fabs(d.gram()(i, i) - 1.0) < 1e-12);
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const double ri = rho[static_cast<std::size_t>(i)], rj = rho[static_cast<std::size_t>(j)];
      const double q = oracle::integrate(
          [&](double t) {
            return static_cast<double>(oracle::kernel_value(k2, t - ri) * oracle::kernel_value(k2, t - rj));
          },
          0.0, 1.0, 256);
      CHECK(std::fabs(d.gram()(i, j) - q) < 1e-8);
    }
  }
  // G agrees with the long-double dictionary
  CHECK((d.G() - oracle::dictionary(make_positions(rho), k2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_G: degenerate dictionaries") {
  const auto& k2 = kernels().k2;
  CHECK_THROWS_WITH_AS((void)build_G(make_positions(std::vector<double>{0.2, 0.2}), k2),
                       doctest::Contains("degenerate dictionary"), NumericalError);
  CHECK_THROWS_WITH_AS((void)build_G(make_positions(std::vector<double>{0.2, 0.2 + 1e-6}), k2),
                       doctest::Contains("degenerate dictionary"), NumericalError);
}

TEST_CASE("least_squares_beta") {
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum z = filtered(k2, x);
  const DictionaryMatrix d = build_G(x.positions, k2);
  CHECK((least_squares_beta(d, z) - as_eigen(kAlpha)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(least_squares_beta(d, Spectrum::zeros(50)).cwiseAbs().maxCoeff() == 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Xoshiro256 rng(seed + 40);
    const Positions rho = make_positions(oracle::rejection_positions(3, 0.05, rng));
    const Spectrum zr = oracle::random_real_spectrum(50, seed + 41);
    const Eigen::VectorXd ref = (oracle::pinv(oracle::dictionary(rho, k2)) * oracle::as_vector(zr)).real();
    CHECK((least_squares_beta(build_G(rho, k2), zr) - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("objective_F") {
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum z = filtered(k2, x);
  CHECK(objective_F(x.positions, k2, z) <= 1e-18 * alpha_sq(kAlpha));
  CHECK(objective_F(x.positions, k2, Spectrum::zeros(50)) == 0.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Xoshiro256 rng(seed + 50);
    const Positions rho = make_positions(oracle::rejection_positions(4, 0.05, rng));
    const Spectrum zr = oracle::random_real_spectrum(50, seed + 51);
    const double f = objective_F(rho, k2, zr);
    CHECK(f >= 0.0);
    CHECK(f == doctest::Approx(oracle::projector_objective(rho, k2, zr)).epsilon(1e-9));
  }
}

TEST_CASE("gradient_F: zero at the truth and odd under reflection") {
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum z = filtered(k2, x);
  const Eigen::VectorXd g = gradient_F(x.positions, k2, z);
  CHECK(g.cwiseAbs().maxCoeff() <= 1e-8 * k2.n() * alpha_sq(kAlpha));

  const SpikeTrain one{make_positions(std::vector<double>{0.4}), {1.5}};
  const Spectrum z1 = filtered(k2, one);
  for (double off : {0.2, 0.5, 0.9}) {
    const double d = off * k2.sigma();
    const double gp = gradient_F({shift(one.positions[0], d)}, k2, z1)[0];
    const double gm = gradient_F({shift(one.positions[0], -d)}, k2, z1)[0];
    CHECK(gp > 0.0);
    CHECK(gm < 0.0);
    CHECK(gp == doctest::Approx(-gm).epsilon(1e-8));
  }
}

TEST_CASE("gradient_F matches central differences on 100 instances") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(60);
  const int sizes[] = {1, 3, 7};
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto in = instance(rng, sizes[i % 3]);
    const Spectrum z = filtered(k2, in.x, 0.05, rng());
    const Positions rho = jitter(rng, in.x.positions, k1.sigma());
    const Eigen::VectorXd g = gradient_F(rho, k2, z);
    const double h = 1e-7 * k2.sigma();
    Eigen::VectorXd fd(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) {
      Positions p = rho, m = rho;
      p[static_cast<std::size_t>(j)] = shift(rho[static_cast<std::size_t>(j)], h);
      m[static_cast<std::size_t>(j)] = shift(rho[static_cast<std::size_t>(j)], -h);
      fd[j] = (objective_F(p, k2, z) - objective_F(m, k2, z)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-300));
  }
  MESSAGE("worst gradient relative error " << worst);
  CHECK(worst <= 1e-5);
}

TEST_CASE("hessian_F: noise-free at the truth") {
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum z = filtered(k2, x);
  const Eigen::MatrixXd h = hessian_F(x.positions, k2, z);
  CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Gauss-Newton form 2 D Re(G^* L (I - P) L^* G) D with an explicit projector
  const Eigen::MatrixXcd g = oracle::dictionary(x.positions, k2);
  Eigen::VectorXcd lstar(k2.n());
  for (int l = -50; l <= 50; ++l) lstar[l + 50] = cplx(0.0, -2.0 * std::numbers::pi * l);
  const Eigen::MatrixXcd dg = lstar.asDiagonal() * g;
  const Eigen::MatrixXcd proj = g * oracle::pinv(g);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(k2.n(), k2.n());
  const Eigen::MatrixXd inner = (dg.adjoint() * (id - proj) * dg).real();
  const Eigen::VectorXd a = as_eigen(kAlpha);
  const Eigen::MatrixXd ref = 2.0 * a.asDiagonal() * inner * a.asDiagonal();
  CHECK((h - ref).norm() <= 1e-8 * ref.norm());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const double amin = as_eigen(kAlpha).cwiseAbs().minCoeff();
  // measured ratio min eig / (N^2 min alpha^2) is about 1.41 here
  CHECK(es.eigenvalues().minCoeff() > 1.0 * k2.n() * k2.n() * amin * amin);

  const SpikeTrain one{make_positions(std::vector<double>{0.61}), {-0.7}};
  CHECK(hessian_F(one.positions, k2, filtered(k2, one))(0, 0) > 0.0);
}

TEST_CASE("hessian_F matches central differences of the gradient on 50 instances") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(61);
  const int sizes[] = {1, 3, 7};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto in = instance(rng, sizes[i % 3]);
    const Spectrum z = filtered(k2, in.x, 0.05, rng());
    const Positions rho = jitter(rng, in.x.positions, k1.sigma());
    const Eigen::MatrixXd h = hessian_F(rho, k2, z);
    const double step = 1e-6 * k2.sigma();
    Eigen::MatrixXd fd(h.rows(), h.cols());
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      Positions p = rho, m = rho;
      p[static_cast<std::size_t>(j)] = shift(rho[static_cast<std::size_t>(j)], step);
      m[static_cast<std::size_t>(j)] = shift(rho[static_cast<std::size_t>(j)], -step);
      fd.col(j) = (gradient_F(p, k2, z) - gradient_F(m, k2, z)) / (2.0 * step);
    }
    const Eigen::MatrixXd fds = 0.5 * (fd + fd.transpose());
    worst = std::max(worst, (h - fds).norm() / fds.norm());
  }
  MESSAGE("worst Hessian relative error " << worst);
  CHECK(worst <= 1e-4);
}

TEST_CASE("property: Hessian is positive definite within half a box of the truth") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(62);
  int pd = 0;
  for (int i = 0; i < 50; ++i) {
    const auto in = instance(rng, 1 + i % 7);
    const Spectrum z = filtered(k2, in.x);
    const Positions rho = jitter(rng, in.x.positions, 0.5 * k1.sigma());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian_F(rho, k2, z));
    if (es.eigenvalues().minCoeff() > 0.0) ++pd;
  }
  CHECK(pd == 50);
}

TEST_CASE("near-orthonormality of separated dictionaries") {
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(63);
  for (int i = 0; i < 10; ++i) {
    const Positions rho = make_positions(oracle::rejection_positions(5, 4.0 * k2.sigma(), rng));
    const DictionaryMatrix d = build_G(rho, k2);
    CHECK(orthonormality_defect(d) == doctest::Approx(oracle::orthonormality_defect(rho, k2)).epsilon(1e-9).scale(1e-12));
    CHECK(orthonormality_defect(d) < 0.5);
  }
}

TEST_CASE("BoxConstraint validation") {
  const Positions c = make_positions(std::vector<double>{0.1, 0.5});
  CHECK_NOTHROW(BoxConstraint(c, 0.1));
  CHECK_THROWS_AS(BoxConstraint(c, 0.0), Error);
  CHECK_THROWS_AS(BoxConstraint(c, 0.25), Error);
  CHECK_THROWS_AS(BoxConstraint(c, 0.21), Error);  // boxes overlap
}

TEST_CASE("eps_active_set") {
  const double r = 0.01;
  const Positions c = make_positions(std::vector<double>{0.1, 0.3, 0.99});
  const BoxConstraint box(c, r);
  CHECK(eps_active_set(c, box, 0.0).empty());
  Positions rho = c;
  rho[1] = shift(c[1], r);
  CHECK(eps_active_set(rho, box, 0.0) == std::vector<int>{1});
  rho[2] = shift(c[2], r * 1.5);
  CHECK_THROWS_AS((void)eps_active_set(rho, box, 0.0), Error);

  Xoshiro256 rng(70);
  for (int t = 0; t < 200; ++t) {
    const Positions p = jitter(rng, c, r);
    for (double eps : {0.0, 0.3 * r, r}) {
      std::vector<int> ref;
      for (int i = 0; i < 3; ++i) {
        const double d = wrap_dist(p[static_cast<std::size_t>(i)], c[static_cast<std::size_t>(i)]);
        if (d >= r - eps && d <= r) ref.push_back(i);
      }
      CHECK(eps_active_set(p, box, eps) == ref);
    }
    CHECK(eps_active_set(p, box, r).size() == 3);
  }
}

TEST_CASE("reduced_hessian") {
  Eigen::MatrixXd h(3, 3);
  h << 4, 1, 2, 1, 5, 3, 2, 3, 6;
  CHECK(reduced_hessian(h, {}) == h);
  CHECK(reduced_hessian(h, {0, 1, 2}) == Eigen::MatrixXd::Identity(3, 3));
  const Eigen::MatrixXd r = reduced_hessian(h, {1});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double ref = (i == 1 || j == 1) ? (i == j ? 1.0 : 0.0) : h(i, j);
      CHECK(r(i, j) == ref);
    }
  }
}

TEST_CASE("project_box") {
  const double r = 0.02;
  const Positions c = make_positions(std::vector<double>{0.1, 0.4, 0.99});
  const BoxConstraint box(c, r);
  const Positions inside{shift(c[0], 0.5 * r), c[1], shift(c[2], -r)};
  const Positions pi = project_box(inside, box);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pi[i].value() == inside[i].value());

  const Positions out{shift(c[0], 2 * r), shift(c[1], -2 * r), shift(c[2], 0.5)};
  const Positions po = project_box(out, box);
  CHECK(wrap_sub(po[0], shift(c[0], r)) == doctest::Approx(0.0).scale(1.0));
  CHECK(signed_offset(po[0], c[0]) == doctest::Approx(r));
  CHECK(signed_offset(po[1], c[1]) == doctest::Approx(-r));
  CHECK(signed_offset(po[2], c[2]) == doctest::Approx(r));  // antipodal tie goes to center + radius
}

TEST_CASE("stationarity_residual examples") {
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(std::vector<double>{0.3}), {2.0}};
  const Spectrum z = filtered(k2, x);
  const BoxConstraint box_in(x.positions, 0.01);
  CHECK(stationarity_residual(x.positions, k2, z, box_in) <= 1e-8 * k2.n() * 4.0);

  // truth right of the box: the gradient at the right boundary points left (descent is outward)
  const Positions center{shift(x.positions[0], -0.015)};
  const BoxConstraint box(center, 0.01);
  const Positions edge{shift(center[0], 0.01)};
  const Eigen::VectorXd g = gradient_F(edge, k2, z);
  REQUIRE(g[0] < 0.0);
  CHECK(stationarity_residual(edge, g, box) == 0.0);
  // and away from the boundary it is the raw magnitude
  const Positions mid{center[0]};
  CHECK(stationarity_residual(mid, k2, z, box) == doctest::Approx(std::fabs(gradient_F(mid, k2, z)[0])));

  Eigen::VectorXd up(1);
  up << 3.0;
  CHECK(stationarity_residual(edge, up, box) == doctest::Approx(3.0));
  const Positions low{shift(center[0], -0.01)};
  CHECK(stationarity_residual(low, up, box) == 0.0);
  Eigen::VectorXd down(1);
  down << -2.0;
  CHECK(stationarity_residual(low, down, box) == doctest::Approx(2.0));
}

TEST_CASE("run_newton: worked example to machine precision") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum y = spike_fourier(x, 50);
  Phase1Config p1;
  p1.max_peaks = 7;
  const auto ph1 = run_phase1(y, k1, p1);
  REQUIRE(ph1.k_tilde == 7);
  const BoxConstraint box(ph1.tau0, k1.sigma());
  const auto rep = run_newton(ph1.tau0, k2, pointwise_mul(k2.spectrum(), y), box);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(hausdorff(rep.tau_tilde, x.positions) <= 1e-9);
  // beta follows the order of tau0, which is by peak height
  for (std::size_t i = 0; i < 7; ++i) {
    std::size_t j = 0;
    for (std::size_t t = 0; t < 7; ++t) {
      if (wrap_dist(rep.tau_tilde[i], x.positions[t]) < 1e-6) j = t;
    }
    CHECK(std::fabs(rep.beta[static_cast<Eigen::Index>(i)] - kAlpha[j]) <= 1e-8);
  }
  CHECK(rep.iterations <= 10);
}

TEST_CASE("run_newton: starting at the solution") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum z = filtered(k2, x);
  const auto rep = run_newton(x.positions, k2, z, BoxConstraint(x.positions, k1.sigma()));
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(rep.iterations <= 2);
  CHECK(rep.F_trace.back() <= 1e-18 * alpha_sq(kAlpha));
}

TEST_CASE("run_newton: single spike offset by half a box") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(std::vector<double>{0.7}), {1.3}};
  const Spectrum z = filtered(k2, x);
  const Positions tau0{shift(x.positions[0], 0.5 * k1.sigma())};
  const BoxConstraint box(tau0, k1.sigma());
  const auto rep = run_newton(tau0, k2, z, box);
  CHECK(rep.status == SolveStatus::Converged);
  CHECK(wrap_dist(rep.tau_tilde[0], x.positions[0]) <= 1e-10);
  // independent dense scan of F over the box
  const double t0 = tau0[0].value();
  const double best = oracle::scan_minimise(
      [&](double t) { return objective_F({CirclePoint(t)}, k2, z); }, t0 - k1.sigma(), t0 + k1.sigma());
  CHECK(wrap_dist(rep.tau_tilde[0], CirclePoint(best)) <= 1e-7);
}

TEST_CASE("NewtonConfig errors") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  const Positions t = make_positions(std::vector<double>{0.3});
  const BoxConstraint box(t, k1.sigma());
  const Spectrum z = Spectrum::zeros(50);
  NewtonConfig bad;
  bad.eps0 = 2.0 * k1.sigma();
  CHECK_THROWS_AS((void)run_newton(t, k2, z, box, bad), Error);
  NewtonConfig arm;
  arm.armijo_const = 0.7;
  CHECK_THROWS_AS((void)run_newton(t, k2, z, box, arm), Error);
  CHECK_THROWS_AS((void)run_newton(t, k2, Spectrum::zeros(20), box), Error);
  const Positions none;
  CHECK_THROWS_AS((void)run_newton(none, k2, z, box), Error);
}

TEST_CASE("run_gradient_projection") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  const SpikeTrain x{make_positions(kTau), kAlpha};
  const Spectrum y = spike_fourier(x, 50);
  const Spectrum z = pointwise_mul(k2.spectrum(), y);

  const auto at = run_gradient_projection(x.positions, k2, z, BoxConstraint(x.positions, k1.sigma()));
  CHECK(at.status == SolveStatus::Converged);
  CHECK(at.iterations == 0);

  Phase1Config p1;
  p1.max_peaks = 7;
  const auto ph1 = run_phase1(y, k1, p1);
  const BoxConstraint box(ph1.tau0, k1.sigma());
  const auto nt = run_newton(ph1.tau0, k2, z, box);
  const auto gp = run_gradient_projection(ph1.tau0, k2, z, box);
  CHECK(gp.status == SolveStatus::Converged);
  CHECK(gp.iterations > nt.iterations);
  for (std::size_t i = 0; i < 7; ++i) CHECK(wrap_dist(gp.tau_tilde[i], nt.tau_tilde[i]) <= 1e-6);
}

TEST_CASE("gradient projection keeps boundary coordinates on the boundary") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(80);
  int hits = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = instance(rng, 1 + trial % 4);
    const Spectrum z = filtered(k2, in.x);
    // centers displaced beyond the box so the truth sits outside it
    const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Positions center;
    for (auto t : in.x.positions) center.push_back(shift(t, side * 1.5 * k1.sigma()));
    const BoxConstraint box(center, k1.sigma());
    GradientStepRule rule;
    rule.record_trajectory = true;
    const auto rep = run_gradient_projection(center, k2, z, box, rule);
    for (std::size_t c = 0; c < center.size(); ++c) {
      bool reached = false;
      for (const auto& it : rep.trajectory) {
        const bool on = wrap_dist(it[c], center[c]) >= k1.sigma() - 1e-12;
        if (reached) CHECK(on);
        reached = reached || on;
      }
      if (reached) ++hits;
    }
  }
  CHECK(hits > 0);
}

TEST_CASE("property: noise-free exactness after Phase I") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(90);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + trial % 8;
    const auto in = instance(rng, k);
    Phase1Config p1;
    p1.max_peaks = k;
    const auto ph1 = run_phase1(in.y, k1, p1);
    if (ph1.k_tilde != k || hausdorff(ph1.tau0, in.x.positions) > k1.sigma()) continue;
    ++checked;
    const Spectrum z = pointwise_mul(k2.spectrum(), in.y);
    const BoxConstraint box(ph1.tau0, k1.sigma());
    const auto rep = run_newton(ph1.tau0, k2, z, box);
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(hausdorff(rep.tau_tilde, in.x.positions) <= 1e-8);
    CHECK(stationarity_residual(rep.tau_tilde, k2, z, box) <= 1e-6 * k2.n() * alpha_sq(in.x.amplitudes));
  }
  CHECK(checked == 50);
}

TEST_CASE("property: Newton and gradient projection descend and stay feasible") {
  const auto o = props::newton_descent(kernels().k1, kernels().k2, 95, 60);
  INFO(o.first_failure);
  CHECK(o.ok());
}

TEST_CASE("converged noisy solves are stationary") {
  const auto& k1 = kernels().k1;
  const auto& k2 = kernels().k2;
  Xoshiro256 rng(96);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = instance(rng, 1 + trial % 5);
    const Spectrum z = filtered(k2, in.x, 0.05, rng());
    const Positions tau0 = jitter(rng, in.x.positions, 0.3 * k1.sigma());
    const BoxConstraint box(tau0, k1.sigma());
    const auto rep = run_newton(tau0, k2, z, box);
    if (rep.status != SolveStatus::Converged) continue;
    CHECK(stationarity_residual(rep.tau_tilde, k2, z, box) <= 1e-6 * k2.n() * alpha_sq(in.x.amplitudes));
  }
}

TEST_CASE("to_string") {
  CHECK(to_string(SolveStatus::Converged) == "Converged");
  CHECK(to_string(SolveStatus::MaxIter) == "MaxIter");
  CHECK(to_string(SolveStatus::HessianNotPD) == "HessianNotPD");
  CHECK(to_string(SolveStatus::LineSearchFailed) == "LineSearchFailed");
}
