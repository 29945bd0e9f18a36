#include "superres/pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "superres/error.hpp"
#include "superres/rng.hpp"

namespace superres {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Circle positions conditioned on a minimum gap: a uniform rotation plus
// gaps s + (1 - K s) * (uniform point of the simplex).
Positions separated_positions(int k, double sep, Xoshiro256& rng) {
  std::vector<double> e(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& v : e) {
    v = -std::log1p(-rng.uniform());
    total += v;
  }
  const double slack = 1.0 - k * sep;
  double t = rng.uniform();
  Positions out;
  out.reserve(e.size());
  for (double v : e) {
    out.emplace_back(t);
    t += sep + slack * v / total;
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(EtaPolicy p) noexcept {
  switch (p) {
    case EtaPolicy::Zero: return "zero";
    case EtaPolicy::NoiseLinf: return "noise";
    case EtaPolicy::FilteredLinf: return "filtered";
  }
  return "zero";
}

EtaPolicy parse_eta_policy(std::string_view s) {
  if (s == "zero") return EtaPolicy::Zero;
  if (s == "noise") return EtaPolicy::NoiseLinf;
  if (s == "filtered") return EtaPolicy::FilteredLinf;
  throw Error("unknown eta policy '" + std::string(s) + "' (zero|noise|filtered)");
}

void ExperimentConfig::validate() const {
  if (fc < 1) throw Error("fc must be >= 1");
  if (K < 1) throw Error("K must be >= 1");
  if (trials < 1) throw Error("trials must be >= 1");
  if (!(sep_min >= 0.0) || sep_min * K >= 1.0) throw Error("separation infeasible: need sep_min * K < 1");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error("c1 and c2 must be positive");
  if (oversample < 4) throw Error("oversample must be >= 4");
  if (threads < 1) throw Error("threads must be >= 1");
  if (nu_grid.empty()) throw Error("nu grid is empty");
  for (double nu : nu_grid) {
    if (!(nu >= 0.0)) throw Error("noise levels must be >= 0");
  }
  if (amp_law == AmplitudeLaw::Fixed) {
    if (fixed_amplitudes.empty()) throw Error("fixed amplitude law needs amplitudes");
    for (double a : fixed_amplitudes) {
      if (a == 0.0) throw Error("zero amplitude");
    }
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index, std::uint64_t nu_index) noexcept {
  return seed ^ mix64((trial_index << 32) | (nu_index & 0xffffffffULL));
}

SpikeTrain sample_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.K < 1) throw Error("K must be >= 1");
  if (!(cfg.sep_min >= 0.0) || cfg.sep_min * cfg.K >= 1.0) throw Error("separation infeasible");
  Xoshiro256 rng(seed);
  SpikeTrain x;
  x.positions = separated_positions(cfg.K, cfg.sep_min, rng);
  x.amplitudes.resize(static_cast<std::size_t>(cfg.K));
  if (cfg.amp_law == AmplitudeLaw::Fixed) {
    if (cfg.fixed_amplitudes.empty()) throw Error("fixed amplitude law needs amplitudes");
    for (std::size_t i = 0; i < x.amplitudes.size(); ++i) {
      x.amplitudes[i] = cfg.fixed_amplitudes[i % cfg.fixed_amplitudes.size()];
    }
  } else {
    const double sd = 1.0 / std::sqrt(static_cast<double>(2 * cfg.fc + 1));
    for (auto& a : x.amplitudes) {
      do {
        a = sd * rng.normal();
      } while (a == 0.0);
    }
  }
  if (cfg.K > 1 && separation(x.positions) < cfg.sep_min * (1.0 - 1e-12)) {
    throw Error("separation infeasible");
  }
  return x;
}

PipelineResult run_pipeline(const Spectrum& y, const SlepianKernel& k1, const SlepianKernel& k2,
                            const PipelineOptions& opt) {
  PipelineResult out;
  out.phase1 = run_phase1(y, k1, opt.phase1);
  if (out.phase1.k_tilde == 0) {
    out.status = "Phase1Empty";
    return out;
  }
  const Spectrum zhat = pointwise_mul(k2.spectrum(), y);
  const BoxConstraint box(out.phase1.tau0, k1.sigma());
  try {
    SolveReport rep = run_newton(out.phase1.tau0, k2, zhat, box, opt.newton);
    out.status = std::string(to_string(rep.status));
    if (rep.status == SolveStatus::HessianNotPD && opt.gradient_fallback) {
      SolveReport gp = run_gradient_projection(rep.tau_tilde, k2, zhat, box);
      gp.F_trace.insert(gp.F_trace.begin(), rep.F_trace.begin(), rep.F_trace.end() - 1);
      gp.iterations += rep.iterations;
      out.fallback_used = true;
      out.status += "+GP";
      rep = std::move(gp);
    }
    out.phase2 = std::move(rep);
  } catch (const NumericalError& e) {
    const std::string what = e.what();
    out.status = what.rfind("degenerate dictionary", 0) == 0 ? "DegenerateDictionary" : "NumericalFailure";
    out.message = what;
  }
  return out;
}

PipelineResult run_pipeline(const Spectrum& y, const PipelineOptions& opt) {
  return run_pipeline(y, build_kernel(y.fc(), opt.c1), build_kernel(y.fc(), opt.c2), opt);
}

TrialContext::TrialContext(const ExperimentConfig& c)
    : cfg(c), k1(build_kernel(c.fc, c.c1)), k2(build_kernel(c.fc, c.c2)) {
  cfg.validate();
}

TrialRecord run_trial(const TrialContext& ctx, const SpikeTrain& x, std::uint64_t seed, double nu) {
  const auto& cfg = ctx.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.seed = seed;
  rec.nu = nu;
  rec.truth = x.positions;
  rec.hausdorff_err = kInf;
  try {
    const Spectrum noise = synth_noise(cfg.fc, nu, mix64(seed ^ 0x6e6f697365ULL));
    const Spectrum y = add(spike_fourier(x, cfg.fc), noise);

    PipelineOptions opt;
    opt.c1 = cfg.c1;
    opt.c2 = cfg.c2;
    opt.gradient_fallback = cfg.gradient_fallback;
    opt.phase1.oversample = cfg.oversample;
    if (cfg.known_k) opt.phase1.max_peaks = cfg.K;
    if (nu > 0.0) {
      switch (cfg.eta_policy) {
        case EtaPolicy::Zero: break;
        case EtaPolicy::NoiseLinf: opt.phase1.eta = choose_eta(grid_linf(noise, cfg.oversample)); break;
        case EtaPolicy::FilteredLinf:
          opt.phase1.eta = choose_eta(grid_linf(pointwise_mul(ctx.k1.spectrum(), noise), cfg.oversample));
          break;
      }
    }

    const PipelineResult res = run_pipeline(y, ctx.k1, ctx.k2, opt);
    rec.K_tilde = res.phase1.k_tilde;
    rec.status = res.status;
    if (res.phase2) {
      rec.estimate = res.phase2->tau_tilde;
      rec.hausdorff_err = hausdorff(rec.estimate, rec.truth);
    } else if (!res.phase1.tau0.empty()) {
      rec.estimate = res.phase1.tau0;
      rec.hausdorff_err = hausdorff(rec.estimate, rec.truth);
    }
  } catch (const NumericalError&) {
    rec.status = "NumericalFailure";
  } catch (const Error&) {
    rec.status = "Error";
  }
  if (cfg.record_runtime) {
    rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return rec;
}

TrialRecord run_trial(const TrialContext& ctx, std::uint64_t seed, double nu) {
  SpikeTrain x;
  try {
    x = sample_instance(ctx.cfg, seed);
  } catch (const Error&) {
    TrialRecord rec;
    rec.seed = seed;
    rec.nu = nu;
    rec.hausdorff_err = kInf;
    rec.status = "SeparationInfeasible";
    return rec;
  }
  return run_trial(ctx, x, seed, nu);
}

TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed, double nu) {
  return run_trial(TrialContext(cfg), seed, nu);
}

std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& rec) {
  std::vector<SummaryRow> rows;
  for (double nu : cfg.nu_grid) {
    std::vector<double> errs;
    for (const auto& r : rec) {
      if (r.nu == nu) errs.push_back(r.hausdorff_err);
    }
    SummaryRow row;
    row.nu = nu;
    row.trials = static_cast<int>(errs.size());
    if (!errs.empty()) {
      row.median_err = median_of(errs);
      row.mean_err = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
      row.success_rate = static_cast<double>(std::count_if(errs.begin(), errs.end(),
                                                           [](double e) { return e < kSuccessThreshold; })) /
                         static_cast<double>(errs.size());
    }
    rows.push_back(row);
  }
  return rows;
}

MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg) {
  const TrialContext ctx(cfg);
  const std::size_t per_nu = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = per_nu * cfg.nu_grid.size();
  MonteCarloResult res;
  res.records.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t j = job / per_nu;
      const std::size_t t = job % per_nu;
      res.records[job] = run_trial(ctx, trial_seed(cfg.seed, t, j), cfg.nu_grid[j]);
    }
  };
  const int n_threads = std::min<int>(cfg.threads, static_cast<int>(total));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  res.summary = summarize(cfg, res.records);
  return res;
}

std::string trials_csv(const std::vector<TrialRecord>& rec) {
  std::ostringstream os;
  os << "nu,seed,err,status,runtime_ms\n";
  for (const auto& r : rec) {
    os << fmt17(r.nu) << ',' << r.seed << ',' << fmt17(r.hausdorff_err) << ',' << r.status << ','
       << fmt17(r.runtime_ms) << '\n';
  }
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "nu,median_err,mean_err,success_rate\n";
  for (const auto& r : rows) {
    os << fmt17(r.nu) << ',' << fmt17(r.median_err) << ',' << fmt17(r.mean_err) << ',' << fmt17(r.success_rate)
       << '\n';
  }
  return os.str();
}

std::string meta_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["fc"] = cfg.fc;
  j["c1"] = cfg.c1;
  j["c2"] = cfg.c2;
  j["sigma1"] = cfg.c1 / (2 * cfg.fc + 1);
  j["sigma2"] = cfg.c2 / (2 * cfg.fc + 1);
  j["K"] = cfg.K;
  j["sep_min"] = cfg.sep_min;
  j["amp_law"] = cfg.amp_law == AmplitudeLaw::Fixed ? "fixed" : "gaussian_var_1_over_N";
  if (cfg.amp_law == AmplitudeLaw::Fixed) j["fixed_amplitudes"] = cfg.fixed_amplitudes;
  j["nu_grid"] = cfg.nu_grid;
  j["nu_grid_note"] = "harness choice; the reference experiment does not list its noise levels";
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["oversample"] = cfg.oversample;
  j["eta_policy"] = std::string(to_string(cfg.eta_policy));
  j["known_k"] = cfg.known_k;
  j["gradient_fallback"] = cfg.gradient_fallback;
  j["record_runtime"] = cfg.record_runtime;
  j["success_threshold"] = kSuccessThreshold;
  j["seed_rule"] = "seed ^ splitmix64((trial << 32) | nu_index); xoshiro256** streams";
  return j.dump(2) + "\n";
}

std::string summary_svg(const std::vector<SummaryRow>& rows) {
  constexpr double w = 480, h = 320, pad = 48;
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) {
    if (std::isfinite(r.median_err)) pts.emplace_back(r.nu, std::log10(std::max(r.median_err, 1e-17)));
  }
  double x0 = 0, x1 = 1, y0 = -17, y1 = 0;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (auto [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    y0 = std::floor(y0);
    y1 = std::ceil(y1);
    if (y1 == y0) y1 = y0 + 1;
  }
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
  auto py = [&](double y) { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
     << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\" font-size=\"12\">nu</text>\n"
     << "<text x=\"12\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << h / 2
     << ")\" text-anchor=\"middle\">log10 median Hausdorff error</text>\n"
     << "<text x=\"" << pad - 4 << "\" y=\"" << py(y0) << "\" text-anchor=\"end\" font-size=\"10\">" << y0
     << "</text>\n"
     << "<text x=\"" << pad - 4 << "\" y=\"" << py(y1) << "\" text-anchor=\"end\" font-size=\"10\">" << y1
     << "</text>\n";
  if (!pts.empty()) {
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (auto [x, y] : pts) {
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"steelblue\"/>\n"
         << "<text x=\"" << px(x) << "\" y=\"" << h - pad + 14 << "\" text-anchor=\"middle\" font-size=\"10\">" << x
         << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_monte_carlo(const std::filesystem::path& dir, const ExperimentConfig& cfg, const MonteCarloResult& res) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto put = [&](const char* name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << content;
    if (!f) throw Error("write failed: " + path.string());
  };
  put("trials.csv", trials_csv(res.records));
  put("summary.csv", summary_csv(res.summary));
  put("meta.json", meta_json(cfg));
  put("summary.svg", summary_svg(res.summary));
}

GradcheckPoint gradcheck_point(const Positions& rho, const SlepianKernel& k2, const Spectrum& zhat,
                               bool with_hessian) {
  GradcheckPoint pt;
  pt.K = static_cast<int>(rho.size());
  try {
    const Evaluation ev = evaluate(rho, k2, zhat, with_hessian);
    const auto k = static_cast<Eigen::Index>(rho.size());
    const double hg = 1e-7 * k2.sigma();
    Eigen::VectorXd fd(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      Positions p = rho;
      Positions m = rho;
      const auto ui = static_cast<std::size_t>(i);
      p[ui] = shift(rho[ui], hg);
      m[ui] = shift(rho[ui], -hg);
      fd[i] = (objective_F(p, k2, zhat) - objective_F(m, k2, zhat)) / (2.0 * hg);
    }
    pt.grad_rel = (ev.gradient - fd).norm() / std::max({fd.norm(), ev.gradient.norm(), 1e-300});

    if (with_hessian) {
      const double hh = 1e-6 * k2.sigma();
      Eigen::MatrixXd fdh(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        Positions p = rho;
        Positions m = rho;
        const auto ui = static_cast<std::size_t>(i);
        p[ui] = shift(rho[ui], hh);
        m[ui] = shift(rho[ui], -hh);
        fdh.col(i) = (gradient_F(p, k2, zhat) - gradient_F(m, k2, zhat)) / (2.0 * hh);
      }
      fdh = (0.5 * (fdh + fdh.transpose())).eval();
      pt.hess_rel = (ev.hessian - fdh).norm() / std::max({fdh.norm(), ev.hessian.norm(), 1e-300});
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.hessian, Eigen::EigenvaluesOnly);
      pt.hess_min_eig = es.eigenvalues().minCoeff();
    }
  } catch (const NumericalError& e) {
    pt.error = e.what();
  }
  return pt;
}

GradcheckReport gradcheck(const GradcheckConfig& cfg) {
  if (cfg.n_points < 0) throw Error("n_points must be >= 0");
  if (cfg.sizes.empty()) throw Error("gradcheck needs at least one configuration size");
  GradcheckReport rep;
  if (cfg.n_points == 0) return rep;

  const SlepianKernel k1 = build_kernel(cfg.fc, cfg.c1);
  const SlepianKernel k2 = build_kernel(cfg.fc, cfg.c2);
  const double s1 = k1.sigma();
  for (int p = 0; p < cfg.n_points; ++p) {
    const int k = cfg.sizes[static_cast<std::size_t>(p) % cfg.sizes.size()];
    if (k * 4.0 * s1 >= 1.0) throw Error("gradcheck: configuration does not fit on the circle");
    Xoshiro256 rng(trial_seed(cfg.seed, static_cast<std::uint64_t>(p), 0x67));
    SpikeTrain x;
    x.positions = separated_positions(k, 4.0 * s1, rng);
    for (int i = 0; i < k; ++i) {
      const double mag = 1.0 + 9.0 * rng.uniform();
      x.amplitudes.push_back(rng.uniform() < 0.5 ? -mag : mag);
    }
    Positions rho;
    for (auto t : x.positions) rho.push_back(shift(t, s1 * (2.0 * rng.uniform() - 1.0)));
    Spectrum y = spike_fourier(x, cfg.fc);
    if (cfg.noise > 0.0) y = add(y, synth_noise(cfg.fc, cfg.noise, rng()));
    const Spectrum zhat = pointwise_mul(k2.spectrum(), y);

    const bool with_h = cfg.hessian && cfg.hessian_every > 0 && p % cfg.hessian_every == 0;
    GradcheckPoint pt = gradcheck_point(rho, k2, zhat, with_h);
    if (!pt.error.empty()) {
      ++rep.degenerate;
    } else {
      rep.worst_grad_rel = std::max(rep.worst_grad_rel, pt.grad_rel);
      if (pt.hess_rel) {
        ++rep.hessian_checked;
        rep.worst_hess_rel = std::max(rep.worst_hess_rel, *pt.hess_rel);
      }
    }
    rep.points.push_back(std::move(pt));
  }
  rep.grad_ok = rep.worst_grad_rel <= cfg.grad_tol;
  rep.hess_ok = rep.worst_hess_rel <= cfg.hess_tol;
  return rep;
}

}  // namespace superres
