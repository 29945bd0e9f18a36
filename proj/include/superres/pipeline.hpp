#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "superres/phase1.hpp"
#include "superres/phase2.hpp"

namespace superres {

enum class AmplitudeLaw { GaussianVar1OverN, Fixed };

/// How Phase I picks its threshold inside a simulated trial.
enum class EtaPolicy {
  Zero,          // eta = 0, rely on the peak cap (K known)
  NoiseLinf,     // eta = 2 max |n(t)| of the raw noise
  FilteredLinf,  // eta = 2 max |(g * n)(t)|
};

[[nodiscard]] std::string_view to_string(EtaPolicy p) noexcept;
[[nodiscard]] EtaPolicy parse_eta_policy(std::string_view s);

struct ExperimentConfig {
  int fc = 50;
  double c1 = 1.5;
  double c2 = 2.25;
  int K = 14;
  double sep_min = 2.0 / 50.0;
  AmplitudeLaw amp_law = AmplitudeLaw::GaussianVar1OverN;
  std::vector<double> fixed_amplitudes;  // used when amp_law == Fixed, cycled if shorter than K
  std::vector<double> nu_grid{0.0, 0.025, 0.05, 0.1, 0.2};
  int trials = 200;
  std::uint64_t seed = 1;
  int oversample = 32;
  int threads = 1;
  EtaPolicy eta_policy = EtaPolicy::Zero;
  bool known_k = true;            // Phase I capped at K peaks
  bool gradient_fallback = true;  // rerun with gradient projection after HessianNotPD
  bool record_runtime = true;

  void validate() const;
};

/// Per-trial seed: seed ^ mix64((trial_index << 32) | nu_index).
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index, std::uint64_t nu_index) noexcept;

/// Uniform positions conditioned on sep >= sep_min, with amplitudes drawn
/// per the configured law. Throws Error("separation infeasible") when
/// K * sep_min >= 1.
[[nodiscard]] SpikeTrain sample_instance(const ExperimentConfig& cfg, std::uint64_t seed);

/// Phase I then Phase II on one measurement.
struct PipelineResult {
  Phase1Result phase1;
  std::optional<SolveReport> phase2;  // absent when Phase I found nothing
  bool fallback_used = false;
  std::string status;                 // solver status, "Phase1Empty" or an error class
  std::string message;                // detail for failures
};

struct PipelineOptions {
  double c1 = 1.5;
  double c2 = 2.25;
  Phase1Config phase1;
  NewtonConfig newton;
  bool gradient_fallback = true;
};

/// Kernels are passed in so callers can build them once.
[[nodiscard]] PipelineResult run_pipeline(const Spectrum& y, const SlepianKernel& k1, const SlepianKernel& k2,
                                          const PipelineOptions& opt);

[[nodiscard]] PipelineResult run_pipeline(const Spectrum& y, const PipelineOptions& opt);

struct TrialRecord {
  std::uint64_t seed = 0;
  double nu = 0.0;
  double hausdorff_err = 0.0;  // +inf when no estimate was produced
  int K_tilde = 0;
  std::string status;
  double runtime_ms = 0.0;
  Positions truth;
  Positions estimate;
};

/// Kernels shared across trials.
struct TrialContext {
  ExperimentConfig cfg;
  SlepianKernel k1;
  SlepianKernel k2;
  explicit TrialContext(const ExperimentConfig& c);
};

[[nodiscard]] TrialRecord run_trial(const TrialContext& ctx, std::uint64_t seed, double nu);
[[nodiscard]] TrialRecord run_trial(const ExperimentConfig& cfg, std::uint64_t seed, double nu);

/// Trial on a given spike train, for pinned instances.
[[nodiscard]] TrialRecord run_trial(const TrialContext& ctx, const SpikeTrain& x, std::uint64_t seed, double nu);

struct SummaryRow {
  double nu = 0.0;
  double median_err = 0.0;
  double mean_err = 0.0;
  double success_rate = 0.0;
  int trials = 0;
};

struct MonteCarloResult {
  std::vector<TrialRecord> records;  // ordered by (nu index, trial index)
  std::vector<SummaryRow> summary;
};

inline constexpr double kSuccessThreshold = 1e-6;

[[nodiscard]] MonteCarloResult run_monte_carlo(const ExperimentConfig& cfg);
[[nodiscard]] std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& rec);

/// `nu,seed,err,status,runtime_ms`
[[nodiscard]] std::string trials_csv(const std::vector<TrialRecord>& rec);
/// `nu,median_err,mean_err,success_rate`
[[nodiscard]] std::string summary_csv(const std::vector<SummaryRow>& rows);
[[nodiscard]] std::string meta_json(const ExperimentConfig& cfg);
/// Median error against nu as a small static SVG line chart.
[[nodiscard]] std::string summary_svg(const std::vector<SummaryRow>& rows);

/// trials.csv, summary.csv, meta.json and summary.svg under `dir`.
void write_monte_carlo(const std::filesystem::path& dir, const ExperimentConfig& cfg, const MonteCarloResult& res);

struct GradcheckConfig {
  int fc = 50;
  double c1 = 1.5;
  double c2 = 2.25;
  int n_points = 100;
  std::uint64_t seed = 7;
  std::vector<int> sizes{1, 3, 7};  // K cycles through these
  double noise = 0.05;              // nu of the noise added to the measurement
  bool hessian = true;
  int hessian_every = 2;            // check the Hessian at every n-th point
  double grad_tol = 1e-5;
  double hess_tol = 1e-4;
};

struct GradcheckPoint {
  int K = 0;
  double grad_rel = 0.0;
  std::optional<double> hess_rel;
  std::optional<double> hess_min_eig;
  std::string error;  // non-empty if the point could not be evaluated
};

struct GradcheckReport {
  std::vector<GradcheckPoint> points;
  double worst_grad_rel = 0.0;
  double worst_hess_rel = 0.0;
  int hessian_checked = 0;
  int degenerate = 0;
  bool grad_ok = true;
  bool hess_ok = true;
  [[nodiscard]] bool ok() const noexcept { return grad_ok && hess_ok; }
};

/// Central-difference check of one configuration against the analytic
/// gradient (step 1e-7 sigma2) and Hessian (step 1e-6 sigma2).
[[nodiscard]] GradcheckPoint gradcheck_point(const Positions& rho, const SlepianKernel& k2, const Spectrum& zhat,
                                             bool with_hessian);

[[nodiscard]] GradcheckReport gradcheck(const GradcheckConfig& cfg);

}  // namespace superres
