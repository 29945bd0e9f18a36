#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "superres/error.hpp"
#include "superres/io.hpp"
#include "superres/phase1.hpp"
#include "superres/phase2.hpp"
#include "superres/pipeline.hpp"
#include "superres/slepian.hpp"

namespace {

using namespace superres;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitThreshold = 3;

struct ThresholdFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Registers an option with CLI11 and under the same key for --config files,
// whose values override the command line.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* opt(const std::string& key, T& target, const std::string& help) {
    setters_[key] = [&target, key](const json& v) {
      try {
        target = v.get<T>();
      } catch (const json::exception&) {
        throw Error("config key '" + key + "' has the wrong type");
      }
    };
    return app_->add_option("--" + key, target, help);
  }

  template <typename T>
  CLI::Option* opt(const std::string& key, std::optional<T>& target, const std::string& help) {
    setters_[key] = [&target, key](const json& v) {
      try {
        target = v.get<T>();
      } catch (const json::exception&) {
        throw Error("config key '" + key + "' has the wrong type");
      }
    };
    return app_->add_option("--" + key, target, help);
  }

  CLI::Option* flag(const std::string& key, bool& target, const std::string& help) {
    setters_[key] = [&target, key](const json& v) {
      if (!v.is_boolean()) throw Error("config key '" + key + "' must be a boolean");
      target = v.get<bool>();
    };
    return app_->add_flag("--" + key, target, help);
  }

  void apply(const json& cfg) const {
    for (const auto& [k, v] : cfg.items()) {
      const auto it = setters_.find(k);
      if (it == setters_.end()) throw Error("unknown config key '" + k + "' for '" + app_->get_name() + "'");
      it->second(v);
    }
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

json load_config(const std::string& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
}

// Config sections may be keyed by subcommand; a flat object applies to all.
void apply_config(const Binder& b, const std::string& path, const std::string& command) {
  if (path.empty()) return;
  const json j = load_config(path);
  if (!j.is_object()) throw Error("config must be a JSON object");
  if (j.contains(command) && j.at(command).is_object()) {
    b.apply(j.at(command));
  } else {
    b.apply(j);
  }
}

int cmd_kernel(int fc, double c, const std::string& dump, const std::optional<int>& grid,
               const std::string& profile, bool criteria) {
  const SlepianKernel k = build_kernel(fc, c);
  if (dump.empty()) {
    std::cout << io::kernel_csv(k);
  } else {
    io::write_text(dump, io::kernel_csv(k));
  }
  if (grid) {
    if (*grid < k.n()) throw Error("grid too coarse: need M >= 2 fc + 1");
    if (!profile.empty()) {
      io::write_text(profile, io::kernel_profile_csv(k, *grid));
    } else if (!dump.empty()) {
      std::cout << io::kernel_profile_csv(k, *grid);
    } else {
      throw Error("--grid needs --profile or --dump so the two tables do not share stdout");
    }
  }
  if (criteria) (void)check_criteria(k, &std::cerr);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-phase spike super-resolution from low-frequency Fourier data"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config;
  app.add_option("--config", config, "JSON file whose values override the flags");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "build the Slepian kernel and print its coefficients");
  Binder kb(kernel);
  int k_fc = 50;
  double k_c = 1.5;
  std::string k_dump, k_profile;
  std::optional<int> k_grid;
  bool k_criteria = false;
  kb.opt("fc", k_fc, "cut-off frequency");
  kb.opt("c", k_c, "concentration parameter, sigma = c / (2 fc + 1)");
  kb.opt("dump", k_dump, "write l,ghat here instead of stdout");
  kb.opt("grid", k_grid, "also emit the time profile t,g on an M-point grid");
  kb.opt("profile", k_profile, "file for the time profile");
  kb.flag("criteria", k_criteria, "print measured kernel criteria to stderr");

  // phase1
  auto* p1 = app.add_subcommand("phase1", "greedy peak picking on a measured spectrum");
  Binder p1b(p1);
  std::string p1_input;
  int p1_fc = 50;
  double p1_c1 = 1.5, p1_eta = 0.0;
  int p1_over = 32;
  std::optional<int> p1_max;
  bool p1_norefine = false;
  p1b.opt("input", p1_input, "spectrum CSV (l,re,im)")->required();
  p1b.opt("fc", p1_fc, "cut-off frequency");
  p1b.opt("c1", p1_c1, "Phase I kernel parameter");
  p1b.opt("eta", p1_eta, "stopping threshold");
  p1b.opt("oversample", p1_over, "grid oversampling factor");
  p1b.opt("max-peaks", p1_max, "cap on the number of peaks");
  p1b.flag("no-refine", p1_norefine, "skip the off-grid polish");

  // solve
  auto* sv = app.add_subcommand("solve", "Phase I followed by projected Newton refinement");
  Binder svb(sv);
  std::string sv_input;
  int sv_fc = 50;
  double sv_c1 = 1.5, sv_eta = 0.0;
  std::optional<double> sv_c2;
  std::optional<int> sv_max;
  int sv_over = 32;
  bool sv_gp = false, sv_nofallback = false;
  svb.opt("input", sv_input, "spectrum CSV (l,re,im)")->required();
  svb.opt("fc", sv_fc, "cut-off frequency");
  svb.opt("c1", sv_c1, "Phase I kernel parameter");
  svb.opt("c2", sv_c2, "Phase II kernel parameter (default 1.5 c1)");
  svb.opt("eta", sv_eta, "Phase I threshold");
  svb.opt("max-peaks", sv_max, "cap on the number of peaks (K if known)");
  svb.opt("oversample", sv_over, "grid oversampling factor");
  svb.flag("gradient", sv_gp, "use gradient projection instead of Newton");
  svb.flag("no-fallback", sv_nofallback, "do not fall back to gradient projection after HessianNotPD");

  // simulate
  auto* sim = app.add_subcommand("simulate", "write the noisy spectrum of a spike train");
  Binder simb(sim);
  std::string sim_spikes, sim_out;
  int sim_fc = 50;
  double sim_nu = 0.0;
  std::uint64_t sim_seed = 1;
  simb.opt("spikes", sim_spikes, "spike train JSON")->required();
  simb.opt("fc", sim_fc, "cut-off frequency");
  simb.opt("nu", sim_nu, "noise level");
  simb.opt("seed", sim_seed, "noise seed");
  simb.opt("out", sim_out, "output CSV (default stdout)");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte-Carlo experiment over a grid of noise levels");
  Binder mcb(mc);
  ExperimentConfig ec;
  std::string mc_out = "mc_out", mc_policy = "zero";
  std::optional<double> mc_min_success;
  std::vector<double> mc_amps;
  bool mc_no_runtime = false, mc_free_k = false, mc_nofallback = false;
  mcb.opt("out", mc_out, "output directory");
  mcb.opt("fc", ec.fc, "cut-off frequency");
  mcb.opt("c1", ec.c1, "Phase I kernel parameter");
  mcb.opt("c2", ec.c2, "Phase II kernel parameter");
  mcb.opt("K", ec.K, "number of spikes");
  mcb.opt("sep", ec.sep_min, "minimum separation");
  mcb.opt("nu", ec.nu_grid, "noise levels")->expected(1, -1);
  mcb.opt("trials", ec.trials, "trials per noise level");
  mcb.opt("seed", ec.seed, "base seed");
  mcb.opt("oversample", ec.oversample, "Phase I grid oversampling");
  mcb.opt("threads", ec.threads, "worker threads");
  mcb.opt("eta-policy", mc_policy, "zero | noise | filtered");
  mcb.opt("amplitudes", mc_amps, "fixed amplitudes instead of Gaussian draws")->expected(1, -1);
  mcb.opt("min-success", mc_min_success, "exit 3 if the success rate at nu = 0 is below this");
  mcb.flag("no-runtime", mc_no_runtime, "write runtime_ms = 0 for byte-stable output");
  mcb.flag("free-k", mc_free_k, "do not cap Phase I at K peaks");
  mcb.flag("no-fallback", mc_nofallback, "do not fall back to gradient projection");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the gradient and Hessian");
  Binder gcb(gc);
  GradcheckConfig gcc;
  gcb.opt("fc", gcc.fc, "cut-off frequency");
  gcb.opt("c1", gcc.c1, "Phase I kernel parameter (box radius)");
  gcb.opt("c2", gcc.c2, "Phase II kernel parameter");
  gcb.opt("points", gcc.n_points, "number of random configurations");
  gcb.opt("seed", gcc.seed, "seed");
  gcb.opt("noise", gcc.noise, "noise level added to the measurement");
  gcb.opt("sizes", gcc.sizes, "configuration sizes to cycle through")->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (kernel->parsed()) {
      apply_config(kb, config, "kernel");
      return cmd_kernel(k_fc, k_c, k_dump, k_grid, k_profile, k_criteria);
    }
    if (p1->parsed()) {
      apply_config(p1b, config, "phase1");
      const SlepianKernel k1 = build_kernel(p1_fc, p1_c1);
      const Spectrum y = io::load_spectrum_csv(p1_input, true, p1_fc);
      Phase1Config cfg;
      cfg.eta = p1_eta;
      cfg.oversample = p1_over;
      cfg.refine = !p1_norefine;
      cfg.max_peaks = p1_max;
      std::cout << io::phase1_json(run_phase1(y, k1, cfg));
      return kExitOk;
    }
    if (sv->parsed()) {
      apply_config(svb, config, "solve");
      const Spectrum y = io::load_spectrum_csv(sv_input, true, sv_fc);
      PipelineOptions opt;
      opt.c1 = sv_c1;
      opt.c2 = sv_c2.value_or(1.5 * sv_c1);
      opt.phase1.eta = sv_eta;
      opt.phase1.oversample = sv_over;
      opt.phase1.max_peaks = sv_max;
      opt.gradient_fallback = !sv_nofallback;
      const SlepianKernel k1 = build_kernel(sv_fc, opt.c1);
      const SlepianKernel k2 = build_kernel(sv_fc, opt.c2);
      if (sv_gp) {
        const Phase1Result r1 = run_phase1(y, k1, opt.phase1);
        if (r1.k_tilde == 0) {
          std::cout << io::solve_report_json(SolveReport{}, &r1, "Phase1Empty");
          return kExitOk;
        }
        const SolveReport rep = run_gradient_projection(r1.tau0, k2, pointwise_mul(k2.spectrum(), y),
                                                        BoxConstraint(r1.tau0, k1.sigma()));
        std::cout << io::solve_report_json(rep, &r1);
        return kExitOk;
      }
      const PipelineResult res = run_pipeline(y, k1, k2, opt);
      if (!res.phase2) {
        if (!res.message.empty()) throw NumericalError(res.message);
        std::cout << io::solve_report_json(SolveReport{}, &res.phase1, res.status);
        return kExitOk;
      }
      std::cout << io::solve_report_json(*res.phase2, &res.phase1, res.status);
      return kExitOk;
    }
    if (sim->parsed()) {
      apply_config(simb, config, "simulate");
      const SpikeTrain x = io::load_spike_train_json(sim_spikes);
      const Spectrum y = add(spike_fourier(x, sim_fc), synth_noise(sim_fc, sim_nu, sim_seed));
      if (sim_out.empty()) {
        std::cout << io::spectrum_csv(y);
      } else {
        io::save_spectrum_csv(sim_out, y);
      }
      return kExitOk;
    }
    if (mc->parsed()) {
      apply_config(mcb, config, "mc");
      ec.eta_policy = parse_eta_policy(mc_policy);
      ec.record_runtime = !mc_no_runtime;
      ec.known_k = !mc_free_k;
      ec.gradient_fallback = !mc_nofallback;
      if (!mc_amps.empty()) {
        ec.amp_law = AmplitudeLaw::Fixed;
        ec.fixed_amplitudes = mc_amps;
      }
      ec.validate();
      const MonteCarloResult res = run_monte_carlo(ec);
      write_monte_carlo(mc_out, ec, res);
      std::cout << summary_csv(res.summary);
      if (mc_min_success) {
        for (const auto& row : res.summary) {
          if (row.nu == 0.0 && row.success_rate < *mc_min_success) {
            throw ThresholdFailure("success rate " + std::to_string(row.success_rate) + " at nu = 0 is below " +
                                   std::to_string(*mc_min_success));
          }
        }
      }
      return kExitOk;
    }
    if (gc->parsed()) {
      apply_config(gcb, config, "gradcheck");
      const GradcheckReport rep = gradcheck(gcc);
      std::printf("points %zu  hessian-checked %d  degenerate %d\n", rep.points.size(), rep.hessian_checked,
                  rep.degenerate);
      std::printf("worst gradient relative error %.3e (tol %.0e) %s\n", rep.worst_grad_rel, gcc.grad_tol,
                  rep.grad_ok ? "ok" : "FAIL");
      std::printf("worst Hessian relative error  %.3e (tol %.0e) %s\n", rep.worst_hess_rel, gcc.hess_tol,
                  rep.hess_ok ? "ok" : "FAIL");
      for (const auto& pt : rep.points) {
        if (!pt.error.empty()) std::printf("  K=%d: %s\n", pt.K, pt.error.c_str());
      }
      if (!rep.ok()) throw ThresholdFailure("finite-difference thresholds violated");
      return kExitOk;
    }
  } catch (const ThresholdFailure& e) {
    std::cerr << "threshold failure: " << e.what() << '\n';
    return kExitThreshold;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
