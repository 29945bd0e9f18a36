#include "superres/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "superres/error.hpp"

namespace superres::io {

namespace {

using nlohmann::ordered_json;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, int line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error("spectrum csv line " + std::to_string(line) + ": bad number '" + t + "'");
  }
  return v;
}

ordered_json positions_json(const Positions& p) {
  ordered_json a = ordered_json::array();
  for (auto t : p) a.push_back(t.value());
  return a;
}

}  // namespace

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "l,re,im\n";
  for (int l = -s.fc(); l <= s.fc(); ++l) {
    os << l << ',' << g17(s[l].real()) << ',' << g17(s[l].imag()) << '\n';
  }
}

std::string spectrum_csv(const Spectrum& s) {
  std::ostringstream os;
  write_spectrum_csv(os, s);
  return os.str();
}

Spectrum read_spectrum_csv(std::istream& is, bool real_signal, int expected_fc) {
  std::string line;
  int lineno = 0;
  if (!std::getline(is, line)) throw Error("spectrum csv: empty input");
  ++lineno;
  if (trim(line) != "l,re,im") throw Error("spectrum csv: expected header 'l,re,im'");
  std::map<int, cplx> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        std::getline(ss, extra, ',')) {
      throw Error("spectrum csv line " + std::to_string(lineno) + ": expected three fields");
    }
    const double lv = parse_double(a, lineno);
    const int l = static_cast<int>(lv);
    if (static_cast<double>(l) != lv) throw Error("spectrum csv line " + std::to_string(lineno) + ": l not integer");
    if (!rows.emplace(l, cplx(parse_double(b, lineno), parse_double(c, lineno))).second) {
      throw Error("spectrum csv: duplicate frequency " + std::to_string(l));
    }
  }
  if (rows.empty()) throw Error("spectrum csv: no rows");
  const int fc = rows.rbegin()->first;
  if (fc < 1 || rows.begin()->first != -fc || static_cast<int>(rows.size()) != 2 * fc + 1) {
    throw Error("spectrum csv: frequencies must cover -fc..fc exactly once");
  }
  if (expected_fc > 0 && fc != expected_fc) {
    throw Error("spectrum csv: file has fc=" + std::to_string(fc) + ", expected " + std::to_string(expected_fc));
  }
  std::vector<cplx> c;
  c.reserve(rows.size());
  for (const auto& [l, v] : rows) c.push_back(v);
  return Spectrum(fc, std::move(c), real_signal);
}

Spectrum load_spectrum_csv(const std::filesystem::path& p, bool real_signal, int expected_fc) {
  std::ifstream f(p);
  if (!f) throw Error("cannot open " + p.string());
  return read_spectrum_csv(f, real_signal, expected_fc);
}

void save_spectrum_csv(const std::filesystem::path& p, const Spectrum& s) { write_text(p, spectrum_csv(s)); }

std::string spike_train_json(const SpikeTrain& x) {
  ordered_json j;
  j["positions"] = positions_json(x.positions);
  j["amplitudes"] = x.amplitudes;
  return j.dump(2) + "\n";
}

SpikeTrain parse_spike_train_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("spike train json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("positions") || !j.contains("amplitudes")) {
    throw Error("spike train json: need 'positions' and 'amplitudes'");
  }
  SpikeTrain x;
  try {
    x.positions = make_positions(j.at("positions").get<std::vector<double>>());
    x.amplitudes = j.at("amplitudes").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("spike train json: ") + e.what());
  }
  x.validate();
  return x;
}

SpikeTrain load_spike_train_json(const std::filesystem::path& p) { return parse_spike_train_json(read_text(p)); }

std::string kernel_csv(const SlepianKernel& k) {
  std::ostringstream os;
  os << "l,ghat\n";
  for (int l = -k.fc(); l <= k.fc(); ++l) os << l << ',' << g17(k.ghat(l)) << '\n';
  return os.str();
}

std::string kernel_profile_csv(const SlepianKernel& k, int m) {
  const auto g = eval_grid(k.spectrum(), m);
  std::ostringstream os;
  os << "t,g\n";
  for (int i = 0; i < m; ++i) os << g17(static_cast<double>(i) / m) << ',' << g17(g[static_cast<std::size_t>(i)]) << '\n';
  return os.str();
}

std::string phase1_json(const Phase1Result& r) {
  ordered_json j;
  j["K_tilde"] = r.k_tilde;
  j["tau0"] = positions_json(r.tau0);
  j["peak_values"] = r.peak_values;
  j["iterations"] = r.iterations;
  return j.dump(2) + "\n";
}

std::string solve_report_json(const SolveReport& r, const Phase1Result* phase1, std::string_view status_override) {
  ordered_json j;
  j["status"] = status_override.empty() ? std::string(to_string(r.status)) : std::string(status_override);
  j["K_tilde"] = r.tau_tilde.size();
  j["positions"] = positions_json(r.tau_tilde);
  j["amplitudes"] = std::vector<double>(r.beta.data(), r.beta.data() + r.beta.size());
  j["iterations"] = r.iterations;
  j["grad_norm_final"] = r.grad_norm_final;
  j["active_set_final"] = r.active_set_final;
  j["F_trace"] = r.F_trace;
  if (phase1 != nullptr) j["tau0"] = positions_json(phase1->tau0);
  return j.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open " + p.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot open " + p.string() + " for writing");
  f << content;
  if (!f) throw Error("write failed: " + p.string());
}

}  // namespace superres::io
