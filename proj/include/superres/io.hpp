#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "superres/phase1.hpp"
#include "superres/phase2.hpp"
#include "superres/slepian.hpp"
#include "superres/spectral.hpp"

namespace superres::io {

/// Header `l,re,im`, rows l = -fc..fc, 17 significant digits.
void write_spectrum_csv(std::ostream& os, const Spectrum& s);
[[nodiscard]] std::string spectrum_csv(const Spectrum& s);

/// Parses the CSV written above. fc is inferred from the rows; when
/// `expected_fc` is positive it must match. Rows may come in any order but
/// every l in [-fc, fc] must appear exactly once.
[[nodiscard]] Spectrum read_spectrum_csv(std::istream& is, bool real_signal = true, int expected_fc = 0);
[[nodiscard]] Spectrum load_spectrum_csv(const std::filesystem::path& p, bool real_signal = true,
                                         int expected_fc = 0);
void save_spectrum_csv(const std::filesystem::path& p, const Spectrum& s);

/// {"positions": [...], "amplitudes": [...]}
[[nodiscard]] std::string spike_train_json(const SpikeTrain& x);
[[nodiscard]] SpikeTrain parse_spike_train_json(const std::string& text);
[[nodiscard]] SpikeTrain load_spike_train_json(const std::filesystem::path& p);

/// `l,ghat`
[[nodiscard]] std::string kernel_csv(const SlepianKernel& k);
/// `t,g` on an m-point grid.
[[nodiscard]] std::string kernel_profile_csv(const SlepianKernel& k, int m);

[[nodiscard]] std::string phase1_json(const Phase1Result& r);
[[nodiscard]] std::string solve_report_json(const SolveReport& r, const Phase1Result* phase1 = nullptr,
                                            std::string_view status_override = {});

[[nodiscard]] std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& content);

}  // namespace superres::io
