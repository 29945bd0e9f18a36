#pragma once

#include <complex>
#include <span>
#include <vector>

namespace superres::detail {

/// out[k] = sum_m in[m] exp(+i 2 pi m k / M), M = in.size().
std::vector<std::complex<double>> inverse_dft(std::span<const std::complex<double>> in);

}  // namespace superres::detail
