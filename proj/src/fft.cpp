#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace superres::detail {

namespace {

// The FFTW planner is not re-entrant; plan creation and destruction are
// serialised, execution is not.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

using Buffer = std::unique_ptr<fftw_complex[], FftwFree>;

Buffer alloc(std::size_t n) {
  return Buffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

}  // namespace

std::vector<std::complex<double>> inverse_dft(std::span<const std::complex<double>> in) {
  const std::size_t m = in.size();
  std::vector<std::complex<double>> out(m);
  if (m == 0) return out;

  Buffer src = alloc(m);
  Buffer dst = alloc(m);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(m), src.get(), dst.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  auto* s = reinterpret_cast<std::complex<double>*>(src.get());
  std::copy(in.begin(), in.end(), s);
  fftw_execute(plan);
  auto* d = reinterpret_cast<std::complex<double>*>(dst.get());
  std::copy(d, d + m, out.begin());
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace superres::detail
