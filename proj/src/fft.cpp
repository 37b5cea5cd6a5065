#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace clip::detail {

namespace {

// FFTW planning is not thread-safe; plans are cached per size and reused.
// FFTW_ESTIMATE keeps planning deterministic (no runtime measurement).
std::mutex g_plan_mutex;

struct RfftPlan {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  fftw_complex* out = nullptr;
};

struct IrfftPlan {
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  double* out = nullptr;
};

RfftPlan& rfft_plan(int n) {
  static std::map<int, RfftPlan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  RfftPlan p;
  p.in = fftw_alloc_real(static_cast<std::size_t>(n));
  p.out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  p.plan = fftw_plan_dft_r2c_1d(n, p.in, p.out, FFTW_ESTIMATE);
  if (!p.plan) throw std::runtime_error("fftw: r2c plan failed");
  return cache.emplace(n, p).first->second;
}

IrfftPlan& irfft_plan(int n) {
  static std::map<int, IrfftPlan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  IrfftPlan p;
  p.in = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  p.out = fftw_alloc_real(static_cast<std::size_t>(n));
  p.plan = fftw_plan_dft_c2r_1d(n, p.in, p.out, FFTW_ESTIMATE);
  if (!p.plan) throw std::runtime_error("fftw: c2r plan failed");
  return cache.emplace(n, p).first->second;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& input) {
  const int n = static_cast<int>(input.size());
  if (n == 0) return {};
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  RfftPlan& p = rfft_plan(n);
  for (int i = 0; i < n; ++i) p.in[i] = input[i];
  fftw_execute(p.plan);
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(n / 2 + 1));
  for (std::size_t k = 0; k < bins.size(); ++k)
    bins[k] = {p.out[k][0], p.out[k][1]};
  return bins;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          int n) {
  if (n <= 0 || bins.size() != static_cast<std::size_t>(n / 2 + 1))
    throw std::invalid_argument("irfft: bin count does not match length");
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  IrfftPlan& p = irfft_plan(n);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    p.in[k][0] = bins[k].real();
    p.in[k][1] = bins[k].imag();
  }
  fftw_execute(p.plan);
  std::vector<double> out(static_cast<std::size_t>(n));
  const double inv = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] = p.out[i] * inv;
  return out;
}

}  // namespace clip::detail
