#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <limits>
#include <mutex>

#include "error.hpp"

namespace coxkern::fft {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

template <class T>
struct FftwBuffer {
  T* ptr = nullptr;
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

int checked_int(std::size_t n) {
  if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    fail(ErrorCode::invalid_argument, "transform length exceeds FFTW limits");
  }
  return static_cast<int>(n);
}

}  // namespace

std::size_t good_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

void forward(std::vector<std::complex<double>>& data) {
  if (data.empty()) return;
  const int n = checked_int(data.size());
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  PlanGuard guard;
  {
    std::lock_guard lock(planner_mutex());
    guard.plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(guard.plan);
}

std::vector<double> real_dft_real_part(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  FftwBuffer<double> in(n);
  FftwBuffer<fftw_complex> out(n / 2 + 1);
  PlanGuard guard;
  {
    std::lock_guard lock(planner_mutex());
    guard.plan = fftw_plan_dft_r2c_1d(checked_int(n), in.ptr, out.ptr, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), in.ptr);
  fftw_execute(guard.plan);
  std::vector<double> re(n);
  for (std::size_t k = 0; k <= n / 2; ++k) re[k] = out.ptr[k][0];
  for (std::size_t k = n / 2 + 1; k < n; ++k) re[k] = re[n - k];
  return re;
}

std::vector<double> lag_products(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n == 0) return std::vector<double>(max_lag + 1, 0.0);
  max_lag = std::min(max_lag, n - 1);
  // Padding to n + max_lag keeps lags 0..max_lag free of wrap-around.
  const std::size_t m = good_size(n + max_lag + 1);
  const std::size_t bins = m / 2 + 1;
  FftwBuffer<double> real(m);
  FftwBuffer<fftw_complex> spec(bins);
  PlanGuard fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    fwd.plan = fftw_plan_dft_r2c_1d(checked_int(m), real.ptr, spec.ptr, FFTW_ESTIMATE);
    inv.plan = fftw_plan_dft_c2r_1d(checked_int(m), spec.ptr, real.ptr, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), real.ptr);
  std::fill(real.ptr + n, real.ptr + m, 0.0);
  fftw_execute(fwd.plan);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = spec.ptr[k][0];
    const double im = spec.ptr[k][1];
    spec.ptr[k][0] = re * re + im * im;
    spec.ptr[k][1] = 0.0;
  }
  fftw_execute(inv.plan);
  std::vector<double> out(max_lag + 1);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k <= max_lag; ++k) out[k] = real.ptr[k] * scale;
  return out;
}

}  // namespace coxkern::fft
