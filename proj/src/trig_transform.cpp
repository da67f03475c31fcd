#include "see/trig_transform.hpp"

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace see {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t g = 1;
  while (g < n) g <<= 1;
  return g;
}

}  // namespace

TrigTransform::TrigTransform(int N) : N_(N) {
  if (N < 1) throw std::invalid_argument("TrigTransform: requires N >= 1");
  G_ = next_pow2(2 * (2 * static_cast<std::size_t>(N) + 1));
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_buf_ = fftw_alloc_real(G_);
  spec_buf_ = fftw_alloc_complex(G_ / 2 + 1);
  plan_r2c_ = fftw_plan_dft_r2c_1d(static_cast<int>(G_), real_buf_, spec_buf_,
                                   FFTW_ESTIMATE);
  plan_c2r_ = fftw_plan_dft_c2r_1d(static_cast<int>(G_), spec_buf_, real_buf_,
                                   FFTW_ESTIMATE);
  if (!plan_r2c_ || !plan_c2r_)
    throw std::runtime_error("TrigTransform: FFTW plan creation failed");
}

TrigTransform::~TrigTransform() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan_r2c_);
  fftw_destroy_plan(plan_c2r_);
  fftw_free(real_buf_);
  fftw_free(spec_buf_);
}

void TrigTransform::synthesize(std::span<const double> coeffs,
                               std::span<double> grid_values) {
  const std::size_t K = coeff_count();
  if (coeffs.size() != K || grid_values.size() != G_)
    throw std::invalid_argument("TrigTransform::synthesize: size mismatch");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::memset(spec_buf_, 0, sizeof(fftw_complex) * (G_ / 2 + 1));
  // coeffs index i corresponds to mode i - N
  spec_buf_[0][0] = coeffs[static_cast<std::size_t>(N_)];
  for (int n = 1; n <= N_; ++n) {
    const double c_cos = coeffs[static_cast<std::size_t>(N_ + n)];
    const double c_sin = coeffs[static_cast<std::size_t>(N_ - n)];
    spec_buf_[n][0] = inv_sqrt2 * c_cos;
    spec_buf_[n][1] = -inv_sqrt2 * c_sin;
  }
  fftw_execute_dft_c2r(plan_c2r_, spec_buf_, real_buf_);
  std::memcpy(grid_values.data(), real_buf_, sizeof(double) * G_);
}

void TrigTransform::analyze(std::span<const double> grid_values,
                            std::span<double> coeffs) {
  const std::size_t K = coeff_count();
  if (coeffs.size() != K || grid_values.size() != G_)
    throw std::invalid_argument("TrigTransform::analyze: size mismatch");
  std::memcpy(real_buf_, grid_values.data(), sizeof(double) * G_);
  fftw_execute_dft_r2c(plan_r2c_, real_buf_, spec_buf_);
  const double invG = 1.0 / static_cast<double>(G_);
  const double sqrt2_invG = std::sqrt(2.0) * invG;
  coeffs[static_cast<std::size_t>(N_)] = spec_buf_[0][0] * invG;
  for (int n = 1; n <= N_; ++n) {
    coeffs[static_cast<std::size_t>(N_ + n)] = sqrt2_invG * spec_buf_[n][0];
    coeffs[static_cast<std::size_t>(N_ - n)] = -sqrt2_invG * spec_buf_[n][1];
  }
}

}  // namespace see
