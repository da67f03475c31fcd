#ifndef SEE_TRIG_TRANSFORM_HPP
#define SEE_TRIG_TRANSFORM_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <fftw3.h>

namespace see {

/// Synthesis/analysis between coefficients over the real trigonometric basis
///   b_0 = 1, b_n = sqrt(2) cos(2 pi n x), b_{-n} = sqrt(2) sin(2 pi n x)
/// (modes ordered -N..N) and point values on a uniform grid of G points,
/// G a power of two with G >= 2 (2N+1). The 2x oversampling keeps analysis
/// of pairwise products of degree-N polynomials alias-free.
///
/// Each instance owns its FFTW buffers and plans; instances are not
/// thread-safe individually but distinct instances may run concurrently.
class TrigTransform {
 public:
  explicit TrigTransform(int N);
  ~TrigTransform();
  TrigTransform(const TrigTransform&) = delete;
  TrigTransform& operator=(const TrigTransform&) = delete;

  int modes_N() const { return N_; }
  std::size_t coeff_count() const { return 2 * static_cast<std::size_t>(N_) + 1; }
  std::size_t grid_size() const { return G_; }

  /// coefficients (-N..N) -> values at x_j = j/G, j = 0..G-1
  void synthesize(std::span<const double> coeffs, std::span<double> grid_values);

  /// grid values -> coefficients of the orthogonal projection onto modes -N..N
  void analyze(std::span<const double> grid_values, std::span<double> coeffs);

 private:
  int N_;
  std::size_t G_;
  double* real_buf_;
  fftw_complex* spec_buf_;
  fftw_plan plan_r2c_;
  fftw_plan plan_c2r_;
};

}  // namespace see

#endif
