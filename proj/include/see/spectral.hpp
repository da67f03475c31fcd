#ifndef SEE_SPECTRAL_HPP
#define SEE_SPECTRAL_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace see {

/// A diagonal generator A over a finite ordered mode set: A acts as
/// -lambda_b on mode b, and eta is a spectral shift with eta + lambda_b > 0
/// for every mode, so the fractional powers (eta - A)^r are well defined.
class DiagonalOperator {
 public:
  /// Periodic Laplacian truncation: modes {-N,...,N}, lambda_n = nu n^2.
  static DiagonalOperator periodic_laplacian(int N, double nu, double eta);

  /// Operator with explicitly listed eigenvalues.
  static DiagonalOperator explicit_spectrum(std::vector<int> modes,
                                            std::vector<double> lambdas,
                                            double eta);

  std::size_t size() const { return lambdas_.size(); }
  int mode_id(std::size_t i) const { return modes_[i]; }
  double lambda(std::size_t i) const { return lambdas_[i]; }
  const std::vector<int>& modes() const { return modes_; }
  const std::vector<double>& lambdas() const { return lambdas_; }
  double eta() const { return eta_; }
  double min_lambda() const;
  double max_lambda() const;
  std::optional<std::size_t> index_of(int mode) const;

  bool is_periodic() const { return periodic_; }
  int periodic_modes() const { return N_; }   // N of {-N,...,N}; -1 if not periodic
  double nu() const { return nu_; }

  nlohmann::json to_json() const;
  static DiagonalOperator from_json(const nlohmann::json& j);

 private:
  DiagonalOperator() = default;
  void validate() const;

  std::vector<int> modes_;
  std::vector<double> lambdas_;
  double eta_ = 0.0;
  bool periodic_ = false;
  int N_ = -1;
  double nu_ = 0.0;
};

/// A truncated coefficient vector over the operator's modes, tagged with
/// the interpolation-space index r of the space H_r it lives in.
struct SpectralField {
  std::vector<double> coeffs;
  double space_index = 0.0;
};

SpectralField zero_field(const DiagonalOperator& op, double space_index = 0.0);

/// || v ||_{H_r} = ( sum_b (eta+lambda_b)^{2r} |c_b|^2 )^{1/2}
double hr_norm(const SpectralField& v, const DiagonalOperator& op, double r);
double hr_norm(const std::vector<double>& coeffs, const DiagonalOperator& op, double r);

/// e^{tA} v, coefficient-wise multiplication by e^{-lambda_b t}; t >= 0.
SpectralField semigroup_apply(const DiagonalOperator& op, double t,
                              const SpectralField& v);

/// (eta - A)^r v, coefficient-wise multiplication by (eta+lambda_b)^r.
/// The space index drops by r: (eta-A)^r maps H_s onto H_{s-r}.
SpectralField fractional_power_apply(const DiagonalOperator& op, double r,
                                     const SpectralField& v);

/// Zeroes all coefficients outside `keep` (a subset of the operator's modes).
SpectralField galerkin_project(const SpectralField& v, const DiagonalOperator& op,
                               const std::vector<int>& keep);

/// chi^{r,T} = sup_{t in (0,T]} t^r ||(eta-A)^r e^{tA}||_{L(H)}, r in [0,1].
/// Per mode the sup is found from the closed-form stationary point
/// t* = r/lambda clamped to (0,T], with the t->0 limit handled when the
/// sup is attained only in the limit.
double chi_constant(const DiagonalOperator& op, double r, double T);

/// kappa^{s,T} = sup_{t in (0,T]} t^{-s} ||(eta-A)^{-s}(e^{tA} - Id)||_{L(H)},
/// s in [0,1]. For lambda > 0 and s = 1 the per-mode sup equals the t->0
/// limit lambda/(eta+lambda); for s in (0,1) the interior stationary point
/// solves a transcendental equation and is located by bisection.
double kappa_constant(const DiagonalOperator& op, double s, double T);

}  // namespace see

#endif
