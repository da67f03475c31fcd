#ifndef SEE_BOUNDS_HPP
#define SEE_BOUNDS_HPP

#include <string>

#include "see/spectral.hpp"

namespace see {

/// The singularity/Lipschitz profile of one SEE instance: drift constants
/// (alpha, alpha_hat, L0, L0_hat), diffusion constants (beta, beta_hat,
/// L1, L1_hat), moment order p and horizon T.
struct SingularityProfile {
  double alpha = 0.0;      // in [0,1)
  double alpha_hat = 0.0;  // < 1
  double beta = 0.0;       // in [0,1/2)
  double beta_hat = 0.0;   // < 1/2
  double L0 = 0.0;
  double L0_hat = 0.0;
  double L1 = 0.0;
  double L1_hat = 0.0;
  double p = 2.0;          // >= 2
  double T = 1.0;          // > 0

  /// Indicator 1_{(0,infty)}(L1): whether the diffusion is non-constant.
  bool diffusion_lipschitz() const { return L1 > 0.0; }
  /// Admissible upper end (1/2)(1 + 1_{{0}}(L1)) of the weight windows.
  double lambda_sup() const { return diffusion_lipschitz() ? 0.5 : 1.0; }

  void validate() const;

  nlohmann::json to_json() const;
  static SingularityProfile from_json(const nlohmann::json& j);
};

/// One experiment's pairing of a theoretical bound with an empirical
/// estimate. `theoretical` may be +infinity (a vacuous but valid bound).
struct BoundReport {
  std::string name;
  double theoretical = 0.0;
  double empirical = 0.0;
  double mc_stderr = 0.0;
  bool satisfied = false;
  std::string metadata;  // free-form JSON: grid, seed, dimensions, slack
};

/// Theta^{alpha,beta,lambda}(L0, L1), the growth constant of the
/// perturbation estimate. Three branches:
///   (i)  lambda < 1/2 and L1 > 0:
///        sqrt(2) ( E_{2 lambda, max{alpha, 2 beta}}[ |chi^alpha L0 sqrt(2)
///          T^{1-alpha} / sqrt(1-alpha) + chi^beta L1 sqrt(p(p-1) T^{1-2beta})|^2 ] )^{1/2}
///   (ii) L1 = 0: E_{lambda, alpha}[ chi^alpha L0 T^{1-alpha} ]
///   (iii) otherwise: +infinity.
/// Requires lambda < 1.
double theta(const SingularityProfile& profile, const DiagonalOperator& op,
             double lambda);

/// A priori bound of the existence theorem on sup_t t^lambda ||X_t||_{L^p}:
///   T^lambda Theta(lambda) [ xi_factor/T^delta
///     + chi^alpha L0_hat B(1-alpha, 1-alpha_hat) / T^{alpha+alpha_hat-1}
///     + chi^beta L1_hat sqrt(p(p-1) B(1-2beta, 1-2beta_hat)) / (sqrt(2) T^{beta+beta_hat-1/2}) ]
/// where xi_factor = sup_t t^delta ||e^{tA} xi||_{L^p}.
double apriori_bound(const SingularityProfile& profile, const DiagonalOperator& op,
                     double delta, double lambda, double xi_factor);

/// Initial-condition perturbation bound:
///   chi^{delta,T} T^{lambda-delta} ||X_0^1 - X_0^2||_{L^p(H_{-delta})} Theta(lambda).
double initial_perturbation_bound(const SingularityProfile& profile,
                                  const DiagonalOperator& op, double delta,
                                  double lambda, double x_minus_y_norm);

/// Bound on sup_t t^{max{lambda,alpha_hat}+alpha-1} || int_0^t e^{(t-s)A} F(s,Y_s) ds ||:
///   (L0_hat + L0 K) (T v 1)^{|lambda-alpha_hat|} B(1-alpha, 1-max{lambda,alpha_hat}) chi^{alpha,T}
/// with K = sup_t t^lambda ||Y_t||_{L^p}. Requires lambda < 1.
double drift_integral_bound(const SingularityProfile& profile,
                            const DiagonalOperator& op, double lambda, double K);

struct StochIntegralBound {
  double value = 0.0;
  double rho = 0.0;  // max{lambda + (beta_hat-lambda) 1_{{0}}(L1), beta_hat}
};

/// Bound on sup_t t^{rho+beta-1/2} || int_0^t e^{(t-s)A} B(s,Y_s) dW_s ||:
///   sqrt(p(p-1)/2 B(1-2beta, 1-2rho)) (T v 1)^{|lambda-beta_hat| 1_{(0,inf)}(L1)}
///   chi^{beta,T} (L1_hat + L1 K).
/// Requires lambda 1_{(0,inf)}(L1) < 1/2.
StochIntegralBound stoch_integral_bound(const SingularityProfile& profile,
                                        const DiagonalOperator& op, double lambda,
                                        double K);

/// Temporal Hoelder bound of the existence theorem on ||X_s - X_t||_{L^p}
/// for 0 < s < t <= T and 0 <= varrho < min{1-alpha, 1/2-beta}; xi_norm is
/// ||xi||_{L^p(H_{-max{delta,0}})} and K = sup_u u^lambda ||X_u||_{L^p}.
double temporal_holder_bound(const SingularityProfile& profile,
                             const DiagonalOperator& op, double delta,
                             double lambda, double varrho, double s, double t,
                             double xi_norm, double K);

/// RHS of the perturbation estimate: Theta(lambda) times the weighted sup
/// of the mild-equation residual difference. A zero defect yields zero.
double perturbation_rhs(const SingularityProfile& profile,
                        const DiagonalOperator& op, double lambda, double defect);

}  // namespace see

#endif
