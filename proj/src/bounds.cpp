#include "see/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "see/special_functions.hpp"

namespace see {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// products with the convention 0 * inf = 0 (a vanishing factor means the
// bounded quantity is genuinely zero, whatever the constant)
double prod0(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

double t_or_one_pow(double T, double e) { return std::pow(std::max(T, 1.0), e); }

}  // namespace

void SingularityProfile::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("profile: alpha must lie in [0,1)");
  if (!(alpha_hat < 1.0)) throw std::invalid_argument("profile: alpha_hat must be < 1");
  if (!(beta >= 0.0 && beta < 0.5))
    throw std::invalid_argument("profile: beta must lie in [0,1/2)");
  if (!(beta_hat < 0.5)) throw std::invalid_argument("profile: beta_hat must be < 1/2");
  if (L0 < 0.0 || L0_hat < 0.0 || L1 < 0.0 || L1_hat < 0.0)
    throw std::invalid_argument("profile: Lipschitz constants must be nonnegative");
  if (!(p >= 2.0)) throw std::invalid_argument("profile: p must be >= 2");
  if (!(T > 0.0)) throw std::invalid_argument("profile: T must be > 0");
  if (L1 > 0.0 && !(alpha + alpha_hat < 1.5))
    throw std::invalid_argument(
        "profile: standing assumption 1_{(0,inf)}(L1) (alpha+alpha_hat) < 3/2 violated");
}

nlohmann::json SingularityProfile::to_json() const {
  return nlohmann::json{{"alpha", alpha},   {"alpha_hat", alpha_hat},
                        {"beta", beta},     {"beta_hat", beta_hat},
                        {"L0", L0},         {"L0_hat", L0_hat},
                        {"L1", L1},         {"L1_hat", L1_hat},
                        {"p", p},           {"T", T}};
}

SingularityProfile SingularityProfile::from_json(const nlohmann::json& j) {
  SingularityProfile pr;
  pr.alpha = j.value("alpha", 0.0);
  pr.alpha_hat = j.value("alpha_hat", 0.0);
  pr.beta = j.value("beta", 0.0);
  pr.beta_hat = j.value("beta_hat", 0.0);
  pr.L0 = j.value("L0", 0.0);
  pr.L0_hat = j.value("L0_hat", 0.0);
  pr.L1 = j.value("L1", 0.0);
  pr.L1_hat = j.value("L1_hat", 0.0);
  pr.p = j.value("p", 2.0);
  pr.T = j.value("T", 1.0);
  pr.validate();
  return pr;
}

double theta(const SingularityProfile& pr, const DiagonalOperator& op,
             double lambda) {
  pr.validate();
  if (!(lambda < 1.0)) throw std::invalid_argument("theta: requires lambda < 1");
  const double T = pr.T;
  if (pr.L1 > 0.0 && lambda < 0.5) {
    const double chi_a = chi_constant(op, pr.alpha, T);
    const double chi_b = chi_constant(op, pr.beta, T);
    const double drift_part = chi_a * pr.L0 * std::sqrt(2.0) *
                              std::pow(T, 1.0 - pr.alpha) /
                              std::sqrt(1.0 - pr.alpha);
    const double diff_part =
        chi_b * pr.L1 * std::sqrt(pr.p * (pr.p - 1.0) * std::pow(T, 1.0 - 2.0 * pr.beta));
    const double arg = (drift_part + diff_part) * (drift_part + diff_part);
    GenExpParams ep;
    ep.a = 2.0 * lambda;
    ep.b = std::max(pr.alpha, 2.0 * pr.beta);
    return std::sqrt(2.0) * std::sqrt(gen_exponential(ep, arg).value);
  }
  if (pr.L1 == 0.0) {
    const double chi_a = chi_constant(op, pr.alpha, T);
    GenExpParams ep;
    ep.a = lambda;
    ep.b = pr.alpha;
    return gen_exponential(ep, chi_a * pr.L0 * std::pow(T, 1.0 - pr.alpha)).value;
  }
  return kInf;
}

double apriori_bound(const SingularityProfile& pr, const DiagonalOperator& op,
                     double delta, double lambda, double xi_factor) {
  pr.validate();
  if (!(xi_factor >= 0.0))
    throw std::invalid_argument("apriori_bound: requires xi_factor >= 0");
  if (!(delta < pr.lambda_sup()))
    throw std::invalid_argument("apriori_bound: delta outside admissible window");
  const double lo =
      std::max({delta, pr.alpha + pr.alpha_hat - 1.0, pr.beta + pr.beta_hat - 0.5});
  if (!(lambda >= lo && lambda < 1.0))
    throw std::invalid_argument("apriori_bound: lambda outside admissible window");
  const double T = pr.T;
  const double th = theta(pr, op, lambda);
  const double chi_a = chi_constant(op, pr.alpha, T);
  const double chi_b = chi_constant(op, pr.beta, T);
  const double bracket =
      xi_factor / std::pow(T, delta) +
      chi_a * pr.L0_hat * beta_function(1.0 - pr.alpha, 1.0 - pr.alpha_hat) /
          std::pow(T, pr.alpha + pr.alpha_hat - 1.0) +
      chi_b * pr.L1_hat *
          std::sqrt(pr.p * (pr.p - 1.0) *
                    beta_function(1.0 - 2.0 * pr.beta, 1.0 - 2.0 * pr.beta_hat)) /
          (std::sqrt(2.0) * std::pow(T, pr.beta + pr.beta_hat - 0.5));
  return prod0(std::pow(T, lambda) * bracket, th);
}

double initial_perturbation_bound(const SingularityProfile& pr,
                                  const DiagonalOperator& op, double delta,
                                  double lambda, double x_minus_y_norm) {
  pr.validate();
  if (!(delta >= 0.0 && delta < pr.lambda_sup()))
    throw std::invalid_argument("initial_perturbation_bound: invalid delta");
  if (!(lambda >= delta && lambda < 1.0))
    throw std::invalid_argument("initial_perturbation_bound: invalid lambda");
  if (!(x_minus_y_norm >= 0.0))
    throw std::invalid_argument("initial_perturbation_bound: negative norm");
  const double chi_d = chi_constant(op, delta, pr.T);
  const double factor =
      chi_d * std::pow(pr.T, lambda - delta) * x_minus_y_norm;
  return prod0(factor, theta(pr, op, lambda));
}

double drift_integral_bound(const SingularityProfile& pr, const DiagonalOperator& op,
                            double lambda, double K) {
  pr.validate();
  if (!(lambda < 1.0))
    throw std::invalid_argument("drift_integral_bound: requires lambda < 1");
  if (!(K >= 0.0)) throw std::invalid_argument("drift_integral_bound: requires K >= 0");
  const double m = std::max(lambda, pr.alpha_hat);
  return (pr.L0_hat + pr.L0 * K) * t_or_one_pow(pr.T, std::abs(lambda - pr.alpha_hat)) *
         beta_function(1.0 - pr.alpha, 1.0 - m) * chi_constant(op, pr.alpha, pr.T);
}

StochIntegralBound stoch_integral_bound(const SingularityProfile& pr,
                                        const DiagonalOperator& op, double lambda,
                                        double K) {
  pr.validate();
  const double ind_pos = pr.diffusion_lipschitz() ? 1.0 : 0.0;
  if (!(lambda * ind_pos < 0.5))
    throw std::invalid_argument(
        "stoch_integral_bound: requires lambda 1_{(0,inf)}(L1) < 1/2");
  if (!(K >= 0.0)) throw std::invalid_argument("stoch_integral_bound: requires K >= 0");
  StochIntegralBound out;
  out.rho = std::max(lambda + (pr.beta_hat - lambda) * (1.0 - ind_pos), pr.beta_hat);
  out.value = std::sqrt(0.5 * pr.p * (pr.p - 1.0) *
                        beta_function(1.0 - 2.0 * pr.beta, 1.0 - 2.0 * out.rho)) *
              t_or_one_pow(pr.T, std::abs(lambda - pr.beta_hat) * ind_pos) *
              chi_constant(op, pr.beta, pr.T) * (pr.L1_hat + pr.L1 * K);
  return out;
}

double temporal_holder_bound(const SingularityProfile& pr, const DiagonalOperator& op,
                             double delta, double lambda, double varrho, double s,
                             double t, double xi_norm, double K) {
  pr.validate();
  if (!(varrho >= 0.0 && varrho < std::min(1.0 - pr.alpha, 0.5 - pr.beta)))
    throw std::invalid_argument(
        "temporal_holder_bound: varrho outside [0, min{1-alpha, 1/2-beta})");
  if (!(0.0 < s && s < t && t <= pr.T))
    throw std::invalid_argument("temporal_holder_bound: requires 0 < s < t <= T");
  if (!(lambda < 1.0))
    throw std::invalid_argument("temporal_holder_bound: requires lambda < 1");
  const double dplus = std::max(delta, 0.0);
  if (varrho + dplus > 1.0)
    throw std::invalid_argument("temporal_holder_bound: varrho + max{delta,0} > 1");
  const double ind_pos = pr.diffusion_lipschitz() ? 1.0 : 0.0;
  const double rho =
      std::max(lambda + (pr.beta_hat - lambda) * (1.0 - ind_pos), pr.beta_hat);
  if (!(rho < 0.5))
    throw std::invalid_argument("temporal_holder_bound: rho >= 1/2");
  const double dt = t - s;
  const double kap = kappa_constant(op, varrho, pr.T);

  // initial-value group
  const double g_init = kap * chi_constant(op, varrho + dplus, pr.T) * xi_norm /
                        std::pow(s, varrho + dplus);

  // drift group
  const double m = std::max(lambda, pr.alpha_hat);
  const double drift_pref =
      t_or_one_pow(pr.T, std::abs(lambda - pr.alpha_hat)) * (pr.L0_hat + pr.L0 * K);
  const double drift_bracket =
      chi_constant(op, pr.alpha, pr.T) * std::pow(dt, 1.0 - pr.alpha - varrho) /
          ((1.0 - pr.alpha) * std::min(std::pow(s, m), std::pow(t, m))) +
      kap * chi_constant(op, varrho + pr.alpha, pr.T) *
          beta_function(1.0 - pr.alpha - varrho, 1.0 - m) /
          std::pow(s, varrho + pr.alpha + m - 1.0);

  // diffusion group
  const double diff_pref = std::sqrt(0.5 * pr.p * (pr.p - 1.0)) *
                           t_or_one_pow(pr.T, std::abs(lambda - pr.beta_hat) * ind_pos) *
                           (pr.L1_hat + pr.L1 * K);
  const double diff_bracket =
      chi_constant(op, pr.beta, pr.T) * std::pow(dt, 0.5 - pr.beta - varrho) /
          (std::min(std::pow(s, rho), std::pow(t, rho)) *
           std::sqrt(1.0 - 2.0 * pr.beta)) +
      kap * chi_constant(op, varrho + pr.beta, pr.T) *
          std::sqrt(beta_function(1.0 - 2.0 * pr.beta - 2.0 * varrho, 1.0 - 2.0 * rho)) /
          std::pow(s, rho + varrho + pr.beta - 0.5);

  return std::pow(dt, varrho) *
         (g_init + drift_pref * drift_bracket + diff_pref * diff_bracket);
}

double perturbation_rhs(const SingularityProfile& pr, const DiagonalOperator& op,
                        double lambda, double defect) {
  pr.validate();
  if (!(defect >= 0.0)) throw std::invalid_argument("perturbation_rhs: negative defect");
  return prod0(defect, theta(pr, op, lambda));
}

}  // namespace see
