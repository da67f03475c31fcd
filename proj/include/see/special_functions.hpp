#ifndef SEE_SPECIAL_FUNCTIONS_HPP
#define SEE_SPECIAL_FUNCTIONS_HPP

#include <cstddef>
#include <vector>

namespace see {

/// Natural log of the Gamma function for x > 0 (Lanczos approximation).
double log_gamma(double x);

/// Euler Beta function B(x,y) = Gamma(x)Gamma(y)/Gamma(x+y), x,y > 0.
double beta_function(double x, double y);

/// Parameters of the generalized exponential function E_{a,b},
///   E_{a,b}[x] = 1 + sum_{n>=1} x^n prod_{k=0}^{n-1} B(1-b, k(1-b)+1-a),
/// defined for a < 1, b < 1. The slot `a` is the forcing exponent and
/// `b` the kernel exponent of the singular Gronwall inequality it solves.
struct GenExpParams {
  double a = 0.0;
  double b = 0.0;
  double tolerance = 1e-12;    // relative truncation target
  std::size_t max_terms = 2'000'000;
};

struct GenExpValue {
  double value = 0.0;
  double tail_bound = 0.0;     // certified bound on the truncation remainder
  std::size_t terms = 0;       // number of series terms summed (excluding the leading 1)
};

/// Truncated series evaluation of E_{a,b}[x] with a certified geometric
/// tail bound. Stops once the current term is below tolerance*sum AND the
/// term ratio has dropped below 1 (the ratio is decreasing in n, so the
/// tail is dominated by a geometric series from that point on).
/// Throws if max_terms is exhausted before both conditions hold.
GenExpValue gen_exponential(const GenExpParams& params, double x);

struct GronwallPoint {
  double t;
  double e;        // product-integration solution of the saturated equation
  double bound;    // a t^{-alpha} E_{alpha,beta}[b t^{1-beta}]
  double slack;    // bound - e
};

struct GronwallReport {
  std::vector<GronwallPoint> points;
  bool certified = false;      // e <= bound*(1+rel_slack) at every point
  double rel_slack = 1e-6;
  double worst_ratio = 0.0;    // max e/bound over points with bound > 0
};

/// Solves the saturated Volterra equation
///   e(t) = a t^{-alpha} + b \int_0^t (t-s)^{-beta} e(s) ds
/// on (0,T] by product integration and checks the Gronwall bound
/// e(t) <= a t^{-alpha} E_{alpha,beta}[b t^{1-beta}] at every grid point.
///
/// The forcing convolution b\int (t-s)^{-beta} a s^{-alpha} ds is evaluated
/// in closed form (complete Beta moment), so only the smooth correction
/// v(t) = e(t) - a t^{-alpha} is discretized; its kernel moments over each
/// cell are exact. The correction uses left-endpoint values, which keeps
/// the numerical solution below the exact one (v is nondecreasing).
GronwallReport gronwall_certify(double a, double b, double alpha, double beta,
                                double T, const std::vector<double>& grid,
                                std::size_t subintervals = 4096,
                                double rel_slack = 1e-6);

}  // namespace see

#endif
