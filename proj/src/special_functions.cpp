#include "see/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace see {

namespace {

// Lanczos coefficients, g = 7, n = 9 (double-precision grade).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_log_gamma(double x) {
  // valid for x >= 0.5
  double a = kLanczos[0];
  const double t = x + kLanczosG - 0.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + static_cast<double>(i) - 1.0);
  constexpr double half_log_two_pi = 0.91893853320467274178;  // log(2*pi)/2
  return half_log_two_pi + (x - 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("log_gamma: requires x > 0");
  if (x < 0.5) {
    // reflection: Gamma(x)Gamma(1-x) = pi / sin(pi x)
    constexpr double log_pi = 1.1447298858494001741;
    return log_pi - std::log(std::sin(M_PI * x)) - lanczos_log_gamma(1.0 - x);
  }
  return lanczos_log_gamma(x);
}

double beta_function(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0))
    throw std::invalid_argument("beta_function: requires positive arguments");
  return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

GenExpValue gen_exponential(const GenExpParams& params, double x) {
  if (!(params.a < 1.0) || !(params.b < 1.0))
    throw std::invalid_argument("gen_exponential: requires a < 1 and b < 1");
  if (!(x >= 0.0)) throw std::invalid_argument("gen_exponential: requires x >= 0");
  if (x == 0.0) return {1.0, 0.0, 0};

  const double one_minus_b = 1.0 - params.b;
  const double lg_one_minus_b = log_gamma(one_minus_b);
  // ratio(n) = x * B(1-b, n(1-b) + 1-a), the factor taking term n to term n+1;
  // B(1-b, z) is decreasing in z, so ratio(n) is decreasing in n.
  auto ratio = [&](std::size_t n) {
    const double z = static_cast<double>(n) * one_minus_b + 1.0 - params.a;
    return x * std::exp(lg_one_minus_b + log_gamma(z) - log_gamma(one_minus_b + z));
  };

  double sum = 1.0;
  double term = 1.0;
  std::size_t n = 0;
  while (true) {
    const double q = ratio(n);
    term *= q;
    ++n;
    sum += term;
    if (!std::isfinite(sum))
      return {std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), n};
    if (term <= params.tolerance * sum) {
      const double q_next = ratio(n);
      if (q_next < 1.0) {
        return {sum, term * q_next / (1.0 - q_next), n};
      }
    }
    if (n >= params.max_terms)
      throw std::runtime_error(
          "gen_exponential: max_terms exhausted before the stopping rule held");
  }
}

GronwallReport gronwall_certify(double a, double b, double alpha, double beta,
                                double T, const std::vector<double>& grid,
                                std::size_t subintervals, double rel_slack) {
  if (!(alpha < 1.0) || !(beta < 1.0))
    throw std::invalid_argument("gronwall_certify: requires alpha < 1 and beta < 1");
  if (!(a >= 0.0) || !(b >= 0.0) || !(T > 0.0))
    throw std::invalid_argument("gronwall_certify: requires a,b >= 0 and T > 0");
  for (double t : grid)
    if (!(t > 0.0 && t <= T))
      throw std::invalid_argument("gronwall_certify: grid must lie in (0,T]");

  const std::size_t K = subintervals;
  const double h = T / static_cast<double>(K);
  const double omb = 1.0 - beta;
  const double oma = 1.0 - alpha;
  const double forcing_moment = beta_function(oma, omb);  // \int_0^1 u^{-alpha}(1-u)^{-beta} du

  // forcing of the correction equation: f(t) = a b B(1-alpha,1-beta) t^{1-alpha-beta}
  auto forcing = [&](double t) {
    return a * b * forcing_moment * std::pow(t, oma - beta);
  };

  // kernel cell moments on the uniform grid: W[d] = \int over one cell at lag d
  // of (t-s)^{-beta} ds, exact.
  std::vector<double> W(K);
  const double hpow = std::pow(h, omb) / omb;
  for (std::size_t d = 0; d < K; ++d) {
    const double dd = static_cast<double>(d);
    W[d] = hpow * (std::pow(dd + 1.0, omb) - std::pow(dd, omb));
  }

  // left-endpoint product integration for v (v[0] = v(0) = 0)
  std::vector<double> v(K + 1, 0.0);
  for (std::size_t i = 1; i <= K; ++i) {
    double conv = 0.0;
    for (std::size_t j = 1; j <= i; ++j) conv += v[j - 1] * W[i - j];
    v[i] = forcing(static_cast<double>(i) * h) + b * conv;
  }

  // evaluate e(t) = a t^{-alpha} + f(t) + b \int_0^t (t-s)^{-beta} v_pc(s) ds
  // at an arbitrary t, with v_pc the left-endpoint piecewise-constant v.
  auto evaluate = [&](double t) {
    double conv = 0.0;
    const std::size_t last = std::min<std::size_t>(
        K, static_cast<std::size_t>(std::ceil(t / h)));
    for (std::size_t j = 1; j <= last; ++j) {
      const double s_lo = static_cast<double>(j - 1) * h;
      if (s_lo >= t) break;
      const double s_hi = std::min(static_cast<double>(j) * h, t);
      const double w = (std::pow(t - s_lo, omb) - std::pow(t - s_hi, omb)) / omb;
      conv += v[j - 1] * w;
    }
    return a * std::pow(t, -alpha) + forcing(t) + b * conv;
  };

  GronwallReport report;
  report.rel_slack = rel_slack;
  report.certified = true;
  GenExpParams ep;
  ep.a = alpha;
  ep.b = beta;
  for (double t : grid) {
    const double e_num = evaluate(t);
    const double bound =
        a * std::pow(t, -alpha) * gen_exponential(ep, b * std::pow(t, omb)).value;
    const double slack = bound - e_num;
    report.points.push_back({t, e_num, bound, slack});
    if (bound > 0.0) report.worst_ratio = std::max(report.worst_ratio, e_num / bound);
    const bool ok = e_num <= bound * (1.0 + rel_slack) + 1e-300;
    report.certified = report.certified && ok;
  }
  return report;
}

}  // namespace see
