#include "see/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace see {

DiagonalOperator DiagonalOperator::periodic_laplacian(int N, double nu, double eta) {
  if (N < 1) throw std::invalid_argument("periodic_laplacian: requires N >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("periodic_laplacian: requires nu > 0");
  if (!(eta > 0.0)) throw std::invalid_argument("periodic_laplacian: requires eta > 0");
  DiagonalOperator op;
  op.eta_ = eta;
  op.periodic_ = true;
  op.N_ = N;
  op.nu_ = nu;
  op.modes_.reserve(2 * static_cast<std::size_t>(N) + 1);
  op.lambdas_.reserve(2 * static_cast<std::size_t>(N) + 1);
  for (int n = -N; n <= N; ++n) {
    op.modes_.push_back(n);
    op.lambdas_.push_back(nu * static_cast<double>(n) * static_cast<double>(n));
  }
  op.validate();
  return op;
}

DiagonalOperator DiagonalOperator::explicit_spectrum(std::vector<int> modes,
                                                     std::vector<double> lambdas,
                                                     double eta) {
  if (modes.size() != lambdas.size())
    throw std::invalid_argument("explicit_spectrum: mode/eigenvalue size mismatch");
  DiagonalOperator op;
  op.modes_ = std::move(modes);
  op.lambdas_ = std::move(lambdas);
  op.eta_ = eta;
  op.validate();
  return op;
}

void DiagonalOperator::validate() const {
  if (modes_.empty()) throw std::invalid_argument("DiagonalOperator: empty mode set");
  std::set<int> seen(modes_.begin(), modes_.end());
  if (seen.size() != modes_.size())
    throw std::invalid_argument("DiagonalOperator: duplicate modes");
  for (double l : lambdas_)
    if (!(eta_ + l > 0.0))
      throw std::invalid_argument("DiagonalOperator: eta + lambda_b must be > 0");
}

double DiagonalOperator::min_lambda() const {
  return *std::min_element(lambdas_.begin(), lambdas_.end());
}

double DiagonalOperator::max_lambda() const {
  return *std::max_element(lambdas_.begin(), lambdas_.end());
}

std::optional<std::size_t> DiagonalOperator::index_of(int mode) const {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i] == mode) return i;
  return std::nullopt;
}

nlohmann::json DiagonalOperator::to_json() const {
  nlohmann::json j;
  if (periodic_) {
    j["kind"] = "periodic_laplacian";
    j["N"] = N_;
    j["nu"] = nu_;
    j["eta"] = eta_;
  } else {
    j["kind"] = "explicit";
    j["eta"] = eta_;
    j["modes"] = modes_;
    j["eigenvalues"] = lambdas_;
  }
  return j;
}

DiagonalOperator DiagonalOperator::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "periodic_laplacian") {
    return periodic_laplacian(j.at("N").get<int>(), j.at("nu").get<double>(),
                              j.at("eta").get<double>());
  }
  if (kind == "explicit") {
    auto lambdas = j.at("eigenvalues").get<std::vector<double>>();
    std::vector<int> modes;
    if (j.contains("modes")) {
      modes = j.at("modes").get<std::vector<int>>();
    } else {
      for (std::size_t i = 0; i < lambdas.size(); ++i)
        modes.push_back(static_cast<int>(i) + 1);
    }
    return explicit_spectrum(std::move(modes), std::move(lambdas),
                             j.at("eta").get<double>());
  }
  throw std::invalid_argument("DiagonalOperator::from_json: unknown kind " + kind);
}

SpectralField zero_field(const DiagonalOperator& op, double space_index) {
  return {std::vector<double>(op.size(), 0.0), space_index};
}

double hr_norm(const std::vector<double>& coeffs, const DiagonalOperator& op,
               double r) {
  if (coeffs.size() != op.size())
    throw std::invalid_argument("hr_norm: field not indexed by the operator's modes");
  double s = 0.0;
  if (r == 0.0) {
    for (double c : coeffs) s += c * c;
  } else {
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const double w = std::pow(op.eta() + op.lambda(i), 2.0 * r);
      s += w * coeffs[i] * coeffs[i];
    }
  }
  return std::sqrt(s);
}

double hr_norm(const SpectralField& v, const DiagonalOperator& op, double r) {
  return hr_norm(v.coeffs, op, r);
}

SpectralField semigroup_apply(const DiagonalOperator& op, double t,
                              const SpectralField& v) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: requires t >= 0");
  if (v.coeffs.size() != op.size())
    throw std::invalid_argument("semigroup_apply: field/operator size mismatch");
  SpectralField out = v;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i)
    out.coeffs[i] *= std::exp(-op.lambda(i) * t);
  return out;
}

SpectralField fractional_power_apply(const DiagonalOperator& op, double r,
                                     const SpectralField& v) {
  if (v.coeffs.size() != op.size())
    throw std::invalid_argument("fractional_power_apply: field/operator size mismatch");
  SpectralField out = v;
  out.space_index = v.space_index - r;
  if (r == 0.0) return out;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i)
    out.coeffs[i] *= std::pow(op.eta() + op.lambda(i), r);
  return out;
}

SpectralField galerkin_project(const SpectralField& v, const DiagonalOperator& op,
                               const std::vector<int>& keep) {
  if (v.coeffs.size() != op.size())
    throw std::invalid_argument("galerkin_project: field/operator size mismatch");
  for (int m : keep)
    if (!op.index_of(m))
      throw std::invalid_argument("galerkin_project: subset not contained in mode set");
  SpectralField out = zero_field(op, v.space_index);
  for (int m : keep) {
    const std::size_t i = *op.index_of(m);
    out.coeffs[i] = v.coeffs[i];
  }
  return out;
}

namespace {

// sup_{t in (0,T]} t^r (eta+lambda)^r e^{-lambda t} for one mode, r in [0,1]
double chi_mode(double lambda, double eta, double r, double T) {
  const double w = eta + lambda;
  if (r == 0.0) {
    // sup of e^{-lambda t}: the t->0 limit 1 when lambda >= 0, else at T
    return lambda >= 0.0 ? 1.0 : std::exp(-lambda * T);
  }
  if (lambda > 0.0) {
    const double tstar = std::min(r / lambda, T);
    return std::pow(tstar, r) * std::pow(w, r) * std::exp(-lambda * tstar);
  }
  // lambda <= 0: t^r e^{-lambda t} is increasing, sup at T
  return std::pow(T, r) * std::pow(w, r) * std::exp(-lambda * T);
}

// positive root of psi(u) = e^{-u}(u + s) - s, the stationarity equation of
// (1 - e^{-u}) u^{-s} in the scaled variable u = lambda t, for s in (0,1)
double kappa_stationary_scaled(double s) {
  double lo = 1.0 - s;       // psi > 0 here (psi increases from 0 on [0,1-s])
  double hi = lo + 1.0;
  auto psi = [s](double u) { return std::exp(-u) * (u + s) - s; };
  while (psi(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (psi(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// sup_{t in (0,T]} t^{-s} (eta+lambda)^{-s} |e^{-lambda t} - 1| for one mode
double kappa_mode(double lambda, double eta, double s, double T) {
  if (lambda == 0.0) return 0.0;
  const double ws = std::pow(eta + lambda, -s);
  if (s == 0.0) {
    // |e^{-lambda t} - 1| is increasing in t for either sign of lambda
    return std::abs(std::expm1(-lambda * T));
  }
  if (lambda < 0.0) {
    // (e^{|lambda| t} - 1) t^{-s} is increasing, sup at T
    return std::pow(T, -s) * ws * std::expm1(-lambda * T);
  }
  if (s == 1.0) {
    // (1 - e^{-lambda t})/t is decreasing; the sup is the t->0 limit
    return lambda * ws;
  }
  const double tstar = std::min(kappa_stationary_scaled(s) / lambda, T);
  return std::pow(tstar, -s) * ws * (-std::expm1(-lambda * tstar));
}

}  // namespace

double chi_constant(const DiagonalOperator& op, double r, double T) {
  if (!(r >= 0.0 && r <= 1.0))
    throw std::invalid_argument("chi_constant: requires r in [0,1]");
  if (!(T > 0.0)) throw std::invalid_argument("chi_constant: requires T > 0");
  double best = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i)
    best = std::max(best, chi_mode(op.lambda(i), op.eta(), r, T));
  return best;
}

double kappa_constant(const DiagonalOperator& op, double s, double T) {
  if (!(s >= 0.0 && s <= 1.0))
    throw std::invalid_argument("kappa_constant: requires s in [0,1]");
  if (!(T > 0.0)) throw std::invalid_argument("kappa_constant: requires T > 0");
  double best = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i)
    best = std::max(best, kappa_mode(op.lambda(i), op.eta(), s, T));
  return best;
}

}  // namespace see
