#include "see/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace see {

double ScalarFn::operator()(double u) const {
  switch (kind) {
    case Kind::identity: return scale * u;
    case Kind::sin: return scale * std::sin(u);
    case Kind::tanh: return scale * std::tanh(u);
    case Kind::affine: return offset + scale * u;
  }
  return 0.0;
}

double ScalarFn::lipschitz() const { return std::abs(scale); }

double ScalarFn::at_zero() const {
  return kind == Kind::affine ? offset : (*this)(0.0);
}

nlohmann::json ScalarFn::to_json() const {
  static const char* names[] = {"identity", "sin", "tanh", "affine"};
  nlohmann::json j{{"name", names[static_cast<int>(kind)]}, {"scale", scale}};
  if (kind == Kind::affine) j["offset"] = offset;
  return j;
}

ScalarFn ScalarFn::from_json(const nlohmann::json& j) {
  ScalarFn f;
  const std::string name = j.at("name").get<std::string>();
  if (name == "identity") f.kind = Kind::identity;
  else if (name == "sin") f.kind = Kind::sin;
  else if (name == "tanh") f.kind = Kind::tanh;
  else if (name == "affine") f.kind = Kind::affine;
  else throw std::invalid_argument("ScalarFn: unknown function name " + name);
  f.scale = j.value("scale", 1.0);
  f.offset = j.value("offset", 0.0);
  return f;
}

std::size_t ModelSpec::noise_dim() const {
  switch (diffusion.kind) {
    case DiffusionKind::zero: return 0;
    case DiffusionKind::anderson:
    case DiffusionKind::nemytskii_mult: return op.size();  // cylindrical, truncated
    case DiffusionKind::norm_diffusion: return 1;
    case DiffusionKind::commuting_linear: return diffusion.Ls.size();
  }
  return 0;
}

bool ModelSpec::grid_based() const {
  const bool drift_grid = drift.kind == DriftKind::nemytskii;
  const bool diff_grid = diffusion.kind == DiffusionKind::anderson ||
                         diffusion.kind == DiffusionKind::nemytskii_mult;
  return drift_grid || diff_grid;
}

bool ModelSpec::linear_in_state() const {
  const bool drift_lin = drift.kind == DriftKind::zero;
  const bool diff_lin = diffusion.kind == DiffusionKind::zero ||
                        diffusion.kind == DiffusionKind::anderson ||
                        diffusion.kind == DiffusionKind::commuting_linear;
  return drift_lin && diff_lin;
}

SpectralField ModelSpec::initial_field() const {
  if (initial.kind == InitialSpec::Kind::rough) {
    SpectralField xi = make_rough_initial(op, initial.gamma);
    xi.space_index = -initial.delta;
    return xi;
  }
  if (initial.coeffs.size() != op.size())
    throw std::invalid_argument("ModelSpec: explicit initial value has wrong size");
  return {initial.coeffs, -initial.delta};
}

void ModelSpec::validate() const {
  profile.validate();
  if (grid_based() && !op.is_periodic())
    throw std::invalid_argument(
        "ModelSpec: grid-based drift/diffusion requires the periodic mode set");
  if (diffusion.kind == DiffusionKind::anderson ||
      diffusion.kind == DiffusionKind::nemytskii_mult) {
    // Hilbert-Schmidt condition for multiplication diffusions
    if (!(profile.beta > 0.25 && profile.beta < 0.5))
      throw std::invalid_argument(
          "ModelSpec: anderson/nemytskii diffusion requires beta in (1/4, 1/2)");
  }
  if (diffusion.kind == DiffusionKind::commuting_linear) {
    for (const auto& L : diffusion.Ls)
      if (L.size() != op.size())
        throw std::invalid_argument("ModelSpec: commuting_linear entries must be "
                                    "diagonal over the operator's modes");
  }
  if (diffusion.kind == DiffusionKind::norm_diffusion &&
      diffusion.w.size() != op.size())
    throw std::invalid_argument("ModelSpec: norm_diffusion field has wrong size");
  if (drift.kind == DriftKind::norm_drift) {
    if (drift.w.size() != op.size())
      throw std::invalid_argument("ModelSpec: norm_drift field has wrong size");
    const auto idx = op.index_of(drift.b0);
    if (!idx) throw std::invalid_argument("ModelSpec: norm_drift b0 not a mode");
    for (std::size_t i = 0; i < drift.w.size(); ++i)
      if (i != *idx && drift.w[i] != 0.0)
        throw std::invalid_argument("ModelSpec: norm_drift w must be supported on b0");
    if (!(drift.w[*idx] > 0.0))
      throw std::invalid_argument("ModelSpec: norm_drift requires <b0, w> > 0");
  }
}

double hs_mode_sum(const DiagonalOperator& op, double beta) {
  double s = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i)
    s += std::pow(op.eta() + op.lambda(i), -2.0 * beta);
  if (op.is_periodic() && 4.0 * beta > 1.0) {
    // tail sum_{|m|>N} (eta + nu m^2)^{-2 beta} <= 2 int_N^inf (nu x^2)^{-2 beta} dx
    const double N = static_cast<double>(op.periodic_modes());
    s += 2.0 * std::pow(op.nu(), -2.0 * beta) * std::pow(N, 1.0 - 4.0 * beta) /
         (4.0 * beta - 1.0);
  }
  return s;
}

void ModelSpec::derive_profile_constants() {
  switch (drift.kind) {
    case DriftKind::zero:
      profile.L0 = 0.0;
      profile.L0_hat = 0.0;
      break;
    case DriftKind::nemytskii:
      // F: H -> H is f-composition; Lipschitz constant carries over exactly
      profile.L0 = drift.f.lipschitz();
      profile.L0_hat = std::abs(drift.f.at_zero());
      break;
    case DriftKind::norm_drift:
      profile.L0 = hr_norm(drift.w, op, -profile.alpha);
      profile.L0_hat = 0.0;
      break;
  }
  switch (diffusion.kind) {
    case DiffusionKind::zero:
      profile.L1 = 0.0;
      profile.L1_hat = 0.0;
      break;
    case DiffusionKind::anderson:
      profile.L1 = std::sqrt(2.0 * hs_mode_sum(op, profile.beta));
      profile.L1_hat = 0.0;
      break;
    case DiffusionKind::nemytskii_mult:
      profile.L1 = diffusion.b.lipschitz() * std::sqrt(2.0 * hs_mode_sum(op, profile.beta));
      profile.L1_hat =
          std::abs(diffusion.b.at_zero()) * std::sqrt(hs_mode_sum(op, profile.beta));
      break;
    case DiffusionKind::norm_diffusion:
      profile.L1 = hr_norm(diffusion.w, op, -profile.beta);
      profile.L1_hat = 0.0;
      break;
    case DiffusionKind::commuting_linear: {
      // exact: the diffusion is diagonal, so the Lipschitz constant is the
      // largest mode-wise l2 norm of the weighted L_i entries
      double best = 0.0;
      for (std::size_t i = 0; i < op.size(); ++i) {
        double s = 0.0;
        for (const auto& L : diffusion.Ls) s += L[i] * L[i];
        best = std::max(best, std::pow(op.eta() + op.lambda(i), -2.0 * profile.beta) * s);
      }
      profile.L1 = std::sqrt(best);
      profile.L1_hat = 0.0;
      break;
    }
  }
}

SpectralField make_rough_initial(const DiagonalOperator& op, double gamma) {
  if (!op.is_periodic())
    throw std::invalid_argument("make_rough_initial: requires a periodic mode set");
  SpectralField xi = zero_field(op);
  for (std::size_t i = 0; i < op.size(); ++i) {
    const double n = std::max(std::abs(static_cast<double>(op.mode_id(i))), 1.0);
    xi.coeffs[i] = std::pow(n, gamma);
  }
  return xi;
}

ModelWorkspace::ModelWorkspace(const ModelSpec& model) : model_(model) {
  model.validate();
  if (model.grid_based()) {
    transform_ = std::make_unique<TrigTransform>(model.op.periodic_modes());
    grid_x_.resize(transform_->grid_size());
    grid_y_.resize(transform_->grid_size());
  }
  tmp_.resize(model.op.size());
}

void ModelWorkspace::drift(double t, std::span<const double> x,
                           std::span<double> out) {
  (void)t;  // the built-in drifts are autonomous; t kept for the envelope contract
  std::fill(out.begin(), out.end(), 0.0);
  switch (model_.drift.kind) {
    case DriftKind::zero:
      return;
    case DriftKind::nemytskii: {
      transform_->synthesize(x, grid_x_);
      for (double& g : grid_x_) g = model_.drift.f(g);
      transform_->analyze(grid_x_, out);
      return;
    }
    case DriftKind::norm_drift: {
      double n2 = 0.0;
      for (double c : x) n2 += c * c;
      const double nrm = std::sqrt(n2);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = nrm * model_.drift.w[i];
      return;
    }
  }
}

void ModelWorkspace::add_drift(double t, std::span<const double> x, double dt,
                               std::span<double> acc) {
  if (model_.drift.kind == DriftKind::zero) return;
  drift(t, x, tmp_);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += dt * tmp_[i];
}

void ModelWorkspace::diffusion_direction(double t, std::span<const double> x,
                                         std::size_t direction,
                                         std::span<double> out) {
  (void)t;
  std::fill(out.begin(), out.end(), 0.0);
  switch (model_.diffusion.kind) {
    case DiffusionKind::zero:
      throw std::invalid_argument("diffusion_direction: model has zero diffusion");
    case DiffusionKind::anderson:
    case DiffusionKind::nemytskii_mult: {
      if (direction >= model_.op.size())
        throw std::invalid_argument("diffusion_direction: direction out of range");
      // pointwise product of b(v) with the basis function of the direction
      transform_->synthesize(x, grid_x_);
      if (model_.diffusion.kind == DiffusionKind::nemytskii_mult)
        for (double& g : grid_x_) g = model_.diffusion.b(g);
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      tmp_[direction] = 1.0;
      transform_->synthesize(tmp_, grid_y_);
      for (std::size_t j = 0; j < grid_x_.size(); ++j) grid_x_[j] *= grid_y_[j];
      transform_->analyze(grid_x_, out);
      return;
    }
    case DiffusionKind::norm_diffusion: {
      if (direction != 0)
        throw std::invalid_argument("diffusion_direction: direction out of range");
      double n2 = 0.0;
      for (double c : x) n2 += c * c;
      const double nrm = std::sqrt(n2);
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = nrm * model_.diffusion.w[i];
      return;
    }
    case DiffusionKind::commuting_linear: {
      if (direction >= model_.diffusion.Ls.size())
        throw std::invalid_argument("diffusion_direction: direction out of range");
      const auto& L = model_.diffusion.Ls[direction];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = L[i] * x[i];
      return;
    }
  }
}

void ModelWorkspace::add_diffusion(double t, std::span<const double> x,
                                   std::span<const double> dW,
                                   std::span<double> acc) {
  (void)t;
  switch (model_.diffusion.kind) {
    case DiffusionKind::zero:
      return;
    case DiffusionKind::anderson:
    case DiffusionKind::nemytskii_mult: {
      // sum_k B(x) b_k dW_k = b(x) . (sum_k dW_k b_k): one synthesis of the
      // white-noise increment field, one pointwise product, one analysis
      transform_->synthesize(x, grid_x_);
      if (model_.diffusion.kind == DiffusionKind::nemytskii_mult)
        for (double& g : grid_x_) g = model_.diffusion.b(g);
      transform_->synthesize(dW, grid_y_);
      for (std::size_t j = 0; j < grid_x_.size(); ++j) grid_x_[j] *= grid_y_[j];
      transform_->analyze(grid_x_, tmp_);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += tmp_[i];
      return;
    }
    case DiffusionKind::norm_diffusion: {
      double n2 = 0.0;
      for (double c : x) n2 += c * c;
      const double s = std::sqrt(n2) * dW[0];
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += s * model_.diffusion.w[i];
      return;
    }
    case DiffusionKind::commuting_linear: {
      for (std::size_t l = 0; l < model_.diffusion.Ls.size(); ++l) {
        const auto& L = model_.diffusion.Ls[l];
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += dW[l] * L[i] * x[i];
      }
      return;
    }
  }
}

SpectralField eval_drift(const ModelSpec& model, double t, const SpectralField& v) {
  ModelWorkspace ws(model);
  SpectralField out = zero_field(model.op, -model.profile.alpha);
  ws.drift(t, v.coeffs, out.coeffs);
  return out;
}

SpectralField eval_diffusion(const ModelSpec& model, double t, const SpectralField& v,
                             std::size_t direction) {
  ModelWorkspace ws(model);
  SpectralField out = zero_field(model.op, -model.profile.beta);
  ws.diffusion_direction(t, v.coeffs, direction, out.coeffs);
  return out;
}

SpectralField exact_solution(const ModelSpec& model, double t, const SpectralField& xi,
                             std::span<const double> brownian_values) {
  if (model.diffusion.kind != DiffusionKind::commuting_linear ||
      model.drift.kind != DriftKind::zero)
    throw std::invalid_argument(
        "exact_solution: requires commuting_linear diffusion and zero drift");
  if (brownian_values.size() != model.diffusion.Ls.size())
    throw std::invalid_argument("exact_solution: Brownian vector size mismatch");
  SpectralField out = xi;
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    double expo = -model.op.lambda(i) * t;
    for (std::size_t l = 0; l < model.diffusion.Ls.size(); ++l) {
      const double li = model.diffusion.Ls[l][i];
      expo += li * brownian_values[l] - 0.5 * t * li * li;
    }
    out.coeffs[i] *= std::exp(expo);
  }
  return out;
}

nlohmann::json ModelSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["operator"] = op.to_json();
  nlohmann::json jd;
  switch (drift.kind) {
    case DriftKind::zero: jd["kind"] = "zero"; break;
    case DriftKind::nemytskii:
      jd["kind"] = "nemytskii";
      jd["f"] = drift.f.to_json();
      break;
    case DriftKind::norm_drift:
      jd["kind"] = "norm_drift";
      jd["b0"] = drift.b0;
      jd["weight"] = drift.w[*op.index_of(drift.b0)];
      break;
  }
  j["drift"] = jd;
  nlohmann::json jb;
  switch (diffusion.kind) {
    case DiffusionKind::zero: jb["kind"] = "zero"; break;
    case DiffusionKind::anderson: jb["kind"] = "anderson"; break;
    case DiffusionKind::nemytskii_mult:
      jb["kind"] = "nemytskii_mult";
      jb["b"] = diffusion.b.to_json();
      break;
    case DiffusionKind::norm_diffusion:
      jb["kind"] = "norm_diffusion";
      jb["w"] = diffusion.w;
      break;
    case DiffusionKind::commuting_linear:
      jb["kind"] = "commuting_linear";
      jb["Ls"] = diffusion.Ls;
      break;
  }
  j["diffusion"] = jb;
  j["profile"] = profile.to_json();
  nlohmann::json ji;
  if (initial.kind == InitialSpec::Kind::rough) {
    ji["kind"] = "rough";
    ji["gamma"] = initial.gamma;
  } else {
    ji["kind"] = "explicit";
    ji["coeffs"] = initial.coeffs;
  }
  ji["delta"] = initial.delta;
  j["initial"] = ji;
  return j;
}

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.name = j.value("name", std::string("model"));
  m.op = DiagonalOperator::from_json(j.at("operator"));
  const auto& jd = j.at("drift");
  const std::string dk = jd.at("kind").get<std::string>();
  if (dk == "zero") m.drift.kind = DriftKind::zero;
  else if (dk == "nemytskii") {
    m.drift.kind = DriftKind::nemytskii;
    m.drift.f = ScalarFn::from_json(jd.at("f"));
  } else if (dk == "norm_drift") {
    m.drift.kind = DriftKind::norm_drift;
    m.drift.b0 = jd.at("b0").get<int>();
    m.drift.w.assign(m.op.size(), 0.0);
    const auto idx = m.op.index_of(m.drift.b0);
    if (!idx) throw std::invalid_argument("model json: norm_drift b0 not a mode");
    m.drift.w[*idx] = jd.at("weight").get<double>();
  } else {
    throw std::invalid_argument("model json: unknown drift kind " + dk);
  }
  const auto& jb = j.at("diffusion");
  const std::string bk = jb.at("kind").get<std::string>();
  if (bk == "zero") m.diffusion.kind = DiffusionKind::zero;
  else if (bk == "anderson") m.diffusion.kind = DiffusionKind::anderson;
  else if (bk == "nemytskii_mult") {
    m.diffusion.kind = DiffusionKind::nemytskii_mult;
    m.diffusion.b = ScalarFn::from_json(jb.at("b"));
  } else if (bk == "norm_diffusion") {
    m.diffusion.kind = DiffusionKind::norm_diffusion;
    m.diffusion.w = jb.at("w").get<std::vector<double>>();
  } else if (bk == "commuting_linear") {
    m.diffusion.kind = DiffusionKind::commuting_linear;
    m.diffusion.Ls = jb.at("Ls").get<std::vector<std::vector<double>>>();
  } else {
    throw std::invalid_argument("model json: unknown diffusion kind " + bk);
  }
  m.profile = SingularityProfile::from_json(j.at("profile"));
  const auto& ji = j.at("initial");
  const std::string ik = ji.at("kind").get<std::string>();
  if (ik == "rough") {
    m.initial.kind = InitialSpec::Kind::rough;
    m.initial.gamma = ji.value("gamma", 0.0);
  } else if (ik == "explicit") {
    m.initial.kind = InitialSpec::Kind::explicit_coeffs;
    m.initial.coeffs = ji.at("coeffs").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("model json: unknown initial kind " + ik);
  }
  m.initial.delta = ji.value("delta", 0.0);
  if (j.value("auto_constants", false)) m.derive_profile_constants();
  m.validate();
  return m;
}

}  // namespace see
