#ifndef SEE_MODELS_HPP
#define SEE_MODELS_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "see/bounds.hpp"
#include "see/spectral.hpp"
#include "see/trig_transform.hpp"

namespace see {

/// Built-in scalar nonlinearities with known Lipschitz data. `identity`,
/// `sin` and `tanh` are scaled by `scale`; `affine` is offset + scale*u.
struct ScalarFn {
  enum class Kind { identity, sin, tanh, affine };
  Kind kind = Kind::identity;
  double scale = 1.0;
  double offset = 0.0;  // affine only

  double operator()(double u) const;
  double lipschitz() const;   // Lipschitz constant on R
  double at_zero() const;

  nlohmann::json to_json() const;
  static ScalarFn from_json(const nlohmann::json& j);
};

enum class DriftKind { zero, nemytskii, norm_drift };
enum class DiffusionKind { zero, anderson, norm_diffusion, commuting_linear, nemytskii_mult };

struct DriftSpec {
  DriftKind kind = DriftKind::zero;
  ScalarFn f;                    // nemytskii
  std::vector<double> w;         // norm_drift: field supported on mode b0
  int b0 = 0;                    // norm_drift
};

struct DiffusionSpec {
  DiffusionKind kind = DiffusionKind::zero;
  ScalarFn b;                            // nemytskii_mult
  std::vector<double> w;                 // norm_diffusion
  std::vector<std::vector<double>> Ls;   // commuting_linear: diagonal entries per operator
};

struct InitialSpec {
  enum class Kind { rough, explicit_coeffs };
  Kind kind = Kind::rough;
  double gamma = 0.0;            // rough: c_n = max(|n|,1)^gamma
  std::vector<double> coeffs;    // explicit
  double delta = 0.0;            // declared regularity: xi in H_{-delta}
};

/// A complete SEE instance: generator, drift, diffusion, singularity
/// profile and initial value.
struct ModelSpec {
  std::string name = "model";
  DiagonalOperator op = DiagonalOperator::periodic_laplacian(1, 1.0, 1.0);
  DriftSpec drift;
  DiffusionSpec diffusion;
  SingularityProfile profile;
  InitialSpec initial;

  std::size_t noise_dim() const;
  bool grid_based() const;       // needs trigonometric synthesis/analysis
  bool linear_in_state() const;  // difference of two solutions solves the same dynamics
  SpectralField initial_field() const;
  void validate() const;

  /// Fill L0/L0_hat/L1/L1_hat in the profile from the drift/diffusion
  /// descriptors (exact for the diagonal kinds, rigorous upper bounds for
  /// the Nemytskii kinds via the Hilbert-Schmidt mode sum).
  void derive_profile_constants();

  nlohmann::json to_json() const;
  static ModelSpec from_json(const nlohmann::json& j);
};

/// Rough initial field c_n = max(|n|,1)^gamma on a periodic mode set.
/// For lambda_n = nu n^2 the truncations are bounded in H_{-delta}
/// uniformly in N iff 4 delta > 2 gamma + 1.
SpectralField make_rough_initial(const DiagonalOperator& op, double gamma);

/// sum over modes of (eta+lambda)^{-2 beta}, plus an integral tail estimate
/// beyond the truncation for periodic operators; the square-summability
/// constant behind the Hilbert-Schmidt bounds of the multiplication kinds.
double hs_mode_sum(const DiagonalOperator& op, double beta);

/// Per-thread scratch for repeated drift/diffusion evaluation.
class ModelWorkspace {
 public:
  explicit ModelWorkspace(const ModelSpec& model);

  /// acc += dt * F(t, x)
  void add_drift(double t, std::span<const double> x, double dt,
                 std::span<double> acc);

  /// acc += sum_k B(t, x)(direction k) dW_k, with dW indexed by noise dimension.
  void add_diffusion(double t, std::span<const double> x,
                     std::span<const double> dW, std::span<double> acc);

  /// B(t, x) applied to a single noise direction (column of the diffusion).
  void diffusion_direction(double t, std::span<const double> x, std::size_t direction,
                           std::span<double> out);

  /// F(t, x) alone.
  void drift(double t, std::span<const double> x, std::span<double> out);

 private:
  const ModelSpec& model_;
  std::unique_ptr<TrigTransform> transform_;
  std::vector<double> grid_x_, grid_y_, tmp_;
};

/// F(model, t, v): Nemytskii drift by grid synthesis/pointwise map/analysis,
/// norm drift ||v||_H w, or zero. Result lives in H_{-alpha}.
SpectralField eval_drift(const ModelSpec& model, double t, const SpectralField& v);

/// B(model, t, v) applied to one noise direction. Result lives in H_{-beta}.
SpectralField eval_diffusion(const ModelSpec& model, double t, const SpectralField& v,
                             std::size_t direction);

/// Closed-form solution of the commuting-linear model with zero drift:
/// per mode, xi_b exp(-lambda_b t + sum_i (l_{i,b} W_i - t/2 l_{i,b}^2)).
SpectralField exact_solution(const ModelSpec& model, double t, const SpectralField& xi,
                             std::span<const double> brownian_values);

}  // namespace see

#endif
