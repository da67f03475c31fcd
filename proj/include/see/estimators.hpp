#ifndef SEE_ESTIMATORS_HPP
#define SEE_ESTIMATORS_HPP

#include "see/engine.hpp"

namespace see {

struct LpEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // delta-method standard error
};

/// ( (1/M) sum_i ||X_t^(i)||_{H_r}^p )^{1/p} with a delta-method standard
/// error on the p-th moment. Uses recorded norms when r was recorded,
/// otherwise falls back to stored coefficient snapshots.
LpEstimate estimate_lp_norm(const PathEnsemble& ens, const DiagonalOperator& op,
                            std::size_t node, double p, double r);

struct WeightedSup {
  double value = 0.0;
  std::size_t argmax_node = 0;
  double stderr_at_argmax = 0.0;
};

/// sup over positive grid nodes of t^lambda ||X_t||_{L^p(H_r)} (empirical).
/// t = 0 is excluded: the initial value lives in H_{-delta} only.
WeightedSup weighted_sup(const PathEnsemble& ens, const DiagonalOperator& op,
                         double lambda, double p, double r);

/// Relative residual of the Ito-isometry energy identity
///   E||X_t||^2_{H_{-r}} = ||e^{tA} xi||^2_{H_{-r}}
///     + sum_k int_0^t E||e^{(t-s)A} B(X_s) b_k||^2_{H_{-r}} ds
/// for zero-drift models with anderson, norm_diffusion or commuting_linear
/// diffusion. Both sides come from the same ensemble; the time integral is
/// a trapezoidal rule over the stored nodes.
double ito_isometry_residual(const ModelSpec& model, const PathEnsemble& ens,
                             std::size_t node_t, double r);

struct LipschitzRatio {
  double value = 0.0;
  std::size_t argmax_node = 0;
  double denominator = 0.0;  // ||x - y||_{H_{-delta}}
};

/// sup_t t^delta ||X^x_t - X^y_t||_{L^p(H)} / ||x-y||_{H_{-delta}} from a
/// synchronously coupled difference ensemble.
LipschitzRatio lipschitz_ratio(const PathEnsemble& diff_ens,
                               const DiagonalOperator& op, const SpectralField& x,
                               const SpectralField& y, double delta, double p);

/// ||X_s - X_t||_{L^p(H)} between two stored nodes.
LpEstimate holder_increment(const PathEnsemble& ens, const DiagonalOperator& op,
                            std::size_t node_s, std::size_t node_t, double p);

/// E sum_k ||(eta-A)^{-r} e^{tau A} B(v) b_k||^2 for the anderson diffusion,
/// evaluated from the coefficient second-moment matrix C = E[v v^T] via the
/// trigonometric product structure (no per-path transforms).
double anderson_hs_integrand(const DiagonalOperator& op, const std::vector<double>& C,
                             double tau, double r);

}  // namespace see

#endif
