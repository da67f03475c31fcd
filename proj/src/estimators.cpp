#include "see/estimators.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace see {

namespace {

// per-path H_r norms at a node, from recorded norms or stored fields
std::vector<double> path_norms(const PathEnsemble& ens, const DiagonalOperator& op,
                               std::size_t node, double r) {
  const std::size_t M = ens.paths();
  std::vector<double> out(M);
  std::size_t slot;
  if (ens.find_norm_slot(r, &slot)) {
    for (std::size_t p = 0; p < M; ++p) out[p] = ens.norm_value(slot, node, p);
    return out;
  }
  if (!ens.has_fields() || !ens.node_stored(node))
    throw std::invalid_argument(
        "estimator: space index was not recorded and no field snapshot is stored");
  std::vector<double> w(op.size());
  for (std::size_t i = 0; i < op.size(); ++i)
    w[i] = std::pow(op.eta() + op.lambda(i), 2.0 * r);
  for (std::size_t p = 0; p < M; ++p) {
    const auto c = ens.field(p, node);
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += w[i] * c[i] * c[i];
    out[p] = std::sqrt(s);
  }
  return out;
}

LpEstimate lp_from_values(const std::vector<double>& vals, double p) {
  const std::size_t M = vals.size();
  if (M == 0) throw std::invalid_argument("estimator: empty ensemble");
  double mean = 0.0;
  for (double v : vals) mean += std::pow(v, p);
  mean /= static_cast<double>(M);
  double var = 0.0;
  for (double v : vals) {
    const double d = std::pow(v, p) - mean;
    var += d * d;
  }
  var = M > 1 ? var / static_cast<double>(M - 1) : 0.0;
  LpEstimate est;
  est.value = std::pow(mean, 1.0 / p);
  if (mean > 0.0)
    est.stderr_ = (1.0 / p) * std::pow(mean, 1.0 / p - 1.0) *
                  std::sqrt(var / static_cast<double>(M));
  return est;
}

}  // namespace

LpEstimate estimate_lp_norm(const PathEnsemble& ens, const DiagonalOperator& op,
                            std::size_t node, double p, double r) {
  if (!(p >= 2.0)) throw std::invalid_argument("estimate_lp_norm: requires p >= 2");
  if (node >= ens.node_times().size())
    throw std::out_of_range("estimate_lp_norm: node out of range");
  return lp_from_values(path_norms(ens, op, node, r), p);
}

WeightedSup weighted_sup(const PathEnsemble& ens, const DiagonalOperator& op,
                         double lambda, double p, double r) {
  const auto& t = ens.node_times();
  WeightedSup best;
  for (std::size_t m = 1; m < t.size(); ++m) {
    const LpEstimate est = estimate_lp_norm(ens, op, m, p, r);
    const double v = std::pow(t[m], lambda) * est.value;
    if (v > best.value) {
      best.value = v;
      best.argmax_node = m;
      best.stderr_at_argmax = std::pow(t[m], lambda) * est.stderr_;
    }
  }
  return best;
}

namespace {

struct ProductTerm {
  std::size_t j;   // input coefficient index
  double w;        // weight
};

// expansion of b_j b_m over the retained basis: for each retained output
// index k, the list of (j, weight) with <b_k, b_j b_m> = weight
std::vector<std::vector<ProductTerm>> product_rows(const DiagonalOperator& op,
                                                   std::size_t m_idx) {
  const int N = op.periodic_modes();
  const std::size_t K = op.size();
  std::vector<std::vector<ProductTerm>> rows(K);
  auto idx_of = [N](int mode) { return static_cast<std::size_t>(mode + N); };
  auto add = [&](int out_mode, std::size_t j, double w) {
    if (out_mode >= -N && out_mode <= N) rows[idx_of(out_mode)].push_back({j, w});
  };
  const int m = op.mode_id(m_idx);
  const double is2 = 1.0 / std::sqrt(2.0);
  for (std::size_t j_idx = 0; j_idx < K; ++j_idx) {
    const int j = op.mode_id(j_idx);
    if (j == 0) { add(m, j_idx, 1.0); continue; }
    if (m == 0) { add(j, j_idx, 1.0); continue; }
    const int a = std::abs(j), b = std::abs(m);
    if (j > 0 && m > 0) {            // cos * cos
      if (a == b) { add(0, j_idx, 1.0); add(a + b, j_idx, is2); }
      else { add(std::abs(a - b), j_idx, is2); add(a + b, j_idx, is2); }
    } else if (j < 0 && m < 0) {     // sin * sin
      if (a == b) { add(0, j_idx, 1.0); add(a + b, j_idx, -is2); }
      else { add(std::abs(a - b), j_idx, is2); add(a + b, j_idx, -is2); }
    } else {                         // cos * sin -> sines
      const int ca = (j > 0) ? a : b;   // cosine frequency
      const int sb = (j > 0) ? b : a;   // sine frequency
      add(-(ca + sb), j_idx, is2);
      if (sb > ca) add(-(sb - ca), j_idx, is2);
      else if (sb < ca) add(-(ca - sb), j_idx, -is2);
    }
  }
  return rows;
}

}  // namespace

double anderson_hs_integrand(const DiagonalOperator& op, const std::vector<double>& C,
                             double tau, double r) {
  const std::size_t K = op.size();
  if (C.size() != K * K)
    throw std::invalid_argument("anderson_hs_integrand: bad matrix size");
  // sum_k ||D P(v b_k)||^2 = sum_m d_m ||P(v b_m)||^2 with d the decay weights
  double total = 0.0;
  for (std::size_t m_idx = 0; m_idx < K; ++m_idx) {
    const auto rows = product_rows(op, m_idx);
    double norm2 = 0.0;
    for (const auto& row : rows) {
      for (const auto& [j, wj] : row)
        for (const auto& [j2, wj2] : row)
          norm2 += wj * wj2 * C[j * K + j2];
    }
    total += std::pow(op.eta() + op.lambda(m_idx), -2.0 * r) *
             std::exp(-2.0 * op.lambda(m_idx) * tau) * norm2;
  }
  return total;
}

namespace {

// raw second-moment matrix C = (1/M) sum_paths c c^T at one stored node
std::vector<double> second_moment_matrix(const PathEnsemble& ens, std::size_t node) {
  const std::size_t K = ens.mode_count();
  const std::size_t M = ens.paths();
  std::vector<double> C(K * K, 0.0);
  for (std::size_t p = 0; p < M; ++p) {
    const auto c = ens.field(p, node);
    for (std::size_t i = 0; i < K; ++i) {
      const double ci = c[i];
      if (ci == 0.0) continue;
      double* row = C.data() + i * K;
      for (std::size_t j = 0; j < K; ++j) row[j] += ci * c[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(M);
  for (double& x : C) x *= inv;
  return C;
}

}  // namespace

double ito_isometry_residual(const ModelSpec& model, const PathEnsemble& ens,
                             std::size_t node_t, double r) {
  if (model.drift.kind != DriftKind::zero)
    throw std::invalid_argument("ito_isometry_residual: requires zero drift");
  const auto kind = model.diffusion.kind;
  if (kind != DiffusionKind::anderson && kind != DiffusionKind::norm_diffusion &&
      kind != DiffusionKind::commuting_linear && kind != DiffusionKind::zero)
    throw std::invalid_argument(
        "ito_isometry_residual: diffusion must be anderson, norm_diffusion, "
        "commuting_linear or zero");
  if (!ens.has_fields() || !ens.node_stored(node_t))
    throw std::invalid_argument("ito_isometry_residual: needs stored field snapshots");
  const auto& t = ens.node_times();
  const DiagonalOperator& op = model.op;
  const std::size_t K = op.size();
  const double tt = t[node_t];

  // LHS: ensemble second moment in H_{-r}
  double lhs = 0.0;
  {
    std::vector<double> w(K);
    for (std::size_t i = 0; i < K; ++i)
      w[i] = std::pow(op.eta() + op.lambda(i), -2.0 * r);
    for (std::size_t p = 0; p < ens.paths(); ++p) {
      const auto c = ens.field(p, node_t);
      double s = 0.0;
      for (std::size_t i = 0; i < K; ++i) s += w[i] * c[i] * c[i];
      lhs += s;
    }
    lhs /= static_cast<double>(ens.paths());
  }

  // deterministic term ||e^{t A} xi||^2_{H_{-r}}, evaluated with the same
  // per-step decay products the engine uses, so B = 0 gives residual 0 exactly
  const SpectralField xi = model.initial_field();
  double det_term = 0.0;
  {
    std::vector<double> x = xi.coeffs;
    for (std::size_t m = 0; m < node_t; ++m) {
      const double dt = t[m + 1] - t[m];
      for (std::size_t i = 0; i < K; ++i) x[i] *= std::exp(-op.lambda(i) * dt);
    }
    for (std::size_t i = 0; i < K; ++i)
      det_term += std::pow(op.eta() + op.lambda(i), -2.0 * r) * x[i] * x[i];
  }

  // quadrature nodes: stored nodes in [0, t]
  std::vector<std::size_t> qnodes;
  for (std::size_t m = 0; m <= node_t; ++m)
    if (ens.node_stored(m)) qnodes.push_back(m);
  if (qnodes.size() < 2)
    throw std::invalid_argument("ito_isometry_residual: not enough stored nodes");

  // Hilbert-Schmidt integrand I(s) = sum_k E||e^{(t-s)A} B(X_s) b_k||^2_{H_{-r}}
  std::vector<double> integrand(qnodes.size(), 0.0);
  auto decay_weight = [&](std::size_t i, double tau) {
    return std::pow(op.eta() + op.lambda(i), -2.0 * r) *
           std::exp(-2.0 * op.lambda(i) * tau);
  };

  if (kind == DiffusionKind::zero) {
    // nothing to add
  } else if (kind == DiffusionKind::norm_diffusion) {
    std::size_t slot;
    const bool have_h = ens.find_norm_slot(0.0, &slot);
    for (std::size_t q = 0; q < qnodes.size(); ++q) {
      const std::size_t m = qnodes[q];
      double e_h2 = 0.0;
      if (have_h) {
        for (std::size_t p = 0; p < ens.paths(); ++p) {
          const double v = ens.norm_value(slot, m, p);
          e_h2 += v * v;
        }
      } else {
        for (std::size_t p = 0; p < ens.paths(); ++p) {
          const auto c = ens.field(p, m);
          for (double ci : c) e_h2 += ci * ci;
        }
      }
      e_h2 /= static_cast<double>(ens.paths());
      double wnorm = 0.0;
      for (std::size_t i = 0; i < K; ++i)
        wnorm += decay_weight(i, tt - t[m]) * model.diffusion.w[i] *
                 model.diffusion.w[i];
      integrand[q] = e_h2 * wnorm;
    }
  } else if (kind == DiffusionKind::commuting_linear) {
    for (std::size_t q = 0; q < qnodes.size(); ++q) {
      const std::size_t m = qnodes[q];
      std::vector<double> m2(K, 0.0);  // mode-wise second moments
      for (std::size_t p = 0; p < ens.paths(); ++p) {
        const auto c = ens.field(p, m);
        for (std::size_t i = 0; i < K; ++i) m2[i] += c[i] * c[i];
      }
      double s = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        double l2 = 0.0;
        for (const auto& L : model.diffusion.Ls) l2 += L[i] * L[i];
        s += decay_weight(i, tt - t[m]) * l2 * m2[i] /
             static_cast<double>(ens.paths());
      }
      integrand[q] = s;
    }
  } else {  // anderson
    if (!op.is_periodic())
      throw std::invalid_argument("ito_isometry_residual: anderson needs periodic modes");
    std::atomic<std::size_t> next{0};
    std::size_t nthreads = std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                 qnodes.size());
    if (nthreads == 0) nthreads = 1;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nthreads; ++w)
      pool.emplace_back([&]() {
        while (true) {
          const std::size_t q = next.fetch_add(1);
          if (q >= qnodes.size()) return;
          const std::size_t node = qnodes[q];
          const auto C = second_moment_matrix(ens, node);
          integrand[q] = anderson_hs_integrand(op, C, tt - t[node], r);
        }
      });
    for (auto& th : pool) th.join();
  }

  double rhs = det_term;
  for (std::size_t q = 0; q + 1 < qnodes.size(); ++q) {
    const double ds = t[qnodes[q + 1]] - t[qnodes[q]];
    rhs += 0.5 * ds * (integrand[q] + integrand[q + 1]);
  }

  if (lhs == 0.0) return rhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(lhs - rhs) / lhs;
}

LipschitzRatio lipschitz_ratio(const PathEnsemble& diff_ens,
                               const DiagonalOperator& op, const SpectralField& x,
                               const SpectralField& y, double delta, double p) {
  if (x.coeffs == y.coeffs)
    throw std::invalid_argument("lipschitz_ratio: identical initial fields");
  SpectralField d = x;
  for (std::size_t i = 0; i < d.coeffs.size(); ++i) d.coeffs[i] -= y.coeffs[i];
  const double denom = hr_norm(d, op, -delta);
  const WeightedSup sup = weighted_sup(diff_ens, op, delta, p, 0.0);
  return {sup.value / denom, sup.argmax_node, denom};
}

LpEstimate holder_increment(const PathEnsemble& ens, const DiagonalOperator& op,
                            std::size_t node_s, std::size_t node_t, double p) {
  (void)op;
  if (node_s > node_t)
    throw std::invalid_argument("holder_increment: requires s <= t");
  if (!ens.has_fields() || !ens.node_stored(node_s) || !ens.node_stored(node_t))
    throw std::invalid_argument("holder_increment: nodes not stored");
  std::vector<double> vals(ens.paths());
  for (std::size_t pth = 0; pth < ens.paths(); ++pth) {
    const auto a = ens.field(pth, node_s);
    const auto b = ens.field(pth, node_t);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double dd = a[i] - b[i];
      s += dd * dd;
    }
    vals[pth] = std::sqrt(s);
  }
  return lp_from_values(vals, p);
}

}  // namespace see
