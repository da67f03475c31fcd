#include "see/engine.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace see {

std::vector<double> TimeGrid::nodes() const {
  validate();
  std::vector<double> t(steps + 1);
  for (std::size_t m = 0; m <= steps; ++m) {
    const double u = static_cast<double>(m) / static_cast<double>(steps);
    t[m] = (grading == 1.0) ? T * u : T * std::pow(u, grading);
  }
  t[0] = 0.0;
  t[steps] = T;
  return t;
}

void TimeGrid::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: requires T > 0");
  if (steps == 0) throw std::invalid_argument("TimeGrid: requires steps >= 1");
  if (!(grading >= 1.0)) throw std::invalid_argument("TimeGrid: requires grading >= 1");
}

std::uint32_t domain_hash(std::string_view name) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : name) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

namespace {

// Philox4x32-10 (Salmon et al., SC 2011)
struct Philox4x32 {
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  static constexpr std::uint32_t kMultA = 0xD2511F53u;
  static constexpr std::uint32_t kMultB = 0xCD9E8D57u;

  static void round(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMultA) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMultB) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c[1] ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c[3] ^ k1;
    const std::uint32_t n3 = lo0;
    c[0] = n0; c[1] = n1; c[2] = n2; c[3] = n3;
  }

  static void generate(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    for (int r = 0; r < 10; ++r) {
      round(c, k0, k1);
      k0 += kWeylA;
      k1 += kWeylB;
    }
  }
};

// zig-zag encoding of a signed mode id into the counter word
std::uint32_t encode_mode(std::int32_t mode) {
  return (static_cast<std::uint32_t>(mode) << 1) ^
         static_cast<std::uint32_t>(mode >> 31);
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t master_seed, std::uint32_t domain,
                         std::uint32_t path)
    : key0_(static_cast<std::uint32_t>(master_seed) ^ domain),
      key1_(static_cast<std::uint32_t>(master_seed >> 32)),
      path_(path) {}

double NoiseStream::normal(std::uint32_t step, std::int32_t mode) const {
  std::uint32_t c[4] = {step, encode_mode(mode), path_, 0u};
  Philox4x32::generate(c, key0_, key1_);
  const std::uint64_t a = (static_cast<std::uint64_t>(c[0]) << 32) | c[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(c[2]) << 32) | c[3];
  constexpr double two64 = 5.421010862427522e-20;  // 2^-64
  const double u1 = static_cast<double>(a + 1) * two64;  // in (0,1]
  const double u2 = static_cast<double>(b) * two64;      // in [0,1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::int32_t noise_mode_id(const ModelSpec& model, std::size_t dim) {
  switch (model.diffusion.kind) {
    case DiffusionKind::anderson:
    case DiffusionKind::nemytskii_mult:
      return model.op.mode_id(dim);
    default:
      return static_cast<std::int32_t>(dim);
  }
}

std::vector<double> wiener_increments(const NoiseStream& stream, const TimeGrid& grid,
                                      std::size_t step, const ModelSpec& model) {
  if (step >= grid.steps)
    throw std::out_of_range("wiener_increments: step index out of range");
  const auto t = grid.nodes();
  const double sdt = std::sqrt(t[step + 1] - t[step]);
  std::vector<double> dW(model.noise_dim());
  for (std::size_t i = 0; i < dW.size(); ++i)
    dW[i] = sdt * stream.normal(static_cast<std::uint32_t>(step),
                                noise_mode_id(model, i));
  return dW;
}

SpectralField exp_euler_step(const ModelSpec& model, double t_m, double dt,
                             const SpectralField& X, std::span<const double> dW,
                             double t1) {
  if (dW.size() != model.noise_dim())
    throw std::invalid_argument("exp_euler_step: increment vector size mismatch");
  ModelWorkspace ws(model);
  SpectralField out = X;
  const double t_eval = std::max(t_m, t1);
  ws.add_drift(t_eval, X.coeffs, dt, out.coeffs);
  if (model.noise_dim() > 0) ws.add_diffusion(t_eval, X.coeffs, dW, out.coeffs);
  for (std::size_t i = 0; i < out.coeffs.size(); ++i)
    out.coeffs[i] *= std::exp(-model.op.lambda(i) * dt);
  return out;
}

std::vector<double> semigroup_path_coeffs(const DiagonalOperator& op,
                                          const TimeGrid& grid, std::size_t node,
                                          std::span<const double> xi) {
  const auto t = grid.nodes();
  if (node >= t.size()) throw std::out_of_range("semigroup_path_coeffs: bad node");
  std::vector<double> x(xi.begin(), xi.end());
  for (std::size_t m = 0; m < node; ++m) {
    const double dt = t[m + 1] - t[m];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= std::exp(-op.lambda(i) * dt);
  }
  return x;
}

bool PathEnsemble::find_norm_slot(double r, std::size_t* slot) const {
  for (std::size_t i = 0; i < norm_indices_.size(); ++i)
    if (norm_indices_[i] == r) {
      if (slot) *slot = i;
      return true;
    }
  return false;
}

bool PathEnsemble::node_stored(std::size_t node) const {
  return node < stored_nodes_.size() && stored_nodes_[node] > 0;
}

std::span<const double> PathEnsemble::field(std::size_t path, std::size_t node) const {
  if (!node_stored(node))
    throw std::out_of_range("PathEnsemble::field: node not stored");
  const std::size_t slot = stored_nodes_[node] - 1;
  return {fields_.data() + (path * stored_count_ + slot) * mode_count_, mode_count_};
}

// Internal builder with engine-side access to PathEnsemble internals.
class EnsembleBuilder {
 public:
  static PathEnsemble run(const ModelSpec& model, const TimeGrid& grid,
                          std::size_t paths, std::uint64_t seed, std::uint32_t domain,
                          const SimulateOptions& opt, const SpectralField* x_init,
                          const SpectralField* y_init);
};

namespace {

struct DecayTable {
  // decay[m][i] = exp(-lambda_i (t_{m+1} - t_m)); single row when uniform
  std::vector<double> rows;
  std::size_t K = 0;
  bool uniform = false;

  DecayTable(const DiagonalOperator& op, const std::vector<double>& t) {
    K = op.size();
    const std::size_t steps = t.size() - 1;
    uniform = true;
    const double dt0 = t[1] - t[0];
    for (std::size_t m = 1; m < steps; ++m)
      if (std::abs((t[m + 1] - t[m]) - dt0) > 1e-15 * dt0) {
        uniform = false;
        break;
      }
    const std::size_t nrows = uniform ? 1 : steps;
    rows.resize(nrows * K);
    for (std::size_t m = 0; m < nrows; ++m) {
      const double dt = t[m + 1] - t[m];
      for (std::size_t i = 0; i < K; ++i)
        rows[m * K + i] = std::exp(-op.lambda(i) * dt);
    }
  }

  const double* row(std::size_t m) const { return rows.data() + (uniform ? 0 : m * K); }
};

// weights (eta+lambda)^{2r} for the recorded norm indices
std::vector<std::vector<double>> norm_weights(const DiagonalOperator& op,
                                              const std::vector<double>& rs) {
  std::vector<std::vector<double>> w(rs.size(), std::vector<double>(op.size()));
  for (std::size_t s = 0; s < rs.size(); ++s)
    for (std::size_t i = 0; i < op.size(); ++i)
      w[s][i] = std::pow(op.eta() + op.lambda(i), 2.0 * rs[s]);
  return w;
}

double weighted_norm(std::span<const double> c, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += w[i] * c[i] * c[i];
  return std::sqrt(s);
}

// Runs body(worker_state, path) over all paths. Each worker thread builds
// its own state via `make_state` (model workspaces hold FFT scratch, so they
// cannot be shared). Work distribution never influences results: every
// output location is owned by exactly one path.
template <typename MakeState, typename Body>
void parallel_over_paths(std::size_t paths, std::size_t threads,
                         const MakeState& make_state, const Body& body) {
  std::size_t n = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (n == 0) n = 1;
  n = std::min<std::size_t>(n, paths == 0 ? 1 : paths);
  if (n <= 1) {
    auto state = make_state();
    for (std::size_t p = 0; p < paths; ++p) body(state, p);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&]() {
      try {
        auto state = make_state();
        while (true) {
          const std::size_t p = next.fetch_add(1);
          if (p >= paths) return;
          body(state, p);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

PathEnsemble EnsembleBuilder::run(const ModelSpec& model, const TimeGrid& grid,
                                  std::size_t paths, std::uint64_t seed,
                                  std::uint32_t domain, const SimulateOptions& opt,
                                  const SpectralField* x_init,
                                  const SpectralField* y_init) {
  model.validate();
  grid.validate();
  if (paths == 0) throw std::invalid_argument("simulate_ensemble: requires paths >= 1");
  const auto t = grid.nodes();
  const std::size_t nodes = t.size();
  const std::size_t K = model.op.size();
  const std::size_t ndim = model.noise_dim();
  const bool coupled = y_init != nullptr;
  const bool direct_diff = coupled && model.linear_in_state();
  if (opt.track_exact && model.diffusion.kind != DiffusionKind::commuting_linear)
    throw std::invalid_argument("simulate_ensemble: track_exact requires commuting_linear");

  PathEnsemble ens;
  ens.node_times_ = t;
  ens.paths_ = paths;
  ens.mode_count_ = K;
  ens.seed_ = seed;
  ens.domain_ = domain;
  ens.model_name_ = model.name;
  ens.norm_indices_ = opt.norm_indices;
  ens.norms_.assign(opt.norm_indices.size() * nodes * paths, 0.0);

  ens.stored_nodes_.assign(nodes, 0);
  if (opt.record_fields) {
    const std::size_t stride = std::max<std::size_t>(1, opt.field_stride);
    std::size_t slot = 0;
    for (std::size_t m = 0; m < nodes; ++m)
      if (m % stride == 0 || m + 1 == nodes) ens.stored_nodes_[m] = ++slot;
    ens.stored_count_ = slot;
    const std::size_t bytes = paths * ens.stored_count_ * K * sizeof(double);
    if (bytes > opt.memory_budget)
      throw std::runtime_error(
          "simulate_ensemble: field storage (" + std::to_string(bytes) +
          " bytes) exceeds the memory budget; raise the budget or the field stride");
    ens.fields_.assign(paths * ens.stored_count_ * K, 0.0);
  }
  if (opt.track_exact) ens.strong_errors_.assign(paths, 0.0);

  const DecayTable decay(model.op, t);
  const auto weights = norm_weights(model.op, opt.norm_indices);
  const SpectralField xi_main = x_init ? *x_init : model.initial_field();
  std::vector<double> xi0(K);
  if (direct_diff) {
    for (std::size_t i = 0; i < K; ++i) xi0[i] = xi_main.coeffs[i] - y_init->coeffs[i];
  } else {
    xi0 = xi_main.coeffs;
  }

  auto make_state = [&]() { return std::make_unique<ModelWorkspace>(model); };
  parallel_over_paths(paths, opt.threads, make_state, [&](
      std::unique_ptr<ModelWorkspace>& ws, std::size_t p) {
    NoiseStream stream(seed, domain, static_cast<std::uint32_t>(p));
    std::vector<double> X = xi0, Y, acc(K), accY, dW(ndim), wsum;
    if (coupled && !direct_diff) {
      Y = y_init->coeffs;
      accY.resize(K);
    }
    if (opt.track_exact) wsum.assign(ndim, 0.0);

    auto record = [&](std::size_t node, const std::vector<double>& state,
                      const std::vector<double>* other) {
      for (std::size_t s = 0; s < weights.size(); ++s) {
        double val;
        if (other) {
          double acc2 = 0.0;
          for (std::size_t i = 0; i < K; ++i) {
            const double d = state[i] - (*other)[i];
            acc2 += weights[s][i] * d * d;
          }
          val = std::sqrt(acc2);
        } else {
          val = weighted_norm(state, weights[s]);
        }
        ens.norms_[(s * nodes + node) * paths + p] = val;
      }
      if (opt.record_fields && ens.stored_nodes_[node] > 0) {
        const std::size_t slot = ens.stored_nodes_[node] - 1;
        double* dst = ens.fields_.data() + (p * ens.stored_count_ + slot) * K;
        if (other) {
          for (std::size_t i = 0; i < K; ++i) dst[i] = state[i] - (*other)[i];
        } else {
          std::memcpy(dst, state.data(), K * sizeof(double));
        }
      }
    };

    const std::vector<double>* other0 = (coupled && !direct_diff) ? &Y : nullptr;
    record(0, X, other0);
    const double t1 = t[1];
    for (std::size_t m = 0; m + 1 < nodes; ++m) {
      const double dt = t[m + 1] - t[m];
      const double t_eval = std::max(t[m], t1);
      const double sdt = std::sqrt(dt);
      for (std::size_t i = 0; i < ndim; ++i)
        dW[i] = sdt * stream.normal(static_cast<std::uint32_t>(m),
                                    noise_mode_id(model, i));
      if (opt.track_exact)
        for (std::size_t i = 0; i < ndim; ++i) wsum[i] += dW[i];

      acc = X;
      ws->add_drift(t_eval, X, dt, acc);
      if (ndim > 0) ws->add_diffusion(t_eval, X, dW, acc);
      const double* d = decay.row(m);
      for (std::size_t i = 0; i < K; ++i) X[i] = acc[i] * d[i];

      if (coupled && !direct_diff) {
        accY = Y;
        ws->add_drift(t_eval, Y, dt, accY);
        if (ndim > 0) ws->add_diffusion(t_eval, Y, dW, accY);
        for (std::size_t i = 0; i < K; ++i) Y[i] = accY[i] * d[i];
      }
      record(m + 1, X, (coupled && !direct_diff) ? &Y : nullptr);
    }

    if (opt.track_exact) {
      const SpectralField exact = exact_solution(model, grid.T, xi_main, wsum);
      double err2 = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        const double d = X[i] - exact.coeffs[i];
        err2 += d * d;
      }
      ens.strong_errors_[p] = std::sqrt(err2);
    }
  });

  return ens;
}

PathEnsemble simulate_ensemble(const ModelSpec& model, const TimeGrid& grid,
                               std::size_t paths, std::uint64_t seed,
                               std::uint32_t domain, const SimulateOptions& options) {
  return EnsembleBuilder::run(model, grid, paths, seed, domain, options, nullptr,
                              nullptr);
}

PathEnsemble simulate_difference(const ModelSpec& model, const SpectralField& x0,
                                 const SpectralField& y0, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed,
                                 std::uint32_t domain, const SimulateOptions& options) {
  if (x0.coeffs.size() != model.op.size() || y0.coeffs.size() != model.op.size())
    throw std::invalid_argument("simulate_difference: initial field size mismatch");
  return EnsembleBuilder::run(model, grid, paths, seed, domain, options, &x0, &y0);
}

PicardResult picard_solve(const ModelSpec& model, const TimeGrid& grid,
                          std::size_t paths, std::uint64_t seed, std::uint32_t domain,
                          std::size_t iterations, double weight_r, double lambda,
                          double p, const SimulateOptions& options) {
  model.validate();
  grid.validate();
  if (paths == 0) throw std::invalid_argument("picard_solve: requires paths >= 1");
  if (iterations == 0) throw std::invalid_argument("picard_solve: requires iterations >= 1");
  if (weight_r > 0.0) throw std::invalid_argument("picard_solve: requires weight r <= 0");
  const auto t = grid.nodes();
  const std::size_t nodes = t.size();
  const std::size_t K = model.op.size();
  const std::size_t ndim = model.noise_dim();

  PathEnsemble ens;
  ens.node_times_ = t;
  ens.paths_ = paths;
  ens.mode_count_ = K;
  ens.seed_ = seed;
  ens.domain_ = domain;
  ens.model_name_ = model.name;
  ens.norm_indices_ = options.norm_indices;
  ens.norms_.assign(options.norm_indices.size() * nodes * paths, 0.0);
  ens.stored_nodes_.assign(nodes, 0);

  const DecayTable decay(model.op, t);
  const auto weights = norm_weights(model.op, options.norm_indices);
  const SpectralField xi = model.initial_field();

  // per-(iteration, node, path) increment norms ||Y^{j+1}_{t_m} - Y^j_{t_m}||_H
  std::vector<double> diffs(iterations * nodes * paths, 0.0);

  auto make_state = [&]() { return std::make_unique<ModelWorkspace>(model); };
  parallel_over_paths(paths, options.threads, make_state, [&](
      std::unique_ptr<ModelWorkspace>& ws, std::size_t pth) {
    NoiseStream stream(seed, domain, static_cast<std::uint32_t>(pth));

    // semigroup part e^{t_m A} xi, reused by every iterate
    std::vector<double> evolved(nodes * K);
    {
      std::vector<double> x = xi.coeffs;
      std::memcpy(evolved.data(), x.data(), K * sizeof(double));
      for (std::size_t m = 0; m + 1 < nodes; ++m) {
        const double* d = decay.row(m);
        for (std::size_t i = 0; i < K; ++i) x[i] *= d[i];
        std::memcpy(evolved.data() + (m + 1) * K, x.data(), K * sizeof(double));
      }
    }
    // pregenerate the increments (regenerated identically by any consumer)
    std::vector<double> dWall(grid.steps * ndim);
    for (std::size_t m = 0; m < grid.steps; ++m) {
      const double sdt = std::sqrt(t[m + 1] - t[m]);
      for (std::size_t i = 0; i < ndim; ++i)
        dWall[m * ndim + i] = sdt * stream.normal(static_cast<std::uint32_t>(m),
                                                  noise_mode_id(model, i));
    }

    std::vector<double> Ycur = evolved, Ynext(nodes * K), S(K), stage(K);
    const double t1 = t[1];
    for (std::size_t j = 0; j < iterations; ++j) {
      std::fill(S.begin(), S.end(), 0.0);
      std::memcpy(Ynext.data(), evolved.data(), K * sizeof(double));
      for (std::size_t m = 0; m + 1 < nodes; ++m) {
        const double dt = t[m + 1] - t[m];
        const double t_eval = std::max(t[m], t1);
        std::span<const double> ycur_m{Ycur.data() + m * K, K};
        std::fill(stage.begin(), stage.end(), 0.0);
        ws->add_drift(t_eval, ycur_m, dt, stage);
        if (ndim > 0)
          ws->add_diffusion(t_eval, ycur_m, {dWall.data() + m * ndim, ndim}, stage);
        const double* d = decay.row(m);
        for (std::size_t i = 0; i < K; ++i) S[i] = (S[i] + stage[i]) * d[i];
        double* ynext_m1 = Ynext.data() + (m + 1) * K;
        const double* ev = evolved.data() + (m + 1) * K;
        for (std::size_t i = 0; i < K; ++i) ynext_m1[i] = ev[i] + S[i];
      }
      for (std::size_t m = 0; m < nodes; ++m) {
        double acc2 = 0.0;
        const double* a = Ynext.data() + m * K;
        const double* b = Ycur.data() + m * K;
        for (std::size_t i = 0; i < K; ++i) {
          const double dd = a[i] - b[i];
          acc2 += dd * dd;
        }
        diffs[(j * nodes + m) * paths + pth] = std::sqrt(acc2);
      }
      std::swap(Ycur, Ynext);
    }
    for (std::size_t m = 0; m < nodes; ++m)
      for (std::size_t s = 0; s < weights.size(); ++s)
        ens.norms_[(s * nodes + m) * paths + pth] =
            weighted_norm({Ycur.data() + m * K, K}, weights[s]);
  });

  PicardResult result;
  result.ensemble = std::move(ens);
  result.distances.resize(iterations);
  for (std::size_t j = 0; j < iterations; ++j) {
    double dj = 0.0;
    for (std::size_t m = 1; m < nodes; ++m) {
      double mean = 0.0;
      for (std::size_t pth = 0; pth < paths; ++pth)
        mean += std::pow(diffs[(j * nodes + m) * paths + pth], p);
      mean /= static_cast<double>(paths);
      const double lp = std::pow(mean, 1.0 / p);
      dj = std::max(dj, std::exp(weight_r * t[m]) * std::pow(t[m], lambda) * lp);
    }
    result.distances[j] = dj;
  }
  int fails = 0;
  for (std::size_t j = 1; j < iterations; ++j) {
    if (result.distances[j] >= result.distances[j - 1] &&
        result.distances[j - 1] > 0.0) {
      if (++fails >= 3) {
        result.converged = false;
        break;
      }
    } else {
      fails = 0;
    }
  }
  return result;
}

}  // namespace see
