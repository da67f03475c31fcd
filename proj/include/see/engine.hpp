#ifndef SEE_ENGINE_HPP
#define SEE_ENGINE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "see/models.hpp"

namespace see {

/// Time grid on [0,T]: t_m = T (m/M)^q. grading q = 1 is uniform; q > 1
/// clusters nodes near 0 to resolve the initial-time singularity.
struct TimeGrid {
  double T = 1.0;
  std::size_t steps = 256;
  double grading = 1.0;

  std::vector<double> nodes() const;
  void validate() const;
};

/// FNV-1a hash of an experiment name, used to domain-separate RNG streams.
std::uint32_t domain_hash(std::string_view name);

/// Counter-based Gaussian stream (Philox4x32-10): the draw for
/// (seed, domain, path, mode, step) is a pure function of its arguments,
/// so regeneration is bit-identical under any parallel schedule.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t master_seed, std::uint32_t domain, std::uint32_t path);

  /// standard normal draw for one (step, mode) cell
  double normal(std::uint32_t step, std::int32_t mode) const;

  std::uint32_t path_index() const { return path_; }

 private:
  std::uint32_t key0_, key1_, path_;
};

/// Mode id carried by noise dimension `dim`: the operator's mode for the
/// cylindrical kinds, the dimension index itself for finite-dimensional noise.
std::int32_t noise_mode_id(const ModelSpec& model, std::size_t dim);

/// N(0, dt) increments for one step, one entry per noise dimension.
std::vector<double> wiener_increments(const NoiseStream& stream, const TimeGrid& grid,
                                      std::size_t step, const ModelSpec& model);

/// One exponential Euler step:
///   X' = e^{dt A} ( X + dt F(t+, X) + sum_k B(t+, X)(dir k) dW_k ),
/// where t+ = max(t_m, t_1) guards the singular coefficient envelopes at 0.
SpectralField exp_euler_step(const ModelSpec& model, double t_m, double dt,
                             const SpectralField& X, std::span<const double> dW,
                             double t1);

struct SimulateOptions;
struct PicardResult;
class PathEnsemble;

PicardResult picard_solve(const ModelSpec& model, const TimeGrid& grid,
                          std::size_t paths, std::uint64_t seed, std::uint32_t domain,
                          std::size_t iterations, double weight_r, double lambda,
                          double p, const SimulateOptions& options);

/// M independent simulated paths on a fixed grid with per-path counter
/// streams; reduced per-node statistics and (optionally) full coefficient
/// snapshots.
class PathEnsemble {
 public:
  const std::vector<double>& node_times() const { return node_times_; }
  std::size_t paths() const { return paths_; }
  std::size_t mode_count() const { return mode_count_; }
  std::uint64_t seed() const { return seed_; }
  std::uint32_t domain() const { return domain_; }
  const std::string& model_name() const { return model_name_; }

  const std::vector<double>& norm_indices() const { return norm_indices_; }
  bool find_norm_slot(double r, std::size_t* slot) const;
  /// per-path H_r norm at a node (r identified by its slot)
  double norm_value(std::size_t slot, std::size_t node, std::size_t path) const {
    return norms_[(slot * node_times_.size() + node) * paths_ + path];
  }

  bool has_fields() const { return !fields_.empty(); }
  bool node_stored(std::size_t node) const;
  /// coefficient snapshot of one path at a stored node
  std::span<const double> field(std::size_t path, std::size_t node) const;

  /// per-path strong error at the final node vs the exact solution
  const std::vector<double>& strong_errors() const { return strong_errors_; }

 private:
  friend class EnsembleBuilder;
  friend PicardResult picard_solve(const ModelSpec&, const TimeGrid&, std::size_t,
                                   std::uint64_t, std::uint32_t, std::size_t, double,
                                   double, double, const SimulateOptions&);
  std::vector<double> node_times_;
  std::size_t paths_ = 0;
  std::size_t mode_count_ = 0;
  std::uint64_t seed_ = 0;
  std::uint32_t domain_ = 0;
  std::string model_name_;
  std::vector<double> norm_indices_;
  std::vector<double> norms_;            // [slot][node][path]
  std::vector<std::size_t> stored_nodes_;  // node index -> slot+1, 0 if absent
  std::vector<double> fields_;           // [path][stored slot][mode]
  std::size_t stored_count_ = 0;
  std::vector<double> strong_errors_;
};

struct SimulateOptions {
  std::vector<double> norm_indices = {0.0};
  bool record_fields = false;
  std::size_t field_stride = 1;      // store fields at every stride-th node (+ final)
  bool track_exact = false;          // commuting_linear only
  std::size_t threads = 0;           // 0 = hardware concurrency
  std::size_t memory_budget = std::size_t{3} << 30;  // bytes for field storage
};

/// Simulates M independent exponential-Euler paths. The result is a pure
/// function of (model, grid, paths, seed, domain); the thread count only
/// changes the schedule, never an output bit.
PathEnsemble simulate_ensemble(const ModelSpec& model, const TimeGrid& grid,
                               std::size_t paths, std::uint64_t seed,
                               std::uint32_t domain,
                               const SimulateOptions& options = {});

/// Same noise, two initial values: returns the ensemble of the difference
/// process X^x - X^y. For state-linear models the difference is simulated
/// directly (so rescaling x - y rescales every output exactly); otherwise
/// both solutions are simulated and subtracted path-wise.
PathEnsemble simulate_difference(const ModelSpec& model, const SpectralField& x0,
                                 const SpectralField& y0, const TimeGrid& grid,
                                 std::size_t paths, std::uint64_t seed,
                                 std::uint32_t domain,
                                 const SimulateOptions& options = {});

struct PicardResult {
  PathEnsemble ensemble;            // final iterate
  std::vector<double> distances;    // d_j = sup_m e^{r t_m} t_m^lambda ||Y^{j+1}-Y^j||_{L^p,emp}
  bool converged = true;            // false if d_j failed to decrease 3 times in a row
};

/// Picard iteration of the mild fixed-point map on the grid:
///   Y^{(j+1)}_t = e^{tA} xi + sum_m e^{(t-t_m)A} [ F(t_m+, Y^{(j)}_{t_m}) dt_m
///                                                + B(t_m+, Y^{(j)}_{t_m}) dW_m ],
/// started from Y^{(0)} = e^{tA} xi, with the weighted distance reported
/// per iteration (weight e^{r t} t^lambda, r <= 0).
PicardResult picard_solve(const ModelSpec& model, const TimeGrid& grid,
                          std::size_t paths, std::uint64_t seed, std::uint32_t domain,
                          std::size_t iterations, double weight_r, double lambda,
                          double p, const SimulateOptions& options = {});

/// e^{t_node A} xi evaluated exactly as the engine evaluates it (as the
/// ordered product of per-step decay factors), so deterministic comparisons
/// against simulated paths are bit-exact.
std::vector<double> semigroup_path_coeffs(const DiagonalOperator& op,
                                          const TimeGrid& grid, std::size_t node,
                                          std::span<const double> xi);

}  // namespace see

#endif
