#ifndef SEE_EXPERIMENTS_HPP
#define SEE_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "see/bounds.hpp"
#include "see/engine.hpp"
#include "see/estimators.hpp"

namespace see {

/// Built-in model zoo. Names: "gbm" (single-mode commuting-linear),
/// "heat" (Nemytskii tanh drift + affine multiplicative noise, parametrized
/// by the mode count), "anderson" (linear multiplicative space-time white
/// noise, smooth initial value). "heat64"/"anderson32" fix the mode count.
ModelSpec builtin_model(const std::string& name, int modes = 0);

/// Batch experiment configuration: every knob has a default, so a config
/// naming only the experiment (and optionally a model) is runnable.
struct ExperimentConfig {
  std::string experiment;
  nlohmann::json raw;            // knobs
  ModelSpec model;
  bool has_model = false;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  std::size_t threads = 0;

  static ExperimentConfig load(const nlohmann::json& j, const std::string& base_dir);

  double knob(const std::string& key, double fallback) const;
  std::size_t knob_size(const std::string& key, std::size_t fallback) const;
  std::vector<double> knob_list(const std::string& key,
                                std::vector<double> fallback) const;
  bool knob_bool(const std::string& key, bool fallback) const;

  const ModelSpec& model_or(const std::string& builtin_name) const;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<BoundReport> reports;
  std::string csv;               // fixed-schema CSV payload
  std::string table_csv;         // experiment-specific table, when one exists
  nlohmann::json sidecar;        // config echo + version + outcomes
  bool all_satisfied() const;
};

ExperimentResult run_apriori(const ExperimentConfig& cfg);
ExperimentResult run_perturbation(const ExperimentConfig& cfg);
ExperimentResult run_barrier(const ExperimentConfig& cfg);
ExperimentResult run_convergence(const ExperimentConfig& cfg);
ExperimentResult run_counterexamples(const ExperimentConfig& cfg);
ExperimentResult run_isometry(const ExperimentConfig& cfg);
ExperimentResult run_simulate(const ExperimentConfig& cfg);

/// Closed-form constants for a profile/operator pair (CLI `constants`).
nlohmann::json constants_json(const ExperimentConfig& cfg);

/// Dispatch on cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes <out>/<experiment>.csv and <out>/<experiment>_meta.json.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

/// sup_{t in (0,T]} t^delta ||e^{tA} xi||_H on a dense log grid (the
/// deterministic initial-value factor of the a priori bound).
double xi_weighted_sup(const DiagonalOperator& op, const SpectralField& xi,
                       double delta, double T);

/// Fixed float formatting used for every CSV cell (reruns must be
/// byte-identical).
std::string format_double(double v);

}  // namespace see

#endif
