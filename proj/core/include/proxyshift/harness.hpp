#pragma once

// Simulation studies: point error against the condition number, comparison
// with baselines, interval coverage, and runtime. Every replicate draws from
// its own seed stream derived from (master seed, model, dataset, n), so the
// output does not depend on the worker count or scheduling.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyshift/linalg.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift {

enum class EstimatorKind { Oracle, Reduced, Causal, NoAdj, NoAdjTarget, WAdj, WAdjTarget };

/// "oracle", "reduced", "causal", "noadj", "noadj_target", "wadj", "wadj_target".
std::string_view estimator_name(EstimatorKind kind);
/// Inverse of estimator_name; throws InvalidInput on an unknown name.
EstimatorKind parse_estimator(std::string_view name);

/// Name used for bootstrap-interval records in coverage runs.
inline constexpr std::string_view kBootstrapRecordName = "reduced_bootstrap";

struct ExperimentConfig {
  CategorySpec dims{.k_E = 2, .k_U = 2, .k_W = 2, .k_X = 2, .k_Y = 2};
  std::size_t M = 1;  // model draws
  std::size_t N = 1;  // datasets per model
  std::size_t n = 20000;
  // Sample sizes for sweeps; empty means {n}.
  std::vector<std::size_t> n_sweep;
  std::vector<EstimatorKind> estimators{EstimatorKind::Reduced, EstimatorKind::Causal};
  double alpha = 0.05;
  std::size_t bootstrap = 0;  // B; 0 disables bootstrap intervals
  double filter_threshold = 0.1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Target (x, y); defaults to the first categories.
  std::size_t x = 0;
  std::size_t y = 0;
  // Model draws allowed per accepted model before the filter gives up.
  std::size_t draw_budget = 1000;
  // Models with kappa(P(W|E,x)) above this are redrawn.
  std::optional<double> max_condition_number;
  // Every model index reuses this spec instead of drawing one.
  std::optional<ScmSpec> fixed_model;
  std::size_t restarts = 1;
  std::size_t max_iterations = 50000;
  std::size_t runtime_repetitions = 50;

  std::vector<std::size_t> sample_sizes() const { return n_sweep.empty() ? std::vector<std::size_t>{n} : n_sweep; }
  /// Throws InvalidInput.
  void validate() const;
};

struct ReplicateRecord {
  std::size_t model = 0;
  std::size_t dataset = 0;
  std::string estimator;
  std::size_t n = 0;
  std::size_t x = 0;
  std::size_t y = 0;
  double estimate = 0.0;  // clipped
  double estimate_unclipped = 0.0;
  double truth = 0.0;
  double abs_error = 0.0;
  double kappa_true = 0.0;
  double kappa_hat = 0.0;
  std::optional<double> ci_lower;
  std::optional<double> ci_upper;
  std::optional<bool> covered;
  std::optional<double> sigma_hat;  // standard error of the unclipped estimate, when available
  double wall_seconds = 0.0;
  std::string status = "ok";  // otherwise the failure message

  bool ok() const { return status == "ok"; }
};

/// Per (estimator, n) aggregate over successful records.
struct SummaryRow {
  std::string estimator;
  std::size_t n = 0;
  std::size_t count = 0;
  std::size_t failures = 0;
  double median_abs_error = 0.0;
  double mean_abs_error = 0.0;
  std::optional<double> coverage;
  std::optional<double> median_ci_length;
  double total_wall_seconds = 0.0;
};

/// A model accepted by the filters, with its population quantities.
struct ModelDraw {
  ScmSpec spec;
  double truth = 0.0;
  double kappa_true = 0.0;
  double target_conditional = 0.0;
  std::size_t draw_index = 0;
};

/// Draws config.M models by rejection. With `confounding_filter` set, a
/// model is kept only when |q(y|do(x)) - q(y|x)| > filter_threshold.
/// Throws Error once draw_budget * M draws are exhausted.
std::vector<ModelDraw> draw_models(const ExperimentConfig& config, bool confounding_filter);

std::vector<ReplicateRecord> run_point_error(const ExperimentConfig& config);
std::vector<ReplicateRecord> run_baseline_comparison(const ExperimentConfig& config);

struct CoverageResult {
  std::vector<ReplicateRecord> records;  // "reduced" and, with B > 0, "reduced_bootstrap"
  std::vector<SummaryRow> summary;
};
CoverageResult run_coverage(const ExperimentConfig& config);

struct RuntimeResult {
  std::vector<ReplicateRecord> records;  // one per repetition
  std::vector<SummaryRow> summary;       // total_wall_seconds per estimator and n
};
RuntimeResult run_runtime(const ExperimentConfig& config);

/// Groups by (estimator, n), ordered by n then estimator.
std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records);

/// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by fn is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace proxyshift
