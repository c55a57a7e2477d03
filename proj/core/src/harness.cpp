#include "proxyshift/harness.hpp"

#include "proxyshift/baselines.hpp"
#include "proxyshift/causal.hpp"
#include "proxyshift/errors.hpp"
#include "proxyshift/reduced.hpp"
#include "proxyshift/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>
#include <utility>

namespace proxyshift {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed stream purposes.
enum Stream : std::uint64_t { kModelStream = 1, kDataStream, kOracleStream, kCausalStream, kBootstrapStream };

std::uint64_t replicate_seed(std::uint64_t master, Stream s, std::size_t model, std::size_t dataset,
                             std::size_t n_index) {
  return derive_seed(derive_seed(master, s, model), dataset, n_index);
}

struct Replicate {
  const ExperimentConfig* config = nullptr;
  const ModelDraw* model = nullptr;
  std::size_t model_index = 0;
  std::size_t dataset_index = 0;
  std::size_t n_index = 0;
  std::size_t n = 0;
  SimulatedSample sample;
  std::vector<std::size_t> oracle_draws;

  std::uint64_t seed(Stream s) const {
    return replicate_seed(config->seed, s, model_index, dataset_index, n_index);
  }
};

Replicate make_replicate(const ExperimentConfig& config, const ModelDraw& model, std::size_t m, std::size_t d,
                         std::size_t n_index, std::size_t n, bool need_oracle) {
  Replicate r;
  r.config = &config;
  r.model = &model;
  r.model_index = m;
  r.dataset_index = d;
  r.n_index = n_index;
  r.n = n;
  Rng data_rng(r.seed(kDataStream));
  r.sample = simulate_with_hidden(model.spec, n, data_rng);
  if (need_oracle) {
    Rng oracle_rng(r.seed(kOracleStream));
    r.oracle_draws = interventional_sample(model.spec, config.x, n, oracle_rng);
  }
  return r;
}

ReplicateRecord blank_record(const Replicate& r, std::string_view name) {
  ReplicateRecord rec;
  rec.model = r.model_index;
  rec.dataset = r.dataset_index;
  rec.estimator = std::string(name);
  rec.n = r.n;
  rec.x = r.config->x;
  rec.y = r.config->y;
  rec.truth = r.model->truth;
  rec.kappa_true = r.model->kappa_true;
  rec.kappa_hat = kNaN;
  return rec;
}

void set_estimate(ReplicateRecord& rec, double unclipped) {
  rec.estimate_unclipped = unclipped;
  rec.estimate = std::clamp(unclipped, 0.0, 1.0);
  rec.abs_error = std::abs(rec.estimate - rec.truth);
}

void set_failure(ReplicateRecord& rec, const std::exception& e) {
  rec.status = e.what();
  rec.estimate = rec.estimate_unclipped = rec.abs_error = kNaN;
  if (rec.status.empty() || rec.status == "ok") rec.status = "error";
}

FitOptions fit_options(const Replicate& r) {
  FitOptions o;
  o.max_iterations = r.config->max_iterations;
  o.restarts = r.config->restarts;
  o.seed = r.seed(kCausalStream);
  return o;
}

// Runs one estimator on the replicate; timing covers the estimator call only.
ReplicateRecord run_estimator(EstimatorKind kind, const Replicate& r) {
  const ExperimentConfig& c = *r.config;
  ReplicateRecord rec = blank_record(r, estimator_name(kind));
  const Dataset& ds = r.sample.observed;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (kind) {
      case EstimatorKind::Oracle:
        set_estimate(rec, oracle_estimate(r.oracle_draws, c.y));
        break;
      case EstimatorKind::Reduced: {
        ReducedOptions o;
        o.alpha = c.alpha;
        const EffectEstimate est = reduced_estimate(ds, c.x, c.y, o);
        set_estimate(rec, est.point_unclipped);
        rec.kappa_hat = est.kappa_hat;
        if (est.sigma_hat) rec.sigma_hat = *est.sigma_hat / std::sqrt(static_cast<double>(est.n));
        if (est.ci) {
          rec.ci_lower = est.ci->lower;
          rec.ci_upper = est.ci->upper;
          rec.covered = est.ci->contains(rec.truth);
        }
        break;
      }
      case EstimatorKind::Causal: {
        const EffectEstimate est = causal_estimate(ds, c.x, c.y, fit_options(r));
        set_estimate(rec, est.point_unclipped);
        rec.kappa_hat = est.kappa_hat;
        break;
      }
      case EstimatorKind::NoAdj:
        set_estimate(rec, no_adjustment(ds, c.x, c.y));
        break;
      case EstimatorKind::NoAdjTarget:
        set_estimate(rec, no_adjustment(r.sample.hidden, c.x, c.y));
        break;
      case EstimatorKind::WAdj:
        set_estimate(rec, w_adjustment(ds, c.x, c.y));
        break;
      case EstimatorKind::WAdjTarget:
        set_estimate(rec, w_adjustment(r.sample.hidden, c.x, c.y));
        break;
    }
  } catch (const std::exception& e) {
    set_failure(rec, e);
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

bool needs_oracle(const std::vector<EstimatorKind>& kinds) {
  return std::find(kinds.begin(), kinds.end(), EstimatorKind::Oracle) != kinds.end();
}

void sort_records(std::vector<ReplicateRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const ReplicateRecord& a, const ReplicateRecord& b) {
    return std::tie(a.n, a.model, a.dataset, a.estimator) < std::tie(b.n, b.model, b.dataset, b.estimator);
  });
}

// Every (n, model, dataset) replicate with the configured estimators.
std::vector<ReplicateRecord> run_grid(const ExperimentConfig& config, const std::vector<ModelDraw>& models) {
  const auto sizes = config.sample_sizes();
  const std::size_t per_n = config.M * config.N;
  std::vector<std::vector<ReplicateRecord>> slots(sizes.size() * per_n);
  const bool oracle = needs_oracle(config.estimators);
  parallel_for(slots.size(), config.workers, [&](std::size_t job) {
    const std::size_t n_index = job / per_n;
    const std::size_t m = (job % per_n) / config.N;
    const std::size_t d = job % config.N;
    const Replicate r = make_replicate(config, models[m], m, d, n_index, sizes[n_index], oracle);
    for (EstimatorKind k : config.estimators) slots[job].push_back(run_estimator(k, r));
  });
  std::vector<ReplicateRecord> out;
  out.reserve(slots.size() * config.estimators.size());
  for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(out));
  sort_records(out);
  return out;
}

}  // namespace

std::string_view estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Oracle: return "oracle";
    case EstimatorKind::Reduced: return "reduced";
    case EstimatorKind::Causal: return "causal";
    case EstimatorKind::NoAdj: return "noadj";
    case EstimatorKind::NoAdjTarget: return "noadj_target";
    case EstimatorKind::WAdj: return "wadj";
    case EstimatorKind::WAdjTarget: return "wadj_target";
  }
  return "unknown";
}

EstimatorKind parse_estimator(std::string_view name) {
  for (EstimatorKind k : {EstimatorKind::Oracle, EstimatorKind::Reduced, EstimatorKind::Causal, EstimatorKind::NoAdj,
                          EstimatorKind::NoAdjTarget, EstimatorKind::WAdj, EstimatorKind::WAdjTarget}) {
    if (estimator_name(k) == name) return k;
  }
  throw InvalidInput("unknown estimator \"" + std::string(name) + "\"");
}

void ExperimentConfig::validate() const {
  dims.validate();
  if (M < 1 || N < 1 || n < 1) throw InvalidInput("M, N and n must be at least 1");
  for (std::size_t s : n_sweep) {
    if (s < 1) throw InvalidInput("sample sizes must be at least 1");
  }
  if (!(filter_threshold >= 0.0)) throw InvalidInput("filter threshold must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (workers < 1) throw InvalidInput("workers must be at least 1");
  if (x >= dims.k_X || y >= dims.k_Y) throw InvalidInput("(x, y) outside the declared dims");
  if (draw_budget < 1) throw InvalidInput("draw budget must be at least 1");
  if (estimators.empty()) throw InvalidInput("no estimators selected");
  if (fixed_model) {
    if (!(fixed_model->dims == dims)) throw InvalidInput("fixed model dims differ from the config dims");
    fixed_model->validate(false);
  }
}

std::vector<ModelDraw> draw_models(const ExperimentConfig& config, bool confounding_filter) {
  config.validate();
  std::vector<ModelDraw> out;
  out.reserve(config.M);
  const std::size_t budget = config.draw_budget * config.M;
  for (std::size_t i = 0; out.size() < config.M; ++i) {
    if (i >= budget) {
      throw Error("model filter exhausted after " + std::to_string(budget) + " draws (" +
                  std::to_string(out.size()) + " of " + std::to_string(config.M) + " accepted)");
    }
    ModelDraw m;
    if (config.fixed_model) {
      m.spec = *config.fixed_model;
    } else {
      Rng rng(derive_seed(config.seed, kModelStream, i));
      m.spec = sample_scm_spec(config.dims, rng);
    }
    m.draw_index = i;
    m.truth = true_effect(m.spec, config.x, config.y);
    m.target_conditional = target_conditional(m.spec, config.x, config.y);
    m.kappa_true = condition_number(population_views(m.spec, config.x, config.y).p_w_ex);
    if (confounding_filter && !(std::abs(m.truth - m.target_conditional) > config.filter_threshold)) {
      if (config.fixed_model) throw Error("fixed model does not pass the confounding filter");
      continue;
    }
    if (config.max_condition_number && !(m.kappa_true <= *config.max_condition_number)) {
      if (config.fixed_model) throw Error("fixed model exceeds the condition-number cap");
      continue;
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<ReplicateRecord> run_point_error(const ExperimentConfig& config) {
  return run_grid(config, draw_models(config, false));
}

std::vector<ReplicateRecord> run_baseline_comparison(const ExperimentConfig& config) {
  ExperimentConfig c = config;
  c.estimators = {EstimatorKind::Oracle, EstimatorKind::Reduced,     EstimatorKind::Causal,
                  EstimatorKind::NoAdj,  EstimatorKind::NoAdjTarget, EstimatorKind::WAdj,
                  EstimatorKind::WAdjTarget};
  return run_grid(c, draw_models(c, true));
}

CoverageResult run_coverage(const ExperimentConfig& config) {
  const auto models = draw_models(config, false);
  const auto sizes = config.sample_sizes();
  const std::size_t per_n = config.M * config.N;
  std::vector<std::vector<ReplicateRecord>> slots(sizes.size() * per_n);
  parallel_for(slots.size(), config.workers, [&](std::size_t job) {
    const std::size_t n_index = job / per_n;
    const std::size_t m = (job % per_n) / config.N;
    const std::size_t d = job % config.N;
    const Replicate r = make_replicate(config, models[m], m, d, n_index, sizes[n_index], false);
    slots[job].push_back(run_estimator(EstimatorKind::Reduced, r));
    if (config.bootstrap == 0) return;

    ReplicateRecord rec = blank_record(r, kBootstrapRecordName);
    const auto start = std::chrono::steady_clock::now();
    try {
      const ContingencyCounts counts = ContingencyCounts::from_dataset(r.sample.observed);
      Rng boot_rng(r.seed(kBootstrapStream));
      const BootstrapInterval bi = bootstrap_ci(counts, config.x, config.y, config.bootstrap, config.alpha, boot_rng);
      set_estimate(rec, bi.point_unclipped);
      rec.sigma_hat = bi.sigma_boot;
      rec.ci_lower = bi.lower;
      rec.ci_upper = bi.upper;
      rec.covered = bi.lower <= rec.truth && rec.truth <= bi.upper;
      rec.kappa_hat = slots[job].front().kappa_hat;
    } catch (const std::exception& e) {
      set_failure(rec, e);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    slots[job].push_back(std::move(rec));
  });
  CoverageResult out;
  for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(out.records));
  sort_records(out.records);
  out.summary = summarize(out.records);
  return out;
}

RuntimeResult run_runtime(const ExperimentConfig& config) {
  // Sequential on purpose: concurrent fits would distort the wall times.
  const auto models = draw_models(config, false);
  const auto sizes = config.sample_sizes();
  const bool oracle = needs_oracle(config.estimators);
  RuntimeResult out;
  for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
    for (std::size_t rep = 0; rep < config.runtime_repetitions; ++rep) {
      const std::size_t m = rep % config.M;
      const Replicate r = make_replicate(config, models[m], m, rep, ni, sizes[ni], oracle);
      for (EstimatorKind k : config.estimators) out.records.push_back(run_estimator(k, r));
    }
  }
  sort_records(out.records);
  out.summary = summarize(out.records);
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateRecord>& records) {
  struct Acc {
    std::vector<double> errors, lengths;
    std::size_t failures = 0, covered = 0, with_ci = 0;
    double wall = 0.0;
  };
  std::map<std::pair<std::size_t, std::string>, Acc> groups;
  for (const ReplicateRecord& r : records) {
    Acc& a = groups[{r.n, r.estimator}];
    a.wall += r.wall_seconds;
    if (!r.ok()) {
      ++a.failures;
      continue;
    }
    a.errors.push_back(r.abs_error);
    if (r.covered) {
      ++a.with_ci;
      if (*r.covered) ++a.covered;
    }
    if (r.ci_lower && r.ci_upper) a.lengths.push_back(*r.ci_upper - *r.ci_lower);
  }
  std::vector<SummaryRow> out;
  for (auto& [key, a] : groups) {
    SummaryRow row;
    row.n = key.first;
    row.estimator = key.second;
    row.count = a.errors.size();
    row.failures = a.failures;
    row.total_wall_seconds = a.wall;
    if (!a.errors.empty()) {
      row.median_abs_error = stats::median(a.errors);
      row.mean_abs_error = stats::mean(a.errors);
    } else {
      row.median_abs_error = row.mean_abs_error = kNaN;
    }
    if (a.with_ci > 0) row.coverage = static_cast<double>(a.covered) / static_cast<double>(a.with_ci);
    if (!a.lengths.empty()) row.median_ci_length = stats::median(a.lengths);
    out.push_back(std::move(row));
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace proxyshift
