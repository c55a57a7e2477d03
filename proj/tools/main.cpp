// proxyshift command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data or estimation error.
// Results go to stdout or --out; diagnostics go to stderr.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "proxyshift/baselines.hpp"
#include "proxyshift/causal.hpp"
#include "proxyshift/errors.hpp"
#include "proxyshift/harness.hpp"
#include "proxyshift/identify.hpp"
#include "proxyshift/io.hpp"
#include "proxyshift/proxy.hpp"
#include "proxyshift/reduced.hpp"
#include "proxyshift/scm.hpp"

namespace ps = proxyshift;
using ps::io::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes atomically to `path`, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
  } else {
    ps::io::atomic_write(path, content);
  }
}

struct DimsArgs {
  std::string file;
  std::size_t k_E = 0, k_U = 0, k_W = 0, k_X = 0, k_Y = 0;

  void add(CLI::App* cmd) {
    cmd->add_option("--dims", file, "Dims sidecar JSON");
    cmd->add_option("--k-e", k_E, "Number of source domains");
    cmd->add_option("--k-u", k_U, "Confounder categories (defaults to --k-w)");
    cmd->add_option("--k-w", k_W, "Proxy categories");
    cmd->add_option("--k-x", k_X, "Treatment categories");
    cmd->add_option("--k-y", k_Y, "Outcome categories");
  }

  // With `fallback`, unset cardinalities default to 2.
  ps::CategorySpec resolve(bool fallback) const {
    if (!file.empty()) return ps::io::load_dims(file);
    auto pick = [&](std::size_t v, const char* flag) -> std::size_t {
      if (v > 0) return v;
      if (fallback) return 2;
      throw UsageError(std::string("dims required: pass --dims or ") + flag);
    };
    ps::CategorySpec d;
    d.k_E = pick(k_E, "--k-e");
    d.k_W = pick(k_W, "--k-w");
    d.k_X = pick(k_X, "--k-x");
    d.k_Y = pick(k_Y, "--k-y");
    d.k_U = k_U > 0 ? k_U : d.k_W;
    d.validate();
    return d;
  }
};

std::size_t zero_based(std::size_t one_based, std::size_t card, const char* what) {
  if (one_based < 1 || one_based > card) {
    throw ps::InvalidInput(std::string(what) + " must lie in 1.." + std::to_string(card));
  }
  return one_based - 1;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  DimsArgs dims;
  std::optional<std::uint64_t> seed;
  std::size_t n = 0;
  std::string model_in, model_out, data_out, dims_out;
};

int run_simulate(const SimulateArgs& a) {
  if (!a.seed) throw UsageError("--seed is required");
  ps::ScmSpec spec;
  if (!a.model_in.empty()) {
    spec = ps::io::load_model(a.model_in, false);
  } else {
    ps::Rng model_rng(ps::derive_seed(*a.seed, 0));
    spec = ps::sample_scm_spec(a.dims.resolve(true), model_rng);
  }
  ps::Rng data_rng(ps::derive_seed(*a.seed, 1));
  const ps::Dataset ds = ps::simulate_dataset(spec, a.n, data_rng);
  if (!a.model_out.empty()) ps::io::save_model(a.model_out, spec);
  if (!a.dims_out.empty()) ps::io::atomic_write(a.dims_out, ps::io::dims_to_json(spec.dims).dump(2) + "\n");
  emit(a.data_out, ps::io::dataset_to_csv(ds));
  return 0;
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
  DimsArgs dims;
  std::string data, method = "reduced", out;
  std::size_t x = 1, y = 1, bootstrap = 0, restarts = 1;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

int run_estimate(const EstimateArgs& a) {
  const ps::CategorySpec dims = a.dims.resolve(false);
  const ps::Dataset ds = ps::io::load_dataset(a.data, dims);
  const std::size_t x = zero_based(a.x, dims.k_X, "--x");
  const std::size_t y = zero_based(a.y, dims.k_Y, "--y");
  const ps::ContingencyCounts counts = ps::ContingencyCounts::from_dataset(ds);

  ps::EffectEstimate est;
  json bootstrap = nullptr;
  if (a.method == "reduced") {
    ps::ReducedOptions o;
    o.alpha = a.alpha;
    est = ps::reduced_estimate(counts, x, y, o);
    if (a.bootstrap > 0) {
      ps::Rng rng(ps::derive_seed(a.seed, 0));
      const auto bi = ps::bootstrap_ci(counts, x, y, a.bootstrap, a.alpha, rng);
      bootstrap = {{"B", a.bootstrap},
                   {"lower", bi.lower},
                   {"upper", bi.upper},
                   {"lower_unclipped", bi.lower_unclipped},
                   {"upper_unclipped", bi.upper_unclipped},
                   {"sigma", bi.sigma_boot},
                   {"failed_resamples", bi.failed_resamples}};
    }
  } else if (a.method == "causal") {
    ps::FitOptions o;
    o.seed = a.seed;
    o.restarts = a.restarts;
    est = ps::causal_estimate(counts, x, y, o);
  } else if (a.method == "noadj" || a.method == "wadj") {
    const double p = a.method == "noadj" ? ps::no_adjustment(ds, x, y) : ps::w_adjustment(ds, x, y);
    est = ps::clipped_estimate(p, std::nullopt, a.alpha);
    est.n = counts.n;
    est.kappa_hat = std::numeric_limits<double>::quiet_NaN();
    if (a.method == "noadj") {
      std::uint64_t n_x = 0;
      for (std::size_t e = 0; e < dims.k_E; ++e)
        for (std::size_t w = 0; w < dims.k_W; ++w)
          for (std::size_t yy = 0; yy < dims.k_Y; ++yy) n_x += counts.at(yy, x, w, e);
      est.ci = ps::wald_interval(p, n_x, a.alpha);
    }
  } else {
    throw UsageError("unknown --method \"" + a.method + "\" (reduced, causal, noadj, wadj)");
  }

  json j = {{"method", a.method}, {"x", a.x}, {"y", a.y}};
  j.update(ps::io::estimate_to_json(est));
  j["bootstrap"] = bootstrap;
  emit(a.out, j.dump(2) + "\n");
  return 0;
}

// ---- identify --------------------------------------------------------------

struct IdentifyArgs {
  std::string model, out;
  std::size_t x = 1, y = 1;
  std::optional<double> ridge;
};

int run_identify(const IdentifyArgs& a) {
  const ps::ScmSpec spec = ps::io::load_model(a.model, false);
  const std::size_t x = zero_based(a.x, spec.dims.k_X, "--x");
  const std::size_t y = zero_based(a.y, spec.dims.k_Y, "--y");
  const ps::PopulationViews v = ps::population_views(spec, x, y);
  ps::IdentifyOptions o;
  o.ridge = a.ridge;
  const double effect = ps::identify_effect(v.p_y_ex, v.p_w_ex, v.q_w, o);
  json q_w = json::array();
  for (Eigen::Index i = 0; i < v.q_w.size(); ++i) q_w.push_back(v.q_w(i));
  const double kappa = ps::condition_number(v.p_w_ex);
  json j = {{"x", a.x},
            {"y", a.y},
            {"effect", effect},
            {"true_effect", ps::true_effect(spec, x, y)},
            {"kappa", std::isfinite(kappa) ? json(kappa) : json(nullptr)},
            {"q_w", q_w}};
  emit(a.out, j.dump(2) + "\n");
  return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string kind, config, out, summary;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

int run_bench(const BenchArgs& a) {
  ps::ExperimentConfig c = ps::io::load_experiment_config(a.config);
  if (a.workers) c.workers = *a.workers;
  if (a.seed) c.seed = *a.seed;
  c.validate();
  std::vector<ps::ReplicateRecord> records;
  std::vector<ps::SummaryRow> summary;
  if (a.kind == "point-error") {
    records = ps::run_point_error(c);
    summary = ps::summarize(records);
  } else if (a.kind == "baselines") {
    records = ps::run_baseline_comparison(c);
    summary = ps::summarize(records);
  } else if (a.kind == "coverage") {
    auto r = ps::run_coverage(c);
    records = std::move(r.records);
    summary = std::move(r.summary);
  } else if (a.kind == "runtime") {
    auto r = ps::run_runtime(c);
    records = std::move(r.records);
    summary = std::move(r.summary);
  } else {
    throw UsageError("unknown bench kind \"" + a.kind + "\" (point-error, baselines, coverage, runtime)");
  }
  if (!a.summary.empty()) ps::io::atomic_write(a.summary, ps::io::summary_to_json(summary).dump(2) + "\n");
  emit(a.out, ps::io::records_to_csv(records));
  return 0;
}

// ---- reduce-proxy ----------------------------------------------------------

struct ReduceArgs {
  std::string matrix, model, out, data, data_out;
  DimsArgs dims;
  std::size_t x = 1;
};

int run_reduce(const ReduceArgs& a) {
  ps::Matrix p_w_ex;
  if (!a.matrix.empty() == !a.model.empty()) throw UsageError("pass exactly one of --matrix or --model");
  if (!a.matrix.empty()) {
    const json j = json::parse(ps::io::read_file(a.matrix));
    if (!j.is_array() || j.empty() || !j[0].is_array()) throw ps::InvalidInput("matrix must be a list of columns");
    const std::size_t cols = j.size(), rows = j[0].size();
    p_w_ex.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t c = 0; c < cols; ++c) {
      if (j[c].size() != rows) throw ps::InvalidInput("matrix columns differ in length");
      for (std::size_t r = 0; r < rows; ++r) p_w_ex(r, c) = j[c][r].get<double>();
    }
  } else {
    const ps::ScmSpec spec = ps::io::load_model(a.model, false);
    p_w_ex = ps::population_views(spec, zero_based(a.x, spec.dims.k_X, "--x"), 0).p_w_ex;
  }
  const ps::ProxyMapping mapping = ps::reduce_proxy(p_w_ex);
  if (!a.data.empty()) {
    if (a.data_out.empty()) throw UsageError("--data needs --data-out");
    const ps::Dataset ds = ps::io::load_dataset(a.data, a.dims.resolve(false));
    ps::io::save_dataset(a.data_out, mapping.apply(ds));
  }
  emit(a.out, ps::io::mapping_to_json(mapping).dump(2) + "\n");
  return 0;
}

// ---- discretize ------------------------------------------------------------

struct DiscretizeArgs {
  std::string values, partition, out;
  std::vector<double> edges;
  std::optional<double> lower, upper;
};

int run_discretize(const DiscretizeArgs& a) {
  if (a.edges.empty() == a.partition.empty()) throw UsageError("pass exactly one of --edges or --partition");
  ps::Partition p;
  if (!a.partition.empty()) {
    p = ps::io::partition_from_json(json::parse(ps::io::read_file(a.partition)));
  } else {
    p.cuts = a.edges;
  }
  if (a.lower) p.lower = *a.lower;
  if (a.upper) p.upper = *a.upper;
  p.validate();

  std::istringstream in(ps::io::read_file(a.values));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \r", used) != std::string::npos) throw std::invalid_argument("trailing text");
    } catch (const std::logic_error&) {
      throw ps::ParseError("invalid number \"" + line + "\"", line_no);
    }
  }
  std::string outtext;
  for (std::size_t code : ps::discretize_proxy(values, p)) outtext += std::to_string(code) + "\n";
  emit(a.out, outtext);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal effect estimation in an unseen domain from a proxy of a hidden confounder"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "proxyshift 0.1.0");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Draw a model and simulate a dataset");
  sim.dims.add(c_sim);
  c_sim->add_option("--seed", sim.seed, "Master seed (required)");
  c_sim->add_option("--n", sim.n, "Number of units")->required();
  c_sim->add_option("--model", sim.model_in, "Simulate from this model instead of drawing one");
  c_sim->add_option("--model-out", sim.model_out, "Write the model JSON here");
  c_sim->add_option("--dims-out", sim.dims_out, "Write the dims sidecar JSON here");
  c_sim->add_option("--out,--data-out", sim.data_out, "Write the dataset CSV here (default stdout)");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate q(y|do(x)) from a dataset");
  est.dims.add(c_est);
  c_est->add_option("--data", est.data, "Dataset CSV")->required();
  c_est->add_option("--x", est.x, "Treatment category (1-based)");
  c_est->add_option("--y", est.y, "Outcome category (1-based)");
  c_est->add_option("--method", est.method, "reduced | causal | noadj | wadj");
  c_est->add_option("--alpha", est.alpha, "Interval level is 1 - alpha");
  c_est->add_option("--bootstrap", est.bootstrap, "Bootstrap resamples (reduced only)");
  c_est->add_option("--seed", est.seed, "Seed for bootstrap and optimiser starts");
  c_est->add_option("--restarts", est.restarts, "Optimiser restarts (causal only)");
  c_est->add_option("--out", est.out, "Write JSON here (default stdout)");

  IdentifyArgs idn;
  auto* c_idn = app.add_subcommand("identify", "Population-level effect from a model file");
  c_idn->add_option("--model", idn.model, "Model JSON")->required();
  c_idn->add_option("--x", idn.x, "Treatment category (1-based)");
  c_idn->add_option("--y", idn.y, "Outcome category (1-based)");
  c_idn->add_option("--ridge", idn.ridge, "Tikhonov term for a rank-deficient P(W|E,x)");
  c_idn->add_option("--out", idn.out, "Write JSON here (default stdout)");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Run a simulation study");
  c_bench->add_option("kind", bench.kind, "point-error | baselines | coverage | runtime")->required();
  c_bench->add_option("--config", bench.config, "Experiment config JSON")->required();
  c_bench->add_option("--out", bench.out, "Write the records CSV here (default stdout)");
  c_bench->add_option("--summary", bench.summary, "Write the JSON summary here");
  c_bench->add_option("--workers", bench.workers, "Worker threads");
  c_bench->add_option("--seed", bench.seed, "Override the config's master seed");

  ReduceArgs red;
  auto* c_red = app.add_subcommand("reduce-proxy", "Merge proxy categories until P(W|E,x) has full row rank");
  c_red->add_option("--matrix", red.matrix, "P(W|E,x) as a JSON list of columns");
  c_red->add_option("--model", red.model, "Take P(W|E,x) from this model");
  c_red->add_option("--x", red.x, "Treatment category for --model (1-based)");
  c_red->add_option("--data", red.data, "Dataset CSV to recode");
  c_red->add_option("--data-out", red.data_out, "Recoded dataset CSV");
  red.dims.add(c_red);
  c_red->add_option("--out", red.out, "Write the mapping JSON here (default stdout)");

  DiscretizeArgs disc;
  auto* c_disc = app.add_subcommand("discretize", "Bin a continuous proxy");
  c_disc->add_option("--values", disc.values, "One value per line")->required();
  c_disc->add_option("--edges", disc.edges, "Cut points")->delimiter(',');
  c_disc->add_option("--partition", disc.partition, "Partition JSON");
  c_disc->add_option("--lower", disc.lower, "Lower support bound");
  c_disc->add_option("--upper", disc.upper, "Upper support bound");
  c_disc->add_option("--out", disc.out, "Write 1-based codes here (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*c_sim) return run_simulate(sim);
    if (*c_est) return run_estimate(est);
    if (*c_idn) return run_identify(idn);
    if (*c_bench) return run_bench(bench);
    if (*c_red) return run_reduce(red);
    if (*c_disc) return run_discretize(disc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ps::RankDeficiencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}
