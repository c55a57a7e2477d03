#pragma once

// File formats.
//
// Dataset CSV: header `domain,w,x,y`; domain is a 1-based source index or
// `T` for the target; w, x, y are 1-based; x and y are empty on target rows.
//
// Dims JSON: {"k_E": .., "k_U": .., "k_W": .., "k_X": .., "k_Y": ..} with an
// optional "labels" object keyed by axis name ("E", "U", ...).
//
// Model JSON: {"dims", "p_u_given_e", "q_u", "p_w_given_u", "p_x_given_u",
// "p_y_given_uwx", "domain_prior"}. Matrices are lists of columns (each
// column a pmf); p_y_given_uwx is nested [u][w][x] -> pmf over Y;
// domain_prior lists the k_E sources then the target.
//
// Experiment config JSON: {"dims", "M", "N", "n", "n_sweep", "estimators",
// "alpha", "bootstrap", "filter_threshold", "seed", "workers", "x", "y",
// "draw_budget", "max_condition_number", "model", "restarts",
// "max_iterations", "runtime_repetitions"}; only "dims" is required (or
// implied by "model"). x and y are 1-based. "model" is an inline model
// object or a path relative to the config file.
//
// Partition JSON: {"cuts": [...], "lower": .., "upper": ..}; bounds optional.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "proxyshift/estimate.hpp"
#include "proxyshift/harness.hpp"
#include "proxyshift/proxy.hpp"
#include "proxyshift/scm.hpp"

namespace proxyshift::io {

using nlohmann::json;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Writes to a temporary sibling file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

json dims_to_json(const CategorySpec& dims);
CategorySpec dims_from_json(const json& j);
CategorySpec load_dims(const std::filesystem::path& path);

json model_to_json(const ScmSpec& spec);
/// Validates with full support required unless `require_full_support` is off.
ScmSpec model_from_json(const json& j, bool require_full_support = true);
ScmSpec load_model(const std::filesystem::path& path, bool require_full_support = true);
void save_model(const std::filesystem::path& path, const ScmSpec& spec);

/// Throws ParseError with 1-based line numbers (the header is line 1).
Dataset parse_dataset(std::istream& in, const CategorySpec& dims);
Dataset load_dataset(const std::filesystem::path& path, const CategorySpec& dims);
std::string dataset_to_csv(const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Stable estimate schema; null for absent optional fields.
json estimate_to_json(const EffectEstimate& est);

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Fixed header; x and y are written 1-based, absent values as empty fields.
std::string records_to_csv(const std::vector<ReplicateRecord>& records);
json summary_to_json(const std::vector<SummaryRow>& rows);

Partition partition_from_json(const json& j);
json partition_to_json(const Partition& p);
json mapping_to_json(const ProxyMapping& m);

}  // namespace proxyshift::io
