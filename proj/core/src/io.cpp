#include "proxyshift/io.hpp"

#include "proxyshift/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>
#include <vector>

namespace proxyshift::io {

namespace {

using Idx = Eigen::Index;

json matrix_columns(const Matrix& m) {
  json cols = json::array();
  for (Idx c = 0; c < m.cols(); ++c) {
    json col = json::array();
    for (Idx r = 0; r < m.rows(); ++r) col.push_back(m(r, c));
    cols.push_back(std::move(col));
  }
  return cols;
}

json vector_list(const Vector& v) {
  json out = json::array();
  for (Idx i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

Matrix matrix_from_columns(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  if (!j.is_array() || j.size() != cols) {
    throw InvalidInput(std::string(name) + ": expected " + std::to_string(cols) + " columns");
  }
  Matrix m(static_cast<Idx>(rows), static_cast<Idx>(cols));
  for (std::size_t c = 0; c < cols; ++c) {
    const json& col = j[c];
    if (!col.is_array() || col.size() != rows) {
      throw InvalidInput(std::string(name) + ": column " + std::to_string(c) + " must have " +
                         std::to_string(rows) + " entries");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (!col[r].is_number()) throw InvalidInput(std::string(name) + ": non-numeric entry");
      m(static_cast<Idx>(r), static_cast<Idx>(c)) = col[r].get<double>();
    }
  }
  return m;
}

Vector vector_from_list(const json& j, std::size_t size, const char* name) {
  return matrix_from_columns(json::array({j}), size, 1, name).col(0);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::size_t parse_index(std::string_view field, std::size_t card, const char* axis, std::size_t line) {
  std::size_t v = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(std::string("invalid ") + axis + " index \"" + std::string(field) + "\"", line);
  }
  if (v < 1 || v > card) {
    throw ParseError(std::string(axis) + " index " + std::to_string(v) + " out of range 1.." + std::to_string(card),
                     line);
  }
  return v - 1;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json dims_to_json(const CategorySpec& d) {
  json j = {{"k_E", d.k_E}, {"k_U", d.k_U}, {"k_W", d.k_W}, {"k_X", d.k_X}, {"k_Y", d.k_Y}};
  json labels = json::object();
  const std::pair<const char*, const std::vector<std::string>*> axes[] = {
      {"E", &d.labels_E}, {"U", &d.labels_U}, {"W", &d.labels_W}, {"X", &d.labels_X}, {"Y", &d.labels_Y}};
  for (const auto& [name, l] : axes) {
    if (!l->empty()) labels[name] = *l;
  }
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

CategorySpec dims_from_json(const json& j) {
  CategorySpec d;
  auto card = [&](const char* key) {
    const json& v = require(j, key);
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw InvalidInput(std::string(key) + " must be a positive integer");
    }
    return v.get<std::size_t>();
  };
  d.k_E = card("k_E");
  d.k_U = card("k_U");
  d.k_W = card("k_W");
  d.k_X = card("k_X");
  d.k_Y = card("k_Y");
  if (j.contains("labels")) {
    const json& l = j.at("labels");
    auto get = [&](const char* axis, std::vector<std::string>& out) {
      if (l.contains(axis)) out = l.at(axis).get<std::vector<std::string>>();
    };
    get("E", d.labels_E);
    get("U", d.labels_U);
    get("W", d.labels_W);
    get("X", d.labels_X);
    get("Y", d.labels_Y);
  }
  d.validate();
  return d;
}

CategorySpec load_dims(const std::filesystem::path& path) {
  try {
    return dims_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

json model_to_json(const ScmSpec& spec) {
  const auto& d = spec.dims;
  json y = json::array();
  for (std::size_t u = 0; u < d.k_U; ++u) {
    json by_w = json::array();
    for (std::size_t w = 0; w < d.k_W; ++w) {
      json by_x = json::array();
      for (std::size_t x = 0; x < d.k_X; ++x) {
        json pmf = json::array();
        for (std::size_t ys = 0; ys < d.k_Y; ++ys) pmf.push_back(spec.p_y(ys, u, w, x));
        by_x.push_back(std::move(pmf));
      }
      by_w.push_back(std::move(by_x));
    }
    y.push_back(std::move(by_w));
  }
  return json{{"dims", dims_to_json(d)},
              {"p_u_given_e", matrix_columns(spec.p_u_given_e.matrix())},
              {"q_u", vector_list(spec.q_u.vector())},
              {"p_w_given_u", matrix_columns(spec.p_w_given_u.matrix())},
              {"p_x_given_u", matrix_columns(spec.p_x_given_u.matrix())},
              {"p_y_given_uwx", std::move(y)},
              {"domain_prior", vector_list(spec.domain_prior.vector())}};
}

ScmSpec model_from_json(const json& j, bool require_full_support) {
  try {
    ScmSpec s;
    s.dims = dims_from_json(require(j, "dims"));
    const auto& d = s.dims;
    s.p_u_given_e = StochasticMatrix(matrix_from_columns(require(j, "p_u_given_e"), d.k_U, d.k_E, "p_u_given_e"));
    s.q_u = ProbVector(vector_from_list(require(j, "q_u"), d.k_U, "q_u"));
    s.p_w_given_u = StochasticMatrix(matrix_from_columns(require(j, "p_w_given_u"), d.k_W, d.k_U, "p_w_given_u"));
    s.p_x_given_u = StochasticMatrix(matrix_from_columns(require(j, "p_x_given_u"), d.k_X, d.k_U, "p_x_given_u"));
    const json& y = require(j, "p_y_given_uwx");
    if (!y.is_array() || y.size() != d.k_U) throw InvalidInput("p_y_given_uwx: expected k_U entries");
    for (const auto& by_w : y) {
      if (!by_w.is_array() || by_w.size() != d.k_W) throw InvalidInput("p_y_given_uwx: expected k_W entries per u");
      for (const auto& by_x : by_w) {
        if (!by_x.is_array() || by_x.size() != d.k_X) {
          throw InvalidInput("p_y_given_uwx: expected k_X entries per (u, w)");
        }
      }
    }
    s.p_y_given_uwx = make_outcome_tensor(d, [&](std::size_t ys, std::size_t u, std::size_t w, std::size_t x) {
      const json& pmf = y[u][w][x];
      if (!pmf.is_array() || pmf.size() != d.k_Y) throw InvalidInput("p_y_given_uwx: pmf must have k_Y entries");
      return pmf[ys].get<double>();
    });
    s.domain_prior = ProbVector(vector_from_list(require(j, "domain_prior"), d.k_E + 1, "domain_prior"));
    s.validate(require_full_support);
    return s;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed model: ") + e.what());
  }
}

ScmSpec load_model(const std::filesystem::path& path, bool require_full_support) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return model_from_json(j, require_full_support);
}

void save_model(const std::filesystem::path& path, const ScmSpec& spec) {
  atomic_write(path, model_to_json(spec).dump(2) + "\n");
}

Dataset parse_dataset(std::istream& in, const CategorySpec& dims) {
  dims.validate();
  Dataset ds;
  ds.dims = dims;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (!header_seen) {
      if (line != "domain,w,x,y") throw ParseError("expected header \"domain,w,x,y\"", line_no);
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) {
      throw ParseError("expected 4 fields, got " + std::to_string(f.size()), line_no);
    }
    Record r;
    const auto dom = trim(f[0]);
    r.w = parse_index(trim(f[1]), dims.k_W, "w", line_no);
    const auto fx = trim(f[2]);
    const auto fy = trim(f[3]);
    if (dom == "T") {
      if (!fx.empty() || !fy.empty()) throw ParseError("target row carries x/y", line_no);
      r.domain = kTargetDomain;
    } else {
      r.domain = parse_index(dom, dims.k_E, "domain", line_no);
      if (fx.empty() || fy.empty()) throw ParseError("source row is missing x or y", line_no);
      r.x = parse_index(fx, dims.k_X, "x", line_no);
      r.y = parse_index(fy, dims.k_Y, "y", line_no);
    }
    ds.records.push_back(r);
  }
  if (!header_seen) throw ParseError("empty dataset file (missing header)", 1);
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const CategorySpec& dims) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_dataset(in, dims);
}

std::string dataset_to_csv(const Dataset& ds) {
  std::string out = "domain,w,x,y\n";
  out.reserve(out.size() + ds.records.size() * 10);
  for (const Record& r : ds.records) {
    if (r.is_target()) {
      out += "T," + std::to_string(r.w + 1) + ",,\n";
    } else {
      out += std::to_string(r.domain + 1) + ',' + std::to_string(r.w + 1) + ',' + std::to_string(*r.x + 1) + ',' +
             std::to_string(*r.y + 1) + '\n';
    }
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) { atomic_write(path, dataset_to_csv(ds)); }

json estimate_to_json(const EffectEstimate& est) {
  json j;
  j["point"] = est.point;
  j["point_unclipped"] = est.point_unclipped;
  j["sigma_hat"] = est.sigma_hat ? finite_or_null(*est.sigma_hat) : json(nullptr);
  j["n"] = est.n;
  if (est.ci) {
    j["alpha"] = est.ci->alpha;
    j["ci_lower"] = est.ci->lower;
    j["ci_upper"] = est.ci->upper;
    j["ci_lower_unclipped"] = est.ci->lower_unclipped;
    j["ci_upper_unclipped"] = est.ci->upper_unclipped;
  } else {
    j["alpha"] = nullptr;
    j["ci_lower"] = nullptr;
    j["ci_upper"] = nullptr;
    j["ci_lower_unclipped"] = nullptr;
    j["ci_upper_unclipped"] = nullptr;
  }
  j["kappa_hat"] = finite_or_null(est.kappa_hat);
  j["flags"] = {{"rank_perturbed", est.flags.rank_perturbed},
                {"clipped_point", est.flags.clipped_point},
                {"clipped_ci", est.flags.clipped_ci},
                {"empty_cell", est.flags.empty_cell},
                {"misspecified_k_u", est.flags.misspecified_k_u}};
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidInput("experiment config must be a JSON object");
  static const char* const known[] = {"dims",        "M",          "N",         "n",
                                      "n_sweep",     "estimators", "alpha",     "bootstrap",
                                      "filter_threshold", "seed",  "workers",   "x",
                                      "y",           "draw_budget", "max_condition_number", "model",
                                      "restarts",    "max_iterations", "runtime_repetitions"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw InvalidInput("unknown config key \"" + key + "\"");
    }
  }
  try {
    ExperimentConfig c;
    if (j.contains("model")) {
      const json& m = j.at("model");
      c.fixed_model = m.is_string() ? load_model(base_dir / m.get<std::string>()) : model_from_json(m);
      c.dims = c.fixed_model->dims;
      if (j.contains("dims") && !(dims_from_json(j.at("dims")) == c.dims)) {
        throw InvalidInput("config dims differ from the model dims");
      }
    } else {
      c.dims = dims_from_json(require(j, "dims"));
    }
    auto count = [&](const char* key, std::size_t& out) {
      if (!j.contains(key)) return;
      const json& v = j.at(key);
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw InvalidInput(std::string(key) + " must be a non-negative integer");
      }
      out = v.get<std::size_t>();
    };
    count("M", c.M);
    count("N", c.N);
    count("n", c.n);
    count("bootstrap", c.bootstrap);
    count("workers", c.workers);
    count("draw_budget", c.draw_budget);
    count("restarts", c.restarts);
    count("max_iterations", c.max_iterations);
    count("runtime_repetitions", c.runtime_repetitions);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_sweep")) c.n_sweep = j.at("n_sweep").get<std::vector<std::size_t>>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("filter_threshold")) c.filter_threshold = j.at("filter_threshold").get<double>();
    if (j.contains("max_condition_number")) c.max_condition_number = j.at("max_condition_number").get<double>();
    std::size_t x1 = 1, y1 = 1;
    count("x", x1);
    count("y", y1);
    if (x1 < 1 || y1 < 1) throw InvalidInput("x and y are 1-based");
    c.x = x1 - 1;
    c.y = y1 - 1;
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& name : j.at("estimators")) c.estimators.push_back(parse_estimator(name.get<std::string>()));
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return experiment_config_from_json(j, path.parent_path());
}

std::string records_to_csv(const std::vector<ReplicateRecord>& records) {
  std::string out =
      "model,dataset,n,estimator,x,y,estimate,estimate_unclipped,truth,abs_error,kappa_true,kappa_hat,"
      "ci_lower,ci_upper,covered,sigma_hat,wall_seconds,status\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const ReplicateRecord& r : records) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), '"', '\'');
    out += std::to_string(r.model) + ',' + std::to_string(r.dataset) + ',' + std::to_string(r.n) + ',' +
           r.estimator + ',' + std::to_string(r.x + 1) + ',' + std::to_string(r.y + 1) + ',' +
           format_double(r.estimate) + ',' + format_double(r.estimate_unclipped) + ',' + format_double(r.truth) +
           ',' + format_double(r.abs_error) + ',' + format_double(r.kappa_true) + ',' + format_double(r.kappa_hat) +
           ',' + opt(r.ci_lower) + ',' + opt(r.ci_upper) + ',' +
           (r.covered ? (*r.covered ? "1" : "0") : "") + ',' + opt(r.sigma_hat) + ',' +
           format_double(r.wall_seconds) + ",\"" + status + "\"\n";
  }
  return out;
}

json summary_to_json(const std::vector<SummaryRow>& rows) {
  json out = json::array();
  for (const SummaryRow& r : rows) {
    out.push_back({{"estimator", r.estimator},
                   {"n", r.n},
                   {"count", r.count},
                   {"failures", r.failures},
                   {"median_abs_error", finite_or_null(r.median_abs_error)},
                   {"mean_abs_error", finite_or_null(r.mean_abs_error)},
                   {"coverage", r.coverage ? json(*r.coverage) : json(nullptr)},
                   {"median_ci_length", r.median_ci_length ? json(*r.median_ci_length) : json(nullptr)},
                   {"total_wall_seconds", r.total_wall_seconds}});
  }
  return out;
}

Partition partition_from_json(const json& j) {
  try {
    Partition p;
    p.cuts = require(j, "cuts").get<std::vector<double>>();
    if (j.contains("lower") && !j.at("lower").is_null()) p.lower = j.at("lower").get<double>();
    if (j.contains("upper") && !j.at("upper").is_null()) p.upper = j.at("upper").get<double>();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed partition: ") + e.what());
  }
}

json partition_to_json(const Partition& p) {
  return {{"cuts", p.cuts}, {"lower", finite_or_null(p.lower)}, {"upper", finite_or_null(p.upper)}};
}

json mapping_to_json(const ProxyMapping& m) {
  json merges = json::array();
  for (const auto& mg : m.merges) {
    merges.push_back({{"absorbed", mg.absorbed + 1}, {"into", mg.into + 1}, {"coefficient", mg.coefficient}});
  }
  json assignment = json::array();
  for (std::size_t a : m.assignment) assignment.push_back(a + 1);
  return {{"source_cardinality", m.source_cardinality},
          {"target_cardinality", m.target_cardinality},
          {"assignment", assignment},
          {"merges", merges}};
}

}  // namespace proxyshift::io
