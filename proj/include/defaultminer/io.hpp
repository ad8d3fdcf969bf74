#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "defaultminer/default_set.hpp"
#include "defaultminer/evaluation.hpp"
#include "defaultminer/exact.hpp"
#include "defaultminer/format.hpp"
#include "defaultminer/risk_matrix.hpp"
#include "defaultminer/space.hpp"

namespace defaultminer {

inline constexpr int kFormatVersion = 1;

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

// Write-then-rename so readers never observe a half-written artifact.
inline void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline void check_format_version(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw std::runtime_error(what + ": missing format_version");
  }
  const int version = j["format_version"].get<int>();
  if (version != kFormatVersion) {
    throw std::runtime_error(what + ": unsupported format_version " + std::to_string(version) +
                             " (expected " + std::to_string(kFormatVersion) + ")");
  }
}

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_split(const std::string& line, const std::string& context) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error(context + ": unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

inline nlohmann::ordered_json config_value_to_json(const ConfigValue& value) {
  if (const double* v = std::get_if<double>(&value)) return *v;
  return std::get<std::string>(value);
}

inline ConfigValue config_value_from_json(const nlohmann::json& j, const std::string& context) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw std::runtime_error(context + ": configuration values must be numbers or strings");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Runs file: CSV `dataset_id,<dim1>,...,<dimD>,measure,value`.
// ---------------------------------------------------------------------------

inline void write_runs_csv(const std::filesystem::path& path, const HyperparameterSpace& space,
                           std::span<const RunRecord> records) {
  std::string out = "dataset_id";
  for (const Dimension& dim : space.dimensions()) out += "," + detail::csv_escape(dim.name);
  out += ",measure,value\n";
  for (const RunRecord& rec : records) {
    out += detail::csv_escape(rec.dataset_id);
    for (std::size_t i = 0; i < rec.values.size(); ++i) {
      if (const double* v = std::get_if<double>(&rec.values[i])) {
        out += "," + format_double(*v);
      } else {
        out += "," + detail::csv_escape(std::get<std::string>(rec.values[i]));
      }
    }
    out += "," + detail::csv_escape(rec.measure) + "," + format_double(rec.value) + "\n";
  }
  write_text_atomic(path, out);
}

inline std::vector<RunRecord> read_runs_csv(const std::filesystem::path& path,
                                            const HyperparameterSpace& space,
                                            bool higher_is_better) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  const std::string file = path.string();

  if (!std::getline(in, line)) throw std::runtime_error("runs csv '" + file + "': empty file");
  const std::vector<std::string> header = detail::csv_split(line, "runs csv '" + file + "': line 1");
  const std::size_t dims = space.size();
  if (header.size() != dims + 3 || header.front() != "dataset_id" ||
      header[dims + 1] != "measure" || header[dims + 2] != "value") {
    throw std::runtime_error("runs csv '" + file +
                             "': header must be dataset_id,<dimensions...>,measure,value");
  }
  // Map header columns onto space dimensions by name (any order).
  std::vector<std::size_t> dim_of_column(dims);
  std::vector<bool> seen(dims, false);
  for (std::size_t c = 0; c < dims; ++c) {
    bool found = false;
    for (std::size_t d = 0; d < dims; ++d) {
      if (space.dimension(d).name == header[c + 1]) {
        if (seen[d]) throw std::runtime_error("runs csv '" + file + "': duplicate dimension column '" +
                                              header[c + 1] + "'");
        dim_of_column[c] = d;
        seen[d] = true;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::runtime_error("runs csv '" + file + "': unknown dimension column '" +
                               header[c + 1] + "'");
    }
  }

  std::vector<RunRecord> records;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    const std::string context = "runs csv '" + file + "': line " + std::to_string(line_number);
    const std::vector<std::string> fields = detail::csv_split(line, context);
    if (fields.size() != dims + 3) {
      throw std::runtime_error(context + ": expected " + std::to_string(dims + 3) +
                               " fields, got " + std::to_string(fields.size()));
    }
    RunRecord rec;
    rec.dataset_id = fields[0];
    rec.values.resize(dims);
    for (std::size_t c = 0; c < dims; ++c) {
      const Dimension& dim = space.dimension(dim_of_column[c]);
      if (dim.numeric()) {
        rec.values[dim_of_column[c]] = parse_double(fields[c + 1], context + ", column '" + dim.name + "'");
      } else {
        rec.values[dim_of_column[c]] = fields[c + 1];
      }
    }
    rec.measure = fields[dims + 1];
    rec.value = parse_double(fields[dims + 2], context + ", column 'value'");
    rec.higher_is_better = higher_is_better;
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Matrix persistence: CSV plus a `<file>.meta.json` sidecar carrying the
// provenance, the configuration values and optionally the space.
// ---------------------------------------------------------------------------

inline std::filesystem::path matrix_sidecar_path(const std::filesystem::path& csv_path) {
  return csv_path.string() + ".meta.json";
}

inline void write_matrix(const std::filesystem::path& csv_path, const RiskMatrix& matrix,
                         const HyperparameterSpace* space = nullptr) {
  std::string out = "dataset_id";
  for (std::size_t m = 0; m < matrix.num_configurations(); ++m) out += "," + std::to_string(m);
  out += "\n";
  for (std::size_t k = 0; k < matrix.num_datasets(); ++k) {
    out += detail::csv_escape(matrix.dataset_ids()[k]);
    for (std::size_t m = 0; m < matrix.num_configurations(); ++m) {
      out += "," + format_double(matrix.at(k, m));
    }
    out += "\n";
  }
  write_text_atomic(csv_path, out);

  nlohmann::ordered_json meta;
  meta["format_version"] = kFormatVersion;
  meta["provenance"] = provenance_name(matrix.provenance());
  meta["space"] = space != nullptr ? space_to_json(*space) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const Configuration& config : matrix.configurations()) {
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (const ConfigValue& value : config.values) {
      values.push_back(detail::config_value_to_json(value));
    }
    configs.push_back(std::move(values));
  }
  meta["configurations"] = std::move(configs);
  write_text_atomic(matrix_sidecar_path(csv_path), meta.dump(2) + "\n");
}

struct LoadedMatrix {
  RiskMatrix matrix;
  std::optional<HyperparameterSpace> space;
};

inline LoadedMatrix read_matrix_with_space(const std::filesystem::path& csv_path) {
  const std::string text = read_text(csv_path);
  std::istringstream in(text);
  std::string line;
  const std::string file = csv_path.string();

  if (!std::getline(in, line)) throw std::runtime_error("matrix csv '" + file + "': empty file");
  const std::vector<std::string> header =
      detail::csv_split(line, "matrix csv '" + file + "': line 1");
  if (header.size() < 2 || header.front() != "dataset_id") {
    throw std::runtime_error("matrix csv '" + file + "': header must start with dataset_id");
  }
  const std::size_t num_cols = header.size() - 1;

  std::vector<std::string> dataset_ids;
  std::vector<double> values;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line == "\r") continue;
    const std::string context = "matrix csv '" + file + "': line " + std::to_string(line_number);
    const std::vector<std::string> fields = detail::csv_split(line, context);
    if (fields.size() != num_cols + 1) {
      throw std::runtime_error(context + ": expected " + std::to_string(num_cols + 1) +
                               " fields, got " + std::to_string(fields.size()));
    }
    dataset_ids.push_back(fields[0]);
    for (std::size_t m = 0; m < num_cols; ++m) {
      values.push_back(parse_double(fields[m + 1], context + ", column " + std::to_string(m)));
    }
  }
  if (dataset_ids.empty()) throw std::runtime_error("matrix csv '" + file + "': no data rows");

  MatrixProvenance provenance = MatrixProvenance::kRaw;
  std::vector<Configuration> configurations(num_cols);
  for (std::size_t m = 0; m < num_cols; ++m) configurations[m].id = static_cast<int>(m);
  std::optional<HyperparameterSpace> space;

  const std::filesystem::path sidecar = matrix_sidecar_path(csv_path);
  if (std::filesystem::exists(sidecar)) {
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(read_text(sidecar));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("matrix sidecar '" + sidecar.string() + "': malformed JSON: " +
                               e.what());
    }
    detail::check_format_version(meta, "matrix sidecar '" + sidecar.string() + "'");
    provenance = provenance_from_name(meta.value("provenance", std::string("raw")));
    if (meta.contains("space") && !meta["space"].is_null()) {
      space = space_from_json(meta["space"]);
    }
    if (meta.contains("configurations") && meta["configurations"].is_array()) {
      const auto& configs = meta["configurations"];
      if (configs.size() != num_cols) {
        throw std::runtime_error("matrix sidecar '" + sidecar.string() +
                                 "': configuration count does not match the csv");
      }
      for (std::size_t m = 0; m < num_cols; ++m) {
        for (const auto& vj : configs[m]) {
          configurations[m].values.push_back(detail::config_value_from_json(
              vj, "matrix sidecar '" + sidecar.string() + "'"));
        }
      }
    }
  }

  const std::size_t num_rows = dataset_ids.size();
  Matrix risks(num_rows, num_cols, std::move(values));
  return LoadedMatrix{RiskMatrix(std::move(dataset_ids), std::move(configurations),
                                 std::move(risks), provenance),
                      std::move(space)};
}

inline RiskMatrix read_matrix(const std::filesystem::path& csv_path) {
  return read_matrix_with_space(csv_path).matrix;
}

// ---------------------------------------------------------------------------
// Default sets.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json default_set_to_json(const DefaultSet& set) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["source"] = source_name(set.source);
  j["aggregator"] = set.agg.ToString();
  j["indices"] = set.indices;
  j["prefix_risks"] = set.prefix_risks;
  j["objective"] = set.objective();
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (const Configuration& config : set.configurations) {
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (const ConfigValue& value : config.values) {
      values.push_back(detail::config_value_to_json(value));
    }
    configs.push_back(std::move(values));
  }
  j["configurations"] = std::move(configs);
  return j;
}

inline DefaultSet default_set_from_json(const nlohmann::json& j, const std::string& what) {
  detail::check_format_version(j, what);
  DefaultSet set;
  set.source = source_from_name(j.at("source").get<std::string>());
  set.agg = AggregatorSpec::Parse(j.at("aggregator").get<std::string>());
  set.indices = j.at("indices").get<std::vector<int>>();
  set.prefix_risks = j.at("prefix_risks").get<std::vector<double>>();
  if (j.contains("configurations")) {
    for (std::size_t i = 0; i < j["configurations"].size(); ++i) {
      Configuration config;
      config.id = i < set.indices.size() ? set.indices[i] : -1;
      for (const auto& vj : j["configurations"][i]) {
        config.values.push_back(detail::config_value_from_json(vj, what));
      }
      set.configurations.push_back(std::move(config));
    }
  }
  return set;
}

inline void write_default_set(const std::filesystem::path& path, const DefaultSet& set) {
  write_text_atomic(path, default_set_to_json(set).dump(2) + "\n");
}

// Exact-solver artifacts keep the default-set schema and add solve metadata.
// The explored-node count stays out: it varies with scheduling, and artifacts
// must be byte-reproducible.
inline void write_exact_result(const std::filesystem::path& path, const ExactResult& result) {
  nlohmann::ordered_json j = default_set_to_json(result.defaults);
  j["status"] = result.status == SolveStatus::kOptimal ? "optimal" : "time-limit";
  j["bound"] = result.bound;
  j["gap"] = result.gap();
  write_text_atomic(path, j.dump(2) + "\n");
}

inline DefaultSet read_default_set(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("default set '" + path.string() + "': malformed JSON: " + e.what());
  }
  return default_set_from_json(j, "default set '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Evaluation reports.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["dataset_ids"] = report.dataset_ids;
  nlohmann::ordered_json strategies = nlohmann::ordered_json::array();
  for (const StrategyResult& s : report.strategies) {
    nlohmann::ordered_json sj;
    sj["label"] = s.label;
    sj["budget"] = s.budget;
    sj["achieved"] = s.achieved;
    sj["normalized"] = s.normalized;
    strategies.push_back(std::move(sj));
  }
  j["strategies"] = std::move(strategies);
  j["average_ranks"] = report.average_ranks;
  if (report.friedman.has_value()) {
    j["friedman"] = {{"statistic", report.friedman->statistic},
                     {"p_value", report.friedman->p_value}};
  } else {
    j["friedman"] = nullptr;
  }
  j["nemenyi_critical_difference"] =
      report.nemenyi_cd.has_value() ? nlohmann::ordered_json(*report.nemenyi_cd)
                                    : nlohmann::ordered_json(nullptr);
  return j;
}

inline EvaluationReport report_from_json(const nlohmann::json& j, const std::string& what) {
  detail::check_format_version(j, what);
  EvaluationReport report;
  report.dataset_ids = j.at("dataset_ids").get<std::vector<std::string>>();
  for (const auto& sj : j.at("strategies")) {
    StrategyResult s;
    s.label = sj.at("label").get<std::string>();
    s.budget = sj.at("budget").get<int>();
    s.achieved = sj.at("achieved").get<std::vector<double>>();
    s.normalized = sj.at("normalized").get<std::vector<double>>();
    report.strategies.push_back(std::move(s));
  }
  report.average_ranks = j.at("average_ranks").get<std::vector<double>>();
  if (j.contains("friedman") && !j["friedman"].is_null()) {
    report.friedman = FriedmanResult{j["friedman"].at("statistic").get<double>(),
                                     j["friedman"].at("p_value").get<double>()};
  }
  if (j.contains("nemenyi_critical_difference") && !j["nemenyi_critical_difference"].is_null()) {
    report.nemenyi_cd = j["nemenyi_critical_difference"].get<double>();
  }
  return report;
}

inline void write_report(const std::filesystem::path& path, const EvaluationReport& report) {
  write_text_atomic(path, report_to_json(report).dump(2) + "\n");
}

inline EvaluationReport read_report(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("report '" + path.string() + "': malformed JSON: " + e.what());
  }
  return report_from_json(j, "report '" + path.string() + "'");
}

// Plot-data CSV for critical-difference diagrams: one row per strategy.
inline void write_rank_plot_csv(const std::filesystem::path& path,
                                const EvaluationReport& report) {
  std::string out = "strategy,budget,average_rank\n";
  for (std::size_t s = 0; s < report.strategies.size(); ++s) {
    out += detail::csv_escape(report.strategies[s].label) + "," +
           std::to_string(report.strategies[s].budget) + "," +
           format_double(report.average_ranks[s]) + "\n";
  }
  write_text_atomic(path, out);
}

}  // namespace defaultminer
