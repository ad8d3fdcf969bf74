#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace defaultminer {

enum class DimensionKind { kContinuous, kInteger, kCategorical };
enum class DimensionScale { kLinear, kLog2 };

// One axis of the configuration universe: a bounded numeric range (optionally
// searched in log2 space) or a finite set of categorical levels.
struct Dimension {
  std::string name;
  DimensionKind kind = DimensionKind::kContinuous;
  double low = 0.0;   // numeric kinds only
  double high = 0.0;  // numeric kinds only
  std::vector<std::string> levels;  // categorical only
  DimensionScale scale = DimensionScale::kLinear;

  bool numeric() const { return kind != DimensionKind::kCategorical; }
  bool operator==(const Dimension&) const = default;
};

namespace detail {

inline void validate_dimensions(const std::vector<Dimension>& dims) {
  if (dims.empty()) throw std::invalid_argument("space has no dimensions");
  std::set<std::string> seen;
  for (const Dimension& d : dims) {
    if (d.name.empty()) throw std::invalid_argument("dimension with empty name");
    if (!seen.insert(d.name).second) {
      throw std::invalid_argument("duplicate dimension name '" + d.name + "'");
    }
    if (d.numeric()) {
      if (!std::isfinite(d.low) || !std::isfinite(d.high)) {
        throw std::invalid_argument("dimension '" + d.name + "': non-finite bounds");
      }
      if (!(d.low < d.high)) {
        throw std::invalid_argument("dimension '" + d.name + "': inverted bounds (low " +
                                    std::to_string(d.low) + ", high " +
                                    std::to_string(d.high) + ")");
      }
      if (d.scale == DimensionScale::kLog2 && !(d.low > 0.0)) {
        throw std::invalid_argument("dimension '" + d.name +
                                    "': log2 scale requires low > 0");
      }
    } else {
      std::set<std::string> distinct(d.levels.begin(), d.levels.end());
      if (distinct.size() < 2) {
        throw std::invalid_argument("categorical dimension '" + d.name +
                                    "' needs at least 2 distinct levels");
      }
      if (distinct.size() != d.levels.size()) {
        throw std::invalid_argument("categorical dimension '" + d.name +
                                    "' has duplicate levels");
      }
    }
  }
}

}  // namespace detail

// Validated, immutable configuration universe Theta.
class HyperparameterSpace {
 public:
  explicit HyperparameterSpace(std::vector<Dimension> dims)
      : dimensions_(std::move(dims)) {
    detail::validate_dimensions(dimensions_);
  }

  const std::vector<Dimension>& dimensions() const { return dimensions_; }
  const Dimension& dimension(std::size_t i) const { return dimensions_[i]; }
  std::size_t size() const { return dimensions_.size(); }

  bool operator==(const HyperparameterSpace&) const = default;

 private:
  std::vector<Dimension> dimensions_;
};

// One component of a configuration: a number for numeric dimensions, a level
// label for categorical ones.
using ConfigValue = std::variant<double, std::string>;

// One point theta in the space. `id` is the column index the configuration
// occupies in a risk matrix (or -1 when unattached).
struct Configuration {
  int id = -1;
  std::vector<ConfigValue> values;

  bool operator==(const Configuration& other) const { return values == other.values; }
};

inline int level_index(const Dimension& dim, const std::string& level) {
  for (std::size_t i = 0; i < dim.levels.size(); ++i) {
    if (dim.levels[i] == level) return static_cast<int>(i);
  }
  return -1;
}

inline void validate_configuration(const HyperparameterSpace& space,
                                   const Configuration& config) {
  if (config.values.size() != space.size()) {
    throw std::invalid_argument("configuration has " + std::to_string(config.values.size()) +
                                " values, space has " + std::to_string(space.size()) +
                                " dimensions");
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Dimension& dim = space.dimension(i);
    const ConfigValue& value = config.values[i];
    if (dim.numeric()) {
      const double* v = std::get_if<double>(&value);
      if (v == nullptr) {
        throw std::invalid_argument("dimension '" + dim.name + "': expected a number");
      }
      if (!std::isfinite(*v) || *v < dim.low || *v > dim.high) {
        throw std::invalid_argument("dimension '" + dim.name + "': value " +
                                    std::to_string(*v) + " outside bounds [" +
                                    std::to_string(dim.low) + ", " +
                                    std::to_string(dim.high) + "]");
      }
      if (dim.kind == DimensionKind::kInteger && *v != std::floor(*v)) {
        throw std::invalid_argument("dimension '" + dim.name + "': value " +
                                    std::to_string(*v) + " is not an integer");
      }
    } else {
      const std::string* level = std::get_if<std::string>(&value);
      if (level == nullptr) {
        throw std::invalid_argument("dimension '" + dim.name + "': expected a level label");
      }
      if (level_index(dim, *level) < 0) {
        throw std::invalid_argument("dimension '" + dim.name + "': unknown level '" +
                                    *level + "'");
      }
    }
  }
}

// Normalized per-dimension encoding. Numeric dimensions map to [0, 1]
// (after log2 transform for log2-scaled ones); categorical dimensions map to
// their level index and are compared for equality only.
inline double encode_value(const Dimension& dim, const ConfigValue& value) {
  if (dim.numeric()) {
    const double v = std::get<double>(value);
    if (dim.scale == DimensionScale::kLog2) {
      return (std::log2(v) - std::log2(dim.low)) /
             (std::log2(dim.high) - std::log2(dim.low));
    }
    return (v - dim.low) / (dim.high - dim.low);
  }
  return static_cast<double>(level_index(dim, std::get<std::string>(value)));
}

inline std::vector<double> encode_configuration(const HyperparameterSpace& space,
                                                const Configuration& config) {
  std::vector<double> encoded(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    encoded[i] = encode_value(space.dimension(i), config.values[i]);
  }
  return encoded;
}

inline const char* kind_name(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::kContinuous: return "continuous";
    case DimensionKind::kInteger: return "integer";
    case DimensionKind::kCategorical: return "categorical";
  }
  return "?";
}

inline const char* scale_name(DimensionScale scale) {
  return scale == DimensionScale::kLog2 ? "log2" : "linear";
}

inline nlohmann::ordered_json space_to_json(const HyperparameterSpace& space) {
  nlohmann::ordered_json dims = nlohmann::ordered_json::array();
  for (const Dimension& d : space.dimensions()) {
    nlohmann::ordered_json j;
    j["name"] = d.name;
    j["kind"] = kind_name(d.kind);
    if (d.numeric()) {
      j["low"] = d.low;
      j["high"] = d.high;
      j["scale"] = scale_name(d.scale);
    } else {
      j["levels"] = d.levels;
    }
    dims.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"dimensions", std::move(dims)}};
}

inline HyperparameterSpace space_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dimensions") || !j["dimensions"].is_array()) {
    throw std::invalid_argument("space spec: expected an object with a 'dimensions' array");
  }
  std::vector<Dimension> dims;
  for (const auto& dj : j["dimensions"]) {
    Dimension d;
    if (!dj.contains("name") || !dj["name"].is_string()) {
      throw std::invalid_argument("space spec: dimension without a 'name' string");
    }
    d.name = dj["name"].get<std::string>();
    const std::string kind = dj.value("kind", std::string("continuous"));
    if (kind == "continuous") {
      d.kind = DimensionKind::kContinuous;
    } else if (kind == "integer") {
      d.kind = DimensionKind::kInteger;
    } else if (kind == "categorical") {
      d.kind = DimensionKind::kCategorical;
    } else {
      throw std::invalid_argument("dimension '" + d.name + "': unknown kind '" + kind + "'");
    }
    if (d.numeric()) {
      if (!dj.contains("low") || !dj.contains("high") || !dj["low"].is_number() ||
          !dj["high"].is_number()) {
        throw std::invalid_argument("dimension '" + d.name +
                                    "': numeric kind needs 'low' and 'high' numbers");
      }
      d.low = dj["low"].get<double>();
      d.high = dj["high"].get<double>();
      const std::string scale = dj.value("scale", std::string("linear"));
      if (scale == "linear") {
        d.scale = DimensionScale::kLinear;
      } else if (scale == "log2") {
        d.scale = DimensionScale::kLog2;
      } else {
        throw std::invalid_argument("dimension '" + d.name + "': unknown scale '" + scale + "'");
      }
    } else {
      if (!dj.contains("levels") || !dj["levels"].is_array()) {
        throw std::invalid_argument("categorical dimension '" + d.name +
                                    "' needs a 'levels' array");
      }
      for (const auto& level : dj["levels"]) {
        if (!level.is_string()) {
          throw std::invalid_argument("categorical dimension '" + d.name +
                                      "': levels must be strings");
        }
        d.levels.push_back(level.get<std::string>());
      }
    }
    dims.push_back(std::move(d));
  }
  return HyperparameterSpace(std::move(dims));
}

// Parses the JSON space spec. Throws std::invalid_argument, naming the
// offending dimension where possible.
inline HyperparameterSpace parse_space(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("space spec: malformed JSON: ") + e.what());
  }
  return space_from_json(j);
}

}  // namespace defaultminer
