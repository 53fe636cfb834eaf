#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqm/controllers.hpp"
#include "aqm/fluid.hpp"
#include "aqm/ga.hpp"
#include "aqm/pso.hpp"
#include "aqm/rbf.hpp"

namespace aqm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Section/key-value configuration document. Unknown sections or keys are
// rejected against the published schema; values are kept verbatim so that
// parse -> serialize -> parse is a fixpoint.
class ConfigDocument {
public:
  // schema: section -> ordered keys
  static const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
        {"run", {"seed"}},
        {"network",
         {"capacity", "prop_delay", "buffer", "packet_size", "dt", "horizon",
          "w0", "q0", "delayed_drop_probability"}},
        {"controller",
         {"type", "target_queue", "control_period", "centers", "spreads",
          "weights", "integral_gain", "trapezoid_integral"}},
        {"pi", {"a", "b", "period", "target_queue", "error_scale"}},
        {"rem", {"gamma", "phi", "alpha", "q_ref"}},
        {"ared",
         {"min_th", "max_th", "target_queue", "adapt_interval", "increment",
          "decrease_factor", "max_p_min", "max_p_max"}},
        {"pso",
         {"swarm_size", "max_velocity", "alpha1", "alpha2", "inertia_start",
          "inertia_end", "max_iterations", "per_dimension_random",
          "weight_min", "weight_max", "integral_gain_min", "integral_gain_max",
          "horizon"}},
        {"ga",
         {"population", "elite_count", "crossover_count", "mutation_count",
          "crossover_fraction", "shrink", "generations", "neuron_min",
          "neuron_max", "sigma0", "inner_swarm", "inner_iterations",
          "inner_horizon"}},
        {"output", {"directory", "sample_period"}},
        {"manifest", {"tool_version", "command", "scenario", "controller",
                      "timeseries_path", "summary_path", "sweep_path"}},
    };
    return s;
  }

  static bool schema_has(const std::string& section, const std::string& key) {
    for (const auto& [name, keys] : schema()) {
      if (name != section) continue;
      for (const auto& k : keys)
        if (k == key) return true;
      return false;
    }
    return false;
  }

  void set(const std::string& section, const std::string& key,
           const std::string& value) {
    if (!schema_has(section, key))
      throw ConfigError("unknown config key [" + section + "] " + key);
    values_[section][key] = value;
  }

  // Overlay every value of other onto this document.
  void merge(const ConfigDocument& other) {
    for (const auto& [section, kv] : other.values_)
      for (const auto& [key, value] : kv) values_[section][key] = value;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end()) return false;
    return s->second.count(key) > 0;
  }

  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const {
    auto s = values_.find(section);
    if (s == values_.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double get_double(const std::string& section, const std::string& key,
                    double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get(section, key, "");
    try {
      std::size_t pos = 0;
      double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad numeric value for [" + section + "] " + key + ": " + raw);
    }
  }

  long get_int(const std::string& section, const std::string& key,
               long fallback) const {
    double v = get_double(section, key, static_cast<double>(fallback));
    long n = std::lround(v);
    if (v != static_cast<double>(n))
      throw ConfigError("expected integer for [" + section + "] " + key);
    return n;
  }

  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string raw = get(section, key, "");
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    throw ConfigError("bad boolean for [" + section + "] " + key + ": " + raw);
  }

  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(get(section, key, ""));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("bad list entry for [" + section + "] " + key + ": " + item);
      }
    }
    if (out.empty())
      throw ConfigError("empty list for [" + section + "] " + key);
    return out;
  }

  static ConfigDocument parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[' && s.back() == ']') {
        section = strip(s.substr(1, s.size() - 2));
        bool known = false;
        for (const auto& [name, keys] : schema()) known |= (name == section);
        if (!known)
          throw ConfigError("unknown config section [" + section + "] at line " +
                            std::to_string(lineno));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos || section.empty())
        throw ConfigError("malformed config line " + std::to_string(lineno) + ": " + s);
      doc.set(section, strip(s.substr(0, eq)), strip(s.substr(eq + 1)));
    }
    return doc;
  }

  // Canonical form: schema order, "key = value", blank line between sections.
  std::string serialize() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, keys] : schema()) {
      auto s = values_.find(section);
      if (s == values_.end() || s->second.empty()) continue;
      if (!first) out << "\n";
      first = false;
      out << "[" << section << "]\n";
      for (const auto& key : keys) {
        auto k = s->second.find(key);
        if (k != s->second.end()) out << key << " = " << k->second << "\n";
      }
    }
    return out.str();
  }

private:
  static std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

inline NetworkParams network_params_from(const ConfigDocument& doc) {
  NetworkParams p;
  p.capacity = doc.get_double("network", "capacity", 1250.0);
  p.prop_delay = doc.get_double("network", "prop_delay", 0.06);
  p.buffer = doc.get_double("network", "buffer", 300.0);
  p.packet_size = doc.get_double("network", "packet_size", 1000.0);
  p.dt = doc.get_double("network", "dt", 1e-3);
  p.horizon = doc.get_double("network", "horizon", 100.0);
  return p;
}

inline SimOptions sim_options_from(const ConfigDocument& doc) {
  SimOptions o;
  o.w0 = doc.get_double("network", "w0", 1.0);
  o.q0 = doc.get_double("network", "q0", 0.0);
  o.delayed_drop_probability =
      doc.get_bool("network", "delayed_drop_probability", false);
  return o;
}

inline RbfSpec rbf_spec_from(const ConfigDocument& doc) {
  RbfSpec spec = RbfSpec::evenly_spaced(5);
  spec.centers = doc.get_list("controller", "centers", spec.centers);
  spec.spreads = doc.get_list("controller", "spreads",
                              std::vector<double>(spec.centers.size(), 40.0));
  spec.weights = doc.get_list("controller", "weights",
                              std::vector<double>(spec.centers.size(), 0.0));
  spec.integral_gain = doc.get_double("controller", "integral_gain", 0.0);
  spec.validate();
  return spec;
}

inline void write_rbf_spec(ConfigDocument& doc, const RbfSpec& spec,
                           const std::string& type) {
  doc.set("controller", "type", type);
  doc.set("controller", "centers", format_list(spec.centers));
  doc.set("controller", "spreads", format_list(spec.spreads));
  doc.set("controller", "weights", format_list(spec.weights));
  doc.set("controller", "integral_gain", format_double(spec.integral_gain));
}

inline PsoConfig pso_config_from(const ConfigDocument& doc) {
  PsoConfig c;
  c.swarm_size = static_cast<int>(doc.get_int("pso", "swarm_size", 20));
  c.max_velocity = doc.get_double("pso", "max_velocity", 4.0);
  c.alpha1 = doc.get_double("pso", "alpha1", 2.0);
  c.alpha2 = doc.get_double("pso", "alpha2", 2.0);
  c.inertia_start = doc.get_double("pso", "inertia_start", 0.9);
  c.inertia_end = doc.get_double("pso", "inertia_end", 0.2);
  c.max_iterations = static_cast<int>(doc.get_int("pso", "max_iterations", 300));
  c.per_dimension_random = doc.get_bool("pso", "per_dimension_random", false);
  return c;
}

inline GaConfig ga_config_from(const ConfigDocument& doc) {
  GaConfig c;
  c.population = static_cast<int>(doc.get_int("ga", "population", 40));
  c.elite_count = static_cast<int>(doc.get_int("ga", "elite_count", 2));
  c.crossover_count = static_cast<int>(doc.get_int("ga", "crossover_count", 26));
  c.mutation_count = static_cast<int>(doc.get_int("ga", "mutation_count", 12));
  c.crossover_fraction = doc.get_double("ga", "crossover_fraction", 0.7);
  c.shrink = doc.get_double("ga", "shrink", 1.0);
  c.generations = static_cast<int>(doc.get_int("ga", "generations", 15));
  c.neuron_min = static_cast<int>(doc.get_int("ga", "neuron_min", 2));
  c.neuron_max = static_cast<int>(doc.get_int("ga", "neuron_max", 12));
  c.sigma0 = doc.get_double("ga", "sigma0", 2.0);
  return c;
}

// Controller construction from the document. target_queue comes from the
// scenario unless overridden per discipline.
inline std::unique_ptr<Controller> controller_from(
    const ConfigDocument& doc, const std::string& type,
    const NetworkParams& net, double target_queue) {
  if (type == "droptail") return std::make_unique<DropTailController>(net.buffer);
  if (type == "pi") {
    PiParams p;
    p.a = doc.get_double("pi", "a", p.a);
    p.b = doc.get_double("pi", "b", p.b);
    p.sample_period = doc.get_double("pi", "period", p.sample_period);
    p.target_queue = doc.get_double("pi", "target_queue", target_queue);
    p.error_scale = doc.get_double("pi", "error_scale", PiParams{}.error_scale);
    return std::make_unique<PiController>(p);
  }
  if (type == "rem") {
    RemParams p;
    p.gamma = doc.get_double("rem", "gamma", p.gamma);
    p.phi = doc.get_double("rem", "phi", p.phi);
    p.alpha = doc.get_double("rem", "alpha", p.alpha);
    p.q_ref = doc.get_double("rem", "q_ref", p.q_ref);
    p.capacity = net.capacity;
    return std::make_unique<RemController>(p);
  }
  if (type == "ared") {
    AredParams p;
    p.min_th = doc.get_double("ared", "min_th", p.min_th);
    p.max_th = doc.get_double("ared", "max_th", p.max_th);
    p.capacity = net.capacity;
    p.target_queue = doc.get_double("ared", "target_queue", target_queue);
    p.adapt_interval = doc.get_double("ared", "adapt_interval", p.adapt_interval);
    p.increment = doc.get_double("ared", "increment", p.increment);
    p.decrease_factor = doc.get_double("ared", "decrease_factor", p.decrease_factor);
    p.max_p_min = doc.get_double("ared", "max_p_min", p.max_p_min);
    p.max_p_max = doc.get_double("ared", "max_p_max", p.max_p_max);
    return std::make_unique<AredController>(p);
  }
  if (type == "rbf" || type == "irbf") {
    RbfSpec spec = rbf_spec_from(doc);
    if (type == "rbf") spec.integral_gain = 0.0;
    double qt = doc.get_double("controller", "target_queue", target_queue);
    double period = doc.get_double("controller", "control_period", 1.0 / 160.0);
    bool trapezoid = doc.get_bool("controller", "trapezoid_integral", false);
    return std::make_unique<RbfController>(spec, qt, period, trapezoid);
  }
  throw ConfigError("unknown controller type: " + type);
}

} // namespace aqm
