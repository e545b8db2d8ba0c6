#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "format.hpp"
#include "sim.hpp"

namespace fda {

/// Config text could not be parsed at all (syntax, not values).
class ConfigSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline double parse_real(const std::string& field, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ValidationError(field, "expected a real number, got '" + text + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& field, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ValidationError(field, "expected an integer, got '" + text + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& field, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  if (!text.empty() && text.front() == '-')
    throw ValidationError(field, "expected a non-negative integer, got '" + text + "'");
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ValidationError(field, "expected a non-negative integer, got '" + text + "'");
  return v;
}

// One config key: its section.name, how to read it into a config and how to
// print it back.
struct Key {
  std::string path;
  std::function<void(ScenarioConfig&, const std::string&)> read;
  std::function<std::string(const ScenarioConfig&)> write;
};

template <class Get>
Key real_key(std::string path, Get get) {
  return {path,
          [get, path](ScenarioConfig& c, const std::string& s) { get(c) = parse_real(path, s); },
          [get](const ScenarioConfig& c) {
            ScenarioConfig copy = c;
            return format_double(get(copy));
          }};
}

template <class Get>
Key int_key(std::string path, Get get) {
  return {path,
          [get, path](ScenarioConfig& c, const std::string& s) {
            const auto v = parse_int(path, s);
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
              throw ValidationError(path, "out of range");
            get(c) = static_cast<int>(v);
          },
          [get](const ScenarioConfig& c) {
            ScenarioConfig copy = c;
            return std::to_string(get(copy));
          }};
}

// Keys in canonical order; sections [model], [init], [noise], [run].
inline const std::vector<Key>& keys() {
  static const std::vector<Key> k = [] {
    std::vector<Key> v;
    v.push_back({"model.model",
                 [](ScenarioConfig& c, const std::string& s) { c.params.model = parse_model(s); },
                 [](const ScenarioConfig& c) { return std::string(to_string(c.params.model)); }});
    v.push_back(int_key("model.n", [](ScenarioConfig& c) -> int& { return c.params.n; }));
    v.push_back(int_key("model.m", [](ScenarioConfig& c) -> int& { return c.params.m; }));
    v.push_back(real_key("model.r", [](ScenarioConfig& c) -> double& { return c.params.r; }));
    v.push_back(real_key("model.delta", [](ScenarioConfig& c) -> double& { return c.params.delta; }));
    v.push_back(real_key("model.theta", [](ScenarioConfig& c) -> double& { return c.params.theta; }));
    v.push_back(real_key("model.t_ph", [](ScenarioConfig& c) -> double& { return c.params.t_ph; }));
    v.push_back(real_key("model.v_max", [](ScenarioConfig& c) -> double& { return c.params.v_max; }));
    v.push_back(real_key("model.u_max", [](ScenarioConfig& c) -> double& { return c.params.u_max; }));

    v.push_back(real_key("init.pos_low", [](ScenarioConfig& c) -> double& { return c.init.pos_low; }));
    v.push_back(real_key("init.pos_high", [](ScenarioConfig& c) -> double& { return c.init.pos_high; }));
    v.push_back(real_key("init.vel_std", [](ScenarioConfig& c) -> double& { return c.init.vel_std; }));

    v.push_back({"noise.mode",
                 [](ScenarioConfig& c, const std::string& s) {
                   if (s == "nominal") c.perturbed = false;
                   else if (s == "perturbed") c.perturbed = true;
                   else throw ValidationError("noise.mode", "expected 'nominal' or 'perturbed', got '" + s + "'");
                 },
                 [](const ScenarioConfig& c) { return std::string(c.perturbed ? "perturbed" : "nominal"); }});
    v.push_back(real_key("noise.tau", [](ScenarioConfig& c) -> double& { return c.params.tau; }));
    v.push_back(real_key("noise.omega", [](ScenarioConfig& c) -> double& { return c.noise.omega; }));
    v.push_back(real_key("noise.sigma_p_base", [](ScenarioConfig& c) -> double& { return c.noise.base_p; }));
    v.push_back(real_key("noise.sigma_p_amp", [](ScenarioConfig& c) -> double& { return c.noise.amp_p; }));
    v.push_back(real_key("noise.sigma_p_phase", [](ScenarioConfig& c) -> double& { return c.noise.phase_p; }));
    v.push_back(real_key("noise.sigma_v_base", [](ScenarioConfig& c) -> double& { return c.noise.base_v; }));
    v.push_back(real_key("noise.sigma_v_amp", [](ScenarioConfig& c) -> double& { return c.noise.amp_v; }));
    v.push_back(real_key("noise.sigma_v_phase", [](ScenarioConfig& c) -> double& { return c.noise.phase_v; }));
    v.push_back(real_key("noise.sigma_u_base", [](ScenarioConfig& c) -> double& { return c.noise.base_u; }));
    v.push_back(real_key("noise.sigma_u_amp", [](ScenarioConfig& c) -> double& { return c.noise.amp_u; }));
    v.push_back(real_key("noise.sigma_u_phase", [](ScenarioConfig& c) -> double& { return c.noise.phase_u; }));

    v.push_back(real_key("run.dt", [](ScenarioConfig& c) -> double& { return c.params.dt; }));
    v.push_back(real_key("run.T", [](ScenarioConfig& c) -> double& { return c.params.T; }));
    v.push_back({"run.seed",
                 [](ScenarioConfig& c, const std::string& s) { c.seed = parse_uint("run.seed", s); },
                 [](const ScenarioConfig& c) { return std::to_string(c.seed); }});
    v.push_back(int_key("run.record_every", [](ScenarioConfig& c) -> int& { return c.record_every; }));
    v.push_back({"run.gamma_isolated",
                 [](ScenarioConfig& c, const std::string& s) {
                   if (s == "exclude") c.gamma_isolated = IsolatedPolicy::kExclude;
                   else if (s == "zero") c.gamma_isolated = IsolatedPolicy::kZero;
                   else throw ValidationError("run.gamma_isolated", "expected 'exclude' or 'zero', got '" + s + "'");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.gamma_isolated == IsolatedPolicy::kZero ? "zero" : "exclude");
                 }});
    return v;
  }();
  return k;
}

}  // namespace detail

/// Applies one "section.key = value" assignment. Unknown keys are rejected.
inline void set_config_value(ScenarioConfig& c, const std::string& path,
                             const std::string& value) {
  for (const auto& k : detail::keys())
    if (k.path == path) return k.read(c, value);
  throw ValidationError(path, "unknown config key");
}

inline std::string get_config_value(const ScenarioConfig& c, const std::string& path) {
  for (const auto& k : detail::keys())
    if (k.path == path) return k.write(c);
  throw ValidationError(path, "unknown config key");
}

/// Parses INI-style text. Keys not present keep the built-in defaults, which
/// are the reference scenario. The result is validated.
inline ScenarioConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigSyntaxError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  ScenarioConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ValidationError(section, "key outside of a section");
    for (const auto& [key, value] : body)
      set_config_value(c, section + "." + key, value.data());
  }
  validate(c);
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::ios_base::failure("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text: every key, fixed order, shortest round-trip numbers.
inline std::string serialize_config(const ScenarioConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : detail::keys()) {
    const auto dot = k.path.find('.');
    const std::string sec = k.path.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << k.path.substr(dot + 1) << " = " << k.write(c) << '\n';
  }
  return os.str();
}

inline std::string config_hash(const ScenarioConfig& c) {
  return hex64(fnv1a64(serialize_config(c)));
}

}  // namespace fda
