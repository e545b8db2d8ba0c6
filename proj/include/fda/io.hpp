#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "format.hpp"
#include "sim.hpp"

namespace fda {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OutputError("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw OutputError("write failed for '" + path.string() + "'");
}

/// Column order: t, gamma, d_min, d_mean, d_max, centroid_0..centroid_{m-1},
/// S_cum, components.
inline std::string metrics_csv_header(int m) {
  std::string h = "t,gamma,d_min,d_mean,d_max";
  for (int k = 0; k < m; ++k) h += ",centroid_" + std::to_string(k);
  h += ",S_cum,components\n";
  return h;
}

inline std::string metrics_csv(const RunRecord& rec) {
  std::string out = metrics_csv_header(rec.config.params.m);
  for (const auto& s : rec.samples) {
    out += format_double(s.t);
    for (double x : {s.gamma, s.d_min, s.d_mean, s.d_max}) out += ',' + format_double(x);
    for (Eigen::Index k = 0; k < s.centroid.size(); ++k)
      out += ',' + format_double(s.centroid[k]);
    out += ',' + format_double(s.S_cum);
    out += ',' + std::to_string(s.components);
    out += '\n';
  }
  return out;
}

/// One row per (recorded sample, agent): t, agent, p_*, v_*, u_*.
inline std::string trajectories_csv(const RunRecord& rec) {
  const int m = rec.config.params.m;
  std::string out = "t,agent";
  for (const char* f : {"p", "v", "u"})
    for (int k = 0; k < m; ++k) out += ',' + std::string(f) + '_' + std::to_string(k);
  out += '\n';
  for (const auto& s : rec.states) {
    for (int i = 0; i < s.size(); ++i) {
      const auto& a = s.agents[i];
      out += format_double(s.time) + ',' + std::to_string(i);
      for (const VecM* v : {&a.position, &a.velocity, &a.control})
        for (int k = 0; k < m; ++k) out += ',' + format_double((*v)[k]);
      out += '\n';
    }
  }
  return out;
}

/// JSON-safe number: non-finite values become null.
inline nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

inline nlohmann::json summary_json(const RunRecord& rec, bool include_wall_time = true) {
  const auto& s = rec.summary;
  nlohmann::json j;
  j["status"] = rec.ok() ? "ok" : "degenerate";
  j["model"] = std::string(to_string(rec.config.params.model));
  j["mode"] = rec.config.perturbed ? "perturbed" : "nominal";
  j["seed"] = rec.config.seed;
  j["config_hash"] = config_hash(rec.config);
  j["steps_completed"] = s.steps_completed;
  j["final_gamma"] = json_number(s.final_gamma);
  j["S"] = json_number(s.S);
  j["min_distance"] = json_number(s.min_distance);
  j["time_to_gamma90"] = json_number(s.time_to_gamma90);
  j["final_components"] = s.final_components;
  j["max_components"] = s.max_components;
  j["max_isolated_agents"] = s.max_isolated;
  j["fragmented"] = s.max_components > 1 || s.max_isolated > 0;
  if (include_wall_time) j["wall_time_s"] = s.wall_time_s;
  if (rec.failure) {
    j["failure"] = {{"step", rec.failure->step},
                    {"agent", rec.failure->agent},
                    {"neighbor", rec.failure->neighbor},
                    {"distance", rec.failure->distance},
                    {"message", rec.failure->message}};
  }
  return j;
}

}  // namespace fda
