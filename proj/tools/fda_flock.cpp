// Command-line driver: run, compare, sweep and analyze.
//
// Exit codes: 0 success, 1 validation, 2 runtime degeneracy, 3 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fda/config.hpp>
#include <fda/experiment.hpp>
#include <fda/fda.hpp>
#include <fda/io.hpp>

#ifndef FDA_VERSION
#define FDA_VERSION "dev"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kDegenerate = 2, kIo = 3 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string mode;
  std::optional<int> record_every;
  std::vector<std::string> overrides;
  std::string out = "out";
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool dump_trajectories = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_mode = true) {
  cmd->add_option("--config", o.config_path, "Scenario config (INI); defaults to the reference scenario");
  cmd->add_option("--seed", o.seed, "Master seed (overrides run.seed)");
  cmd->add_option("--model", o.model, "reactive | fda (overrides model.model)")
      ->check(CLI::IsMember({"reactive", "fda"}));
  if (with_mode)
    cmd->add_option("--mode", o.mode, "nominal | perturbed (overrides noise.mode)")
        ->check(CLI::IsMember({"nominal", "perturbed"}));
  cmd->add_option("--record-every", o.record_every, "Record metrics every N steps");
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set model.theta=0");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--workers", o.workers, "Worker threads for batches")->check(CLI::PositiveNumber);
  cmd->add_flag("--dump-trajectories", o.dump_trajectories, "Also write trajectories.csv");
}

fda::ScenarioConfig resolve_config(const CommonOptions& o) {
  fda::ScenarioConfig c = o.config_path.empty() ? fda::ScenarioConfig{} : fda::load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw fda::ValidationError(kv, "override must look like section.key=value");
    fda::set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.model.empty()) c.params.model = fda::parse_model(o.model);
  if (!o.mode.empty()) c.perturbed = o.mode == "perturbed";
  if (o.record_every) c.record_every = *o.record_every;
  fda::validate(c);
  return c;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Tracks emitted files and writes manifest.json last.
class OutputDir {
 public:
  OutputDir(fs::path root, std::string command) : root_(std::move(root)), command_(std::move(command)) {
    started_ = utc_now();
  }

  void write(const std::string& name, const std::string& content) {
    fda::write_file(root_ / name, content);
    files_.push_back(name);
  }

  void finish(const fda::ScenarioConfig& c, const std::vector<std::uint64_t>& seeds) {
    json m;
    m["tool"] = "fda_flock";
    m["version"] = FDA_VERSION;
    m["command"] = command_;
    m["config_hash"] = fda::config_hash(c);
    m["seeds"] = seeds;
    m["started_utc"] = started_;
    m["finished_utc"] = utc_now();
    m["files"] = files_;
    fda::write_file(root_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path root_;
  std::string command_;
  std::string started_;
  std::vector<std::string> files_;
};

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

using fda::format_double;

// ---- run -------------------------------------------------------------------

int cmd_run(const CommonOptions& o) {
  const auto c = resolve_config(o);
  const auto rec = fda::run(c, o.dump_trajectories);
  OutputDir out(o.out, "run");
  out.write("config.ini", fda::serialize_config(c));
  out.write("metrics.csv", fda::metrics_csv(rec));
  out.write("summary.json", fda::summary_json(rec).dump(2) + "\n");
  if (o.dump_trajectories) out.write("trajectories.csv", fda::trajectories_csv(rec));
  out.finish(c, {c.seed});
  if (!rec.ok()) {
    std::cerr << "error: " << rec.failure->message << "\n";
    return kDegenerate;
  }
  std::cout << to_string(c.params.model) << (c.perturbed ? "/perturbed" : "/nominal")
            << ": final gamma " << format_double(rec.summary.final_gamma) << ", S "
            << format_double(rec.summary.S) << " m, min distance "
            << format_double(rec.summary.min_distance) << " m\n";
  return kOk;
}

// ---- compare ---------------------------------------------------------------

std::string compare_runs_csv(const std::vector<fda::ArmResult>& arms) {
  std::string s =
      "model,mode,seed_index,seed,status,final_gamma,time_to_gamma90,S,min_distance,"
      "final_components,max_isolated,steps_completed,message\n";
  for (const auto& a : arms) {
    for (std::size_t k = 0; k < a.runs.size(); ++k) {
      const auto& r = a.runs[k];
      const auto& m = r.summary;
      s += std::string(to_string(a.arm.model)) + ',' + (a.arm.perturbed ? "perturbed" : "nominal") +
           ',' + std::to_string(k) + ',' + std::to_string(r.config.seed) + ',' +
           (r.ok() ? "ok" : "degenerate") + ',' + format_double(m.final_gamma) + ',' +
           format_double(m.time_to_gamma90) + ',' + format_double(m.S) + ',' +
           format_double(m.min_distance) + ',' + std::to_string(m.final_components) + ',' +
           std::to_string(m.max_isolated) + ',' + std::to_string(m.steps_completed) + ',' +
           csv_escape(r.failure ? r.failure->message : "") + '\n';
    }
  }
  return s;
}

struct ArmStats {
  fda::Spread final_gamma, time_to_gamma90, S, min_distance;
};

ArmStats arm_stats(const fda::ArmResult& a) {
  return {fda::spread(a.collect(&fda::RunSummary::final_gamma)),
          fda::spread(a.collect(&fda::RunSummary::time_to_gamma90)),
          fda::spread(a.collect(&fda::RunSummary::S)),
          fda::spread(a.collect(&fda::RunSummary::min_distance))};
}

std::string compare_summary_csv(const std::vector<fda::ArmResult>& arms) {
  std::string s = "model,mode,runs,failures";
  for (const char* q : {"final_gamma", "time_to_gamma90", "S", "min_distance"})
    for (const char* stat : {"median", "q25", "q75"}) s += std::string(",") + q + "_" + stat;
  s += '\n';
  for (const auto& a : arms) {
    const auto st = arm_stats(a);
    s += std::string(to_string(a.arm.model)) + ',' + (a.arm.perturbed ? "perturbed" : "nominal") +
         ',' + std::to_string(a.runs.size()) + ',' + std::to_string(a.failures());
    for (const auto* sp : {&st.final_gamma, &st.time_to_gamma90, &st.S, &st.min_distance})
      s += ',' + format_double(sp->median) + ',' + format_double(sp->q25) + ',' + format_double(sp->q75);
    s += '\n';
  }
  return s;
}

// Per-arm, per-sample medians across the successful replicates.
std::string compare_timeseries_csv(const std::vector<fda::ArmResult>& arms) {
  std::string s = "model,mode,t,gamma_median,gamma_q25,gamma_q75,d_min_median,d_mean_median,"
                  "d_max_median,S_cum_median\n";
  for (const auto& a : arms) {
    std::size_t len = 0;
    for (const auto& r : a.runs)
      if (r.ok()) len = std::max(len, r.samples.size());
    for (std::size_t k = 0; k < len; ++k) {
      std::vector<double> g, dmin, dmean, dmax, scum;
      double t = 0;
      for (const auto& r : a.runs) {
        if (!r.ok() || k >= r.samples.size()) continue;
        const auto& m = r.samples[k];
        t = m.t;
        g.push_back(m.gamma);
        dmin.push_back(m.d_min);
        dmean.push_back(m.d_mean);
        dmax.push_back(m.d_max);
        scum.push_back(m.S_cum);
      }
      const auto gs = fda::spread(g);
      s += std::string(to_string(a.arm.model)) + ',' + (a.arm.perturbed ? "perturbed" : "nominal") +
           ',' + format_double(t) + ',' + format_double(gs.median) + ',' + format_double(gs.q25) +
           ',' + format_double(gs.q75) + ',' + format_double(fda::median(dmin)) + ',' +
           format_double(fda::median(dmean)) + ',' + format_double(fda::median(dmax)) + ',' +
           format_double(fda::median(scum)) + '\n';
    }
  }
  return s;
}

int cmd_compare(const CommonOptions& o, int replicates) {
  auto c = resolve_config(o);
  const auto arms = fda::compare(c, replicates, o.workers);

  json summary;
  summary["replicates"] = replicates;
  summary["master_seed"] = c.seed;
  summary["protocol"] = "medians and interquartile ranges over replicate seeds";
  std::vector<std::uint64_t> seeds;
  for (const auto& r : arms.front().runs) seeds.push_back(r.config.seed);
  int failures = 0;
  for (const auto& a : arms) {
    const auto st = arm_stats(a);
    failures += a.failures();
    auto spread_json = [](const fda::Spread& sp) {
      return json{{"median", fda::json_number(sp.median)},
                  {"q25", fda::json_number(sp.q25)},
                  {"q75", fda::json_number(sp.q75)}};
    };
    summary["arms"][a.arm.name()] = {{"runs", a.runs.size()},
                                     {"failures", a.failures()},
                                     {"final_gamma", spread_json(st.final_gamma)},
                                     {"time_to_gamma90", spread_json(st.time_to_gamma90)},
                                     {"S", spread_json(st.S)},
                                     {"min_distance", spread_json(st.min_distance)}};
  }
  const double s_ratio = arm_stats(arms[1]).S.median / arm_stats(arms[0]).S.median;
  summary["nominal_S_ratio_fda_over_reactive"] = fda::json_number(s_ratio);

  OutputDir out(o.out, "compare");
  out.write("config.ini", fda::serialize_config(c));
  out.write("compare_runs.csv", compare_runs_csv(arms));
  out.write("compare_summary.csv", compare_summary_csv(arms));
  out.write("compare_timeseries.csv", compare_timeseries_csv(arms));
  out.write("summary.json", summary.dump(2) + "\n");
  out.finish(c, seeds);

  std::cout << compare_summary_csv(arms);
  if (failures > 0) {
    std::cerr << failures << " run(s) stopped on degeneracy; see compare_runs.csv\n";
    return kDegenerate;
  }
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

int cmd_sweep(const CommonOptions& o, const std::string& parameter,
              const std::vector<double>& values, int replicates) {
  CommonOptions base = o;
  base.mode.clear();
  const auto c = resolve_config(base);
  std::vector<bool> modes;
  if (o.mode.empty() || o.mode == "both") modes = {false, true};
  else modes = {o.mode == "perturbed"};
  const auto cells = fda::sweep(c, parameter, values, modes, replicates, o.workers);

  std::string csv =
      "parameter,value,mode,model,seed_index,seed,status,final_gamma,time_to_gamma90,S,"
      "min_distance,final_components,linear,slowest_decay,message\n";
  for (const auto& cell : cells) {
    const auto& r = cell.record;
    const auto& m = r.summary;
    csv += cell.parameter + ',' + format_double(cell.value) + ',' +
           (cell.perturbed ? "perturbed" : "nominal") + ',' +
           std::string(to_string(r.config.params.model)) + ',' + std::to_string(cell.seed_index) +
           ',' + std::to_string(r.config.seed) + ',' + (r.ok() ? "ok" : "degenerate") + ',' +
           format_double(m.final_gamma) + ',' + format_double(m.time_to_gamma90) + ',' +
           format_double(m.S) + ',' + format_double(m.min_distance) + ',' +
           std::to_string(m.final_components) + ',' + cell.linear + ',' +
           format_double(cell.slowest_decay) + ',' +
           csv_escape(r.failure ? r.failure->message : "") + '\n';
  }
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < replicates; ++k)
    seeds.push_back(fda::replicate_seed(c.seed, static_cast<std::uint64_t>(k)));
  OutputDir out(o.out, "sweep");
  out.write("config.ini", fda::serialize_config(c));
  out.write("sweep.csv", csv);
  out.finish(c, seeds);
  std::cout << cells.size() << " cells written to " << (fs::path(o.out) / "sweep.csv").string() << "\n";
  return kOk;
}

// ---- analyze ---------------------------------------------------------------

// complete:N | path:N | ring:N | empty:N | edges:N:0-1,1-2,...
fda::GraphMatrices parse_graph_spec(const std::string& spec) {
  const auto c1 = spec.find(':');
  if (c1 == std::string::npos) throw fda::ValidationError("graph", "expected kind:N[:edges]");
  const std::string kind = spec.substr(0, c1);
  const auto c2 = spec.find(':', c1 + 1);
  int n = 0;
  try {
    n = std::stoi(spec.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
  } catch (const std::exception&) {
    throw fda::ValidationError("graph", "node count is not an integer");
  }
  if (n < 2) throw fda::ValidationError("graph", "needs at least 2 nodes");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  auto link = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw fda::ValidationError("graph", "bad edge " + std::to_string(i) + "-" + std::to_string(j));
    a(i, j) = a(j, i) = 1.0;
  };
  if (kind == "complete") {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) link(i, j);
  } else if (kind == "path") {
    for (int i = 0; i + 1 < n; ++i) link(i, i + 1);
  } else if (kind == "ring") {
    for (int i = 0; i < n; ++i) link(i, (i + 1) % n);
  } else if (kind == "empty") {
  } else if (kind == "edges") {
    if (c2 == std::string::npos) throw fda::ValidationError("graph", "edges:N:i-j,... expected");
    std::stringstream ss(spec.substr(c2 + 1));
    std::string edge;
    while (std::getline(ss, edge, ',')) {
      const auto dash = edge.find('-');
      if (dash == std::string::npos) throw fda::ValidationError("graph", "bad edge '" + edge + "'");
      try {
        link(std::stoi(edge.substr(0, dash)), std::stoi(edge.substr(dash + 1)));
      } catch (const std::invalid_argument&) {
        throw fda::ValidationError("graph", "bad edge '" + edge + "'");
      }
    }
  } else {
    throw fda::ValidationError("graph", "unknown kind '" + kind + "'");
  }
  return fda::graph_from_adjacency(std::move(a));
}

struct AnalyzeOptions {
  std::string graph;
  double at_time = 0.0;
  std::vector<double> thetas{0.0, 0.8};
  std::vector<double> horizons{1.0};
  std::optional<double> phi;
  bool per_agent_phi = false;
  std::string form = "plus";
};

int cmd_analyze(const CommonOptions& o, const AnalyzeOptions& a) {
  const auto c = resolve_config(o);
  fda::GraphMatrices g;
  std::string source;
  if (!a.graph.empty()) {
    g = parse_graph_spec(a.graph);
    source = a.graph;
  } else {
    // Frozen configuration of a simulated run at the requested time.
    fda::ScenarioConfig sc = c;
    const auto steps = fda::detail::steps_in(a.at_time, sc.params.dt);
    if (a.at_time < 0 || steps < 0)
      throw fda::ValidationError("at-time", "must be a nonnegative multiple of dt");
    sc.params.T = a.at_time;
    const auto rec = fda::run(sc, false);
    if (!rec.ok()) throw fda::DegeneracyError(rec.failure->step, rec.failure->agent,
                                              rec.failure->neighbor, rec.failure->distance);
    g = fda::build_graph(fda::positions_of(*rec.final_state), c.params.r);
    source = "config seed " + std::to_string(c.seed) + " t=" + format_double(a.at_time);
  }
  double phi = 0.0;
  if (a.phi) {
    phi = *a.phi;
  } else {
    const double mean_degree = g.laplacian.diagonal().mean();
    phi = mean_degree > 0 ? 1.0 / mean_degree : 1.0;
  }
  const int components = fda::component_count(g);

  std::string report =
      "theta,t_ph,phi,status,n,components,zero_modes,slowest_decay,margin,condition,stable,"
      "trivially_marginal\n";
  std::string spectrum = "theta,t_ph,index,re,im\n";
  for (double theta : a.thetas) {
    for (double tph : a.horizons) {
      fda::OperatorOptions opt;
      opt.theta = theta;
      opt.t_ph = tph;
      opt.phi = phi;
      opt.per_agent_phi = a.per_agent_phi;
      opt.form = a.form == "minus" ? fda::PreconditionerForm::kMinus
                                       : fda::PreconditionerForm::kPlus;
      const std::string key = format_double(theta) + ',' + format_double(tph) + ',' +
                              (a.per_agent_phi ? std::string("per-agent") : format_double(phi));
      try {
        const auto rep = fda::analyze(g, opt);
        report += key + ",ok," + std::to_string(g.size()) + ',' + std::to_string(components) +
                  ',' + std::to_string(rep.zero_modes) + ',' + format_double(rep.slowest_decay) +
                  ',' + format_double(rep.margin) + ',' + format_double(rep.condition) + ',' +
                  (rep.stable ? "true" : "false") + ',' +
                  (rep.trivially_marginal ? "true" : "false") + '\n';
        for (std::size_t k = 0; k < rep.eigenvalues.size(); ++k)
          spectrum += format_double(theta) + ',' + format_double(tph) + ',' + std::to_string(k) +
                      ',' + format_double(rep.eigenvalues[k].real()) + ',' +
                      format_double(rep.eigenvalues[k].imag()) + '\n';
      } catch (const fda::SingularPreconditionerError& e) {
        report += key + ",singular," + std::to_string(g.size()) + ',' +
                  std::to_string(components) + ",,,0," + format_double(e.condition()) +
                  ",false,false\n";
      }
    }
  }
  OutputDir out(o.out, "analyze");
  out.write("spectral_report.csv", report);
  out.write("spectrum.csv", spectrum);
  json notes{{"graph", source},
             {"preconditioner", a.form == "minus" ? "(I - theta*phi*t_ph*A)^-1"
                                                      : "(I + theta*phi*t_ph*A)^-1"},
             {"note", "substituting u_j ~ dv_j/dt into the blended alignment law gives "
                      "(I - theta*phi*t_ph*A)^-1; the default reports the (I + ...) form, "
                      "select --form minus for the other"}};
  out.write("analysis_notes.json", notes.dump(2) + "\n");
  out.finish(c, {c.seed});
  std::cout << report;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reactive and FDA flocking simulator and consensus-spectrum analyzer"};
  app.set_version_flag("--version", FDA_VERSION);
  app.require_subcommand(1);

  CommonOptions run_o, cmp_o, sweep_o, an_o;
  auto* run = app.add_subcommand("run", "Simulate one scenario and write metrics.csv");
  add_common(run, run_o);

  auto* cmp = app.add_subcommand("compare", "Reactive vs FDA, nominal vs perturbed, over K seeds");
  add_common(cmp, cmp_o, /*with_mode=*/false);
  int replicates = 20;
  cmp->add_option("--seeds", replicates, "Number of replicate seeds K")->check(CLI::PositiveNumber);

  const CLI::Validator non_empty(
      [](std::string& v) { return v.empty() ? std::string("empty list entry") : std::string(); }, "");

  auto* sw = app.add_subcommand("sweep", "Sweep one parameter over values x seeds");
  add_common(sw, sweep_o, /*with_mode=*/false);
  std::string parameter;
  std::vector<double> values;
  int sweep_replicates = 5;
  sw->add_option("--param", parameter, "theta | t_ph | tau | r | delta | n")->required();
  sw->add_option("--values", values, "Comma-separated values")
      ->delimiter(',')
      ->check(non_empty)
      ->required();
  sw->add_option("--seeds", sweep_replicates, "Replicate seeds per value")->check(CLI::PositiveNumber);
  sw->add_option("--mode", sweep_o.mode, "nominal | perturbed | both")
      ->check(CLI::IsMember({"nominal", "perturbed", "both"}));

  auto* an = app.add_subcommand("analyze", "Spectrum of the linearized consensus operator");
  add_common(an, an_o);
  AnalyzeOptions ao;
  an->add_option("--graph", ao.graph, "complete:N | path:N | ring:N | empty:N | edges:N:i-j,...");
  an->add_option("--at-time", ao.at_time, "Freeze the simulated configuration at this time");
  an->add_option("--theta", ao.thetas, "Blend values")->delimiter(',')->check(non_empty);
  an->add_option("--tph", ao.horizons, "Prediction horizons")->delimiter(',')->check(non_empty);
  an->add_option("--phi", ao.phi, "Scalar alignment weight (default 1/mean degree)");
  an->add_flag("--per-agent-phi", ao.per_agent_phi, "Use phi_i = 1/deg_i");
  an->add_option("--form", ao.form, "plus | minus")
      ->check(CLI::IsMember({"plus", "minus"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(run_o);
    if (*cmp) return cmd_compare(cmp_o, replicates);
    if (*sw) return cmd_sweep(sweep_o, parameter, values, sweep_replicates);
    if (*an) return cmd_analyze(an_o, ao);
  } catch (const fda::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kValidation;
  } catch (const fda::ConfigSyntaxError& e) {
    std::cerr << "config syntax error: " << e.what() << "\n";
    return kValidation;
  } catch (const fda::DegeneracyError& e) {
    std::cerr << "degenerate configuration: " << e.what() << "\n";
    return kDegenerate;
  } catch (const fda::InitializationError& e) {
    std::cerr << "initialization failed: " << e.what() << "\n";
    return kDegenerate;
  } catch (const fda::OutputError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kValidation;
}
