#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcm/analysis.hpp"
#include "bcm/config.hpp"
#include "bcm/driver.hpp"
#include "bcm/errors.hpp"
#include "bcm/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kNoConvergence = 3 };

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  sub->add_option("--set", c.overrides, "dotted override key=value (repeatable)")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_option("--out", c.out, "output directory");
  sub->add_flag("--quiet", c.quiet, "no progress output");
}

bcm::RunConfig make_config(const Common& c, bcm::Scenario scenario) {
  std::vector<std::string> ov = c.overrides;
  json doc = bcm::resolve_config(c.config, ov);
  doc["scenario"] = bcm::to_string(scenario);
  if (!c.out.empty()) doc["output_dir"] = c.out;
  return bcm::config_from_json(doc);
}

bcm::RunContext make_context(const Common& c) {
  bcm::RunContext ctx;
  ctx.overrides = c.overrides;
  if (!c.quiet) ctx.log = [](const std::string& m) { std::cerr << "[bcm] " << m << "\n"; };
  return ctx;
}

void print_summary(const json& manifest, bool quiet) {
  if (quiet) return;
  std::cout << "termination: " << manifest.value("termination", "n/a") << "\n";
  if (manifest.contains("diagnostics")) std::cout << manifest["diagnostics"].dump(2) << "\n";
}

int cmd_relax(const Common& c) {
  const bcm::RunConfig cfg = make_config(c, bcm::Scenario::Migration);
  const bcm::RunContext ctx = make_context(c);
  if (ctx.log) ctx.log("relaxing chamber geometry");
  bcm::RelaxReport rr;
  bcm::SnapshotState s;
  s.phases = bcm::prepared_chamber(cfg, &rr);
  s.stage = "relaxed";
  s.time = rr.time;
  const fs::path out = cfg.output_dir;
  bcm::write_snapshot(out / "relaxed", s, cfg.chemo, cfg.tim, cfg.dt_outer);
  json manifest = {{"scenario", "relax"},
                   {"config", bcm::to_json(cfg)},
                   {"overrides", c.overrides},
                   {"stages", {{{"name", "relax"}, {"t_start", 0.0}, {"t_end", rr.time}, {"steps", rr.steps},
                                {"final_rate", rr.final_rate}, {"converged", rr.converged}}}},
                   {"snapshots", {{{"step", 0}, {"time", rr.time}, {"dir", "relaxed"}}}},
                   {"termination", rr.converged ? "converged" : "t_max"}};
  bcm::write_text(out / "manifest.json", manifest.dump(2) + "\n");
  print_summary(manifest, c.quiet);
  return kOk;
}

int cmd_dump_scene(const Common& c) {
  const bcm::RunConfig cfg = make_config(c, bcm::Scenario::Migration);
  bcm::SnapshotState s;
  s.phases = bcm::build_chamber(cfg.scene, cfg.grid);
  s.stage = "seeded";
  const fs::path out = cfg.output_dir;
  bcm::write_snapshot(out / "scene", s, cfg.chemo, cfg.tim, cfg.dt_outer);
  std::cout << bcm::to_json(cfg).dump(2) << "\n";
  return kOk;
}

int cmd_run(const Common& c, bcm::Scenario scenario) {
  const bcm::RunConfig cfg = make_config(c, scenario);
  print_summary(bcm::run(cfg, make_context(c)), c.quiet);
  return kOk;
}

// Metrics table for a finished output directory.
json analyze_dir(const fs::path& dir) {
  const json manifest = json::parse(bcm::read_text(dir / "manifest.json"));
  const bcm::RunConfig cfg = bcm::config_from_json(manifest.at("config"));
  json m = {{"dir", dir.string()}, {"scenario", manifest.at("scenario")}};
  if (fs::exists(dir / "trajectory.csv")) {
    const bcm::Trajectory tr = bcm::read_trajectory_csv(dir / "trajectory.csv");
    if (!tr.empty()) {
      double peak = 0.0, worst_mass = 0.0;
      for (const auto& r : tr) {
        peak = std::max(peak, r.speed);
        worst_mass = std::max(worst_mass, r.mass_balance_residual);
      }
      m["samples"] = tr.size();
      m["peak_speed"] = peak;
      m["displacement_x"] = tr.back().centroid_x - tr.front().centroid_x;
      m["displacement"] = std::hypot(tr.back().centroid_x - tr.front().centroid_x,
                                     tr.back().centroid_y - tr.front().centroid_y);
      m["final_time"] = tr.back().time;
      m["max_mass_balance_residual"] = worst_mass;
    }
  }
  if (fs::exists(dir / "steady" / "snapshot.json")) {
    const bcm::SnapshotState s = bcm::read_snapshot(dir / "steady", cfg.chemo);
    m["mass_balance_residual"] = bcm::mass_balance_residual(*s.chemo, cfg.chemo);
    m["confinement"] = bcm::confinement_metric(s.chemo->c, s.phases);
    m["corridor_max_ripple"] = bcm::corridor_profile(s.chemo->c, s.phases, cfg.scene.center_y).max_ripple;
  }
  if (manifest.contains("termination")) m["termination"] = manifest["termination"];
  return m;
}

int cmd_analyze(const std::string& dir, bool quiet) {
  const fs::path root = dir;
  const json manifest = json::parse(bcm::read_text(root / "manifest.json"));
  std::vector<fs::path> dirs;
  if (manifest.contains("members")) {
    for (const auto& mem : manifest["members"])
      if (mem.value("status", "") == "ok") dirs.push_back(root / mem["dir"].get<std::string>());
  } else {
    dirs.push_back(root);
  }
  json rows = json::array();
  for (const auto& d : dirs) rows.push_back(analyze_dir(d));

  // One CSV with the union of keys, blanks where a metric does not apply.
  std::vector<std::string> keys;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::string csv;
  for (std::size_t i = 0; i < keys.size(); ++i) csv += (i ? "," : "") + keys[i];
  csv += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) csv += ",";
      if (!r.contains(keys[i])) continue;
      const json& v = r[keys[i]];
      csv += v.is_number_float() ? bcm::format_double(v.get<double>()) : (v.is_string() ? v.get<std::string>() : v.dump());
    }
    csv += "\n";
  }
  bcm::write_text(root / "metrics.csv", csv);
  if (!quiet) std::cout << rows.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Border-cell migration simulator"};
  app.require_subcommand(1);

  Common common;
  std::string analyze_dir_arg;
  bool analyze_quiet = false;

  auto* relax = app.add_subcommand("relax", "relax the seeded chamber geometry");
  auto* chemo1d = app.add_subcommand("chemo-1d", "1D chemoattractant with a moving window");
  auto* steady = app.add_subcommand("chemo-steady", "chamber chemoattractant transient and steady state");
  auto* migrate = app.add_subcommand("migrate", "coupled cluster migration");
  auto* sweep = app.add_subcommand("sweep", "migration runs over the cluster volumes");
  auto* dump = app.add_subcommand("dump-scene", "write the seeded scene and print the resolved config");
  auto* analyze = app.add_subcommand("analyze", "metrics for a finished output directory");
  for (auto* sub : {relax, chemo1d, steady, migrate, sweep, dump}) add_common(sub, common, true);
  analyze->add_option("dir", analyze_dir_arg, "output directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--config", common.config, "ignored; the manifest holds the config");
  analyze->add_flag("--quiet", analyze_quiet, "no output on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kConfig;
  }

  try {
    if (*relax) return cmd_relax(common);
    if (*dump) return cmd_dump_scene(common);
    if (*chemo1d) return cmd_run(common, bcm::Scenario::OneD);
    if (*steady) return cmd_run(common, bcm::Scenario::ChemoOnly);
    if (*migrate) return cmd_run(common, bcm::Scenario::Migration);
    if (*sweep) return cmd_run(common, bcm::Scenario::VolumeSweep);
    if (*analyze) return cmd_analyze(analyze_dir_arg, analyze_quiet);
  } catch (const bcm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const bcm::ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << " (residual " << e.final_residual << ")\n";
    return kNoConvergence;
  } catch (const bcm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (!e.last_good_snapshot.empty()) std::cerr << " (last good snapshot: " << e.last_good_snapshot << ")";
    std::cerr << "\n";
    return kRuntime;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
