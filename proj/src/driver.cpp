#include "bcm/driver.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "bcm/errors.hpp"
#include "bcm/io.hpp"
#include "bcm/motility.hpp"
#include "bcm/scenario.hpp"

namespace bcm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Occupancy far above 1 or phases far outside [0, 1] mean the explicit
// scheme has blown up, not a diffuse-interface overshoot.
constexpr double kXiBlowUp = 3.0;
constexpr double kPhiBlowUp = 0.5;

void say(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

std::string shortest(double v) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string snap_name(long step) { return "snap_" + std::to_string(step); }

json base_manifest(const RunConfig& cfg, const RunContext& ctx) {
  return {{"scenario", to_string(cfg.scenario)},
          {"config", to_json(cfg)},
          {"overrides", ctx.overrides},
          {"stages", json::array()},
          {"snapshots", json::array()}};
}

void finish_manifest(const fs::path& out, const json& manifest) {
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

bool fields_finite(const PhaseSet& ps) {
  for (const auto& p : ps.phases)
    if (!p.phi.all_finite()) return false;
  return true;
}

double max_volume_error(const PhaseSet& ps) {
  double worst = 0.0;
  for (const auto& p : ps.phases)
    if (p.target_volume > 0.0)
      worst = std::max(worst, std::abs(volume(p.phi) - p.target_volume) / p.target_volume);
  return worst;
}

std::vector<const ScalarField*> tim_neighbors(const PhaseSet& ps, const TimParams& tp) {
  std::vector<const ScalarField*> out;
  for (const auto& p : ps.phases) {
    if (p.type == CellType::Nurse || (p.type == CellType::Oocyte && !tp.nurse_only)) out.push_back(&p.phi);
  }
  return out;
}

int cluster_index(const PhaseSet& ps) {
  const int c = ps.index_of(CellType::Cluster);
  if (c < 0) throw StructuralError("migration needs a cluster phase");
  return c;
}

/// External force on the cluster for the current state (empty when inactive).
std::optional<ScalarField> cluster_force(const PhaseSet& ps, const ScalarField& c, const TimParams& tp,
                                         bool active) {
  if (!active) return std::nullopt;
  const int ci = cluster_index(ps);
  ScalarField f = tim_force(ps[ci].phi, tim_neighbors(ps, tp), c, tp);
  if (tp.classical) f += classical_chemo_force(ps[ci].phi, c, tp.mu_c, tp);
  return f;
}

}  // namespace

RelaxReport relax_chamber(PhaseSet& ps, const EnergyParams& ep, const RelaxOptions& ro) {
  EnergyParams e = ep;
  e.mobility = ro.mobility;
  RelaxReport rep;
  const auto track = [&ps] {
    double total = 0.0;
    for (auto& p : ps.phases) {
      if (p.type != CellType::Cluster) p.target_volume = volume(p.phi);
      total += p.target_volume;
    }
    ps.occupied_target = total;
  };
  if (!ps.occupied_target) track();
  while (rep.time < ro.t_max) {
    if (rep.time < ro.track_time) track();
    double dt = ro.dt_safety * std::min(phase_stability_bound(ps.spec(), e), volume_stability_bound(ps, e));
    dt = std::min(dt, ro.t_max - rep.time);
    PhaseStepReport r;
    ps = step_phases(ps, e, dt, {}, &r);
    rep.time += dt;
    ++rep.steps;
    rep.final_rate = r.max_rate;
    if (!fields_finite(ps) || r.min_phi < -kPhiBlowUp || r.max_phi > 1.0 + kPhiBlowUp)
      throw NumericalError("geometry relaxation diverged at t = " + std::to_string(rep.time));
    if (rep.time >= ro.track_time && r.max_rate < ro.tol) {
      rep.converged = true;
      break;
    }
  }
  return rep;
}

PhaseSet prepared_chamber(const RunConfig& cfg, RelaxReport* report) {
  PhaseSet ps = build_chamber(cfg.scene, cfg.grid);
  const RelaxReport r = relax_chamber(ps, cfg.energy, cfg.relax);
  if (report != nullptr) *report = r;
  return ps;
}

double calibrate_rho_K(const ScalarField& c, const PhaseSet& ps, double y_path) {
  const CorridorProfile prof = corridor_profile(c, ps, y_path);
  double cmax = 0.0;
  for (double v : prof.value) cmax = std::max(cmax, v);
  if (!(cmax > 0.0)) {
    // No clean extracellular node on the path: fall back to the field max.
    cmax = c.max();
  }
  if (!(cmax > 0.0)) throw ContractError("cannot calibrate the receptor response: c vanishes on the path");
  return 0.5 * cmax;
}

void write_snapshot(const fs::path& dir, const SnapshotState& s, const ChemoParams& cp,
                    const TimParams& tp, double dt_outer) {
  fs::create_directories(dir);
  const PhaseSet& ps = s.phases;
  json phases = json::array();
  json volumes = json::array();
  write_field(dir, phase_field_name(0, CellType::Epithelium), ps.epithelium, s.time);
  for (std::size_t m = 0; m < ps.size(); ++m) {
    const std::string name = phase_field_name(m + 1, ps[m].type);
    write_field(dir, name, ps[m].phi, s.time);
    phases.push_back({{"field", name},
                      {"type", to_string(ps[m].type)},
                      {"target_volume", ps[m].target_volume},
                      {"target_rate", ps[m].target_rate}});
    volumes.push_back(volume(ps[m].phi));
  }

  json diag = {{"volumes", volumes}, {"max_xi", occupancy(ps).max()}};
  if (const int ci = ps.index_of(CellType::Cluster); ci >= 0 && volume(ps[ci].phi) > 0.0) {
    const auto [cx, cy] = centroid(ps[ci].phi);
    diag["centroid"] = {cx, cy};
    diag["speed"] = s.previous_centroid
                        ? std::hypot(cx - s.previous_centroid->first, cy - s.previous_centroid->second) / dt_outer
                        : 0.0;
  }

  json meta = {{"step", s.step},
               {"time", s.time},
               {"stage", s.stage},
               {"rho_K", s.rho_K},
               {"tim_active", s.tim_active},
               {"phases", phases},
               {"occupied_target", ps.occupied_target ? json(*ps.occupied_target) : json(nullptr)},
               {"previous_centroid", s.previous_centroid
                                         ? json{s.previous_centroid->first, s.previous_centroid->second}
                                         : json(nullptr)}};

  if (s.chemo) {
    const ChemoState& st = *s.chemo;
    write_field(dir, "c", st.c, s.time);
    write_field(dir, "D_eff", st.D, s.time);
    write_field(dir, "secretion", st.source, s.time);
    meta["chemo_time"] = st.time;
    meta["fixed_right"] = st.fixed_right ? json(*st.fixed_right) : json(nullptr);
    if (integrate(st.source) > 0.0) diag["mass_balance_residual"] = mass_balance_residual(st, cp);
    if (s.tim_active && ps.index_of(CellType::Cluster) >= 0 && s.rho_K > 0.0) {
      TimParams t = tp;
      t.rho_K = s.rho_K;
      const int ci = cluster_index(ps);
      const VectorField flux = tim_flux(ps[ci].phi, tim_neighbors(ps, t), st.c, t);
      ScalarField f = tim_force(ps[ci].phi, tim_neighbors(ps, t), st.c, t);
      write_field(dir, "f_tim", f, s.time);
      write_field(dir, "f_tim_x", flux.x, s.time);
      write_field(dir, "f_tim_y", flux.y, s.time);
    }
  }
  meta["diagnostics"] = diag;
  write_text(dir / "snapshot.json", meta.dump(2) + "\n");
}

SnapshotState read_snapshot(const fs::path& dir, const ChemoParams& cp) {
  json meta;
  try {
    meta = json::parse(read_text(dir / "snapshot.json"));
  } catch (const std::exception& e) {
    throw ConfigError("cannot read snapshot " + dir.string() + ": " + e.what());
  }
  SnapshotState s;
  s.step = meta.at("step").get<long>();
  s.time = meta.at("time").get<double>();
  s.stage = meta.at("stage").get<std::string>();
  s.rho_K = meta.at("rho_K").get<double>();
  s.tim_active = meta.at("tim_active").get<bool>();
  s.phases.epithelium = read_field(dir, phase_field_name(0, CellType::Epithelium));
  for (const auto& p : meta.at("phases")) {
    Phase ph;
    ph.phi = read_field(dir, p.at("field").get<std::string>());
    ph.type = cell_type_from_string(p.at("type").get<std::string>());
    ph.target_volume = p.at("target_volume").get<double>();
    ph.target_rate = p.at("target_rate").get<double>();
    s.phases.phases.push_back(std::move(ph));
  }
  if (!meta.at("occupied_target").is_null()) s.phases.occupied_target = meta["occupied_target"].get<double>();
  if (!meta.at("previous_centroid").is_null())
    s.previous_centroid = {meta["previous_centroid"][0].get<double>(), meta["previous_centroid"][1].get<double>()};
  s.phases.validate();
  if (meta.contains("chemo_time")) {
    ChemoState st;
    st.c = read_field(dir, "c");
    st.time = meta["chemo_time"].get<double>();
    if (!meta["fixed_right"].is_null()) st.fixed_right = meta["fixed_right"].get<double>();
    st.D = read_field(dir, "D_eff");
    st.source = read_field(dir, "secretion");
    (void)cp;
    s.chemo = std::move(st);
  }
  return s;
}

void write_trajectory_csv(const fs::path& file, const Trajectory& tr) {
  std::string out = "time,centroid_x,centroid_y,speed,cluster_volume,mass_balance_residual\n";
  for (const auto& r : tr) {
    out += format_double(r.time) + "," + format_double(r.centroid_x) + "," + format_double(r.centroid_y) + "," +
           format_double(r.speed) + "," + format_double(r.cluster_volume) + "," +
           format_double(r.mass_balance_residual) + "\n";
  }
  write_text(file, out);
}

Trajectory read_trajectory_csv(const fs::path& file) {
  std::istringstream in(read_text(file));
  std::string line;
  std::getline(in, line);  // header
  Trajectory tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double v[6] = {0, 0, 0, 0, 0, 0};
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw StructuralError("short trajectory row in " + file.string());
      x = std::strtod(cell.c_str(), nullptr);
    }
    tr.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  return tr;
}

json run_one_d(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.scenario != Scenario::OneD) throw ConfigError("run_one_d needs scenario one_d");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  json manifest = base_manifest(cfg, ctx);

  auto [ps, st] = build_1d_scene(cfg.window, cfg.grid, cfg.chemo, cfg.right_value);
  const long n_steps = std::lround(cfg.t_end / cfg.dt_outer);
  double worst_ratio = 0.0;
  double leading = 0.0, trailing = 0.0;

  const auto measure = [&](double t) {
    const ScalarField phi = tanh_window(cfg.window, t, cfg.grid);
    double in_sum = 0.0, out_max = 0.0;
    int in_n = 0;
    for (int i = 0; i < phi.nx(); ++i) {
      if (phi(i, 0) > kInteriorThreshold) {
        in_sum += st.c(i, 0);
        ++in_n;
      } else if (phi(i, 0) < kExteriorThreshold) {
        out_max = std::max(out_max, st.c(i, 0));
      }
    }
    const double ratio = (in_n > 0 && out_max > 0.0) ? (in_sum / in_n) / out_max : 0.0;
    // First exterior node on either side of the window.
    const double centre = cfg.window.x0 + cfg.window.v * t;
    int lead = -1, trail = -1;
    for (int i = 0; i < phi.nx(); ++i) {
      if (phi(i, 0) >= kExteriorThreshold) continue;
      if (cfg.grid.x(i) > centre && lead < 0) lead = i;
      if (cfg.grid.x(i) < centre) trail = i;
    }
    return std::tuple{ratio, lead >= 0 ? st.c(lead, 0) : 0.0, trail >= 0 ? st.c(trail, 0) : 0.0, centre};
  };

  json outputs = json::array();
  const auto record = [&](long step) {
    const double t = step * cfg.dt_outer;
    auto [ratio, lead_c, trail_c, centre] = measure(t);
    worst_ratio = std::max(worst_ratio, ratio);
    leading = lead_c;
    trailing = trail_c;
    outputs.push_back({{"step", step}, {"time", t}, {"centre", centre}, {"interior_ratio", ratio},
                       {"leading_c", lead_c}, {"trailing_c", trail_c}});
    SnapshotState s;
    s.step = step;
    s.time = t;
    s.stage = "one_d";
    s.phases = ps;
    s.phases[0].phi = tanh_window(cfg.window, t, cfg.grid);
    s.chemo = st;
    s.chemo->D = diffusivity_single(s.phases[0].phi, cfg.chemo);
    write_snapshot(out / snap_name(step), s, cfg.chemo, cfg.tim, cfg.dt_outer);
    manifest["snapshots"].push_back({{"step", step}, {"time", t}, {"dir", snap_name(step)}});
  };

  record(0);
  for (long n = 0; n < n_steps; ++n) {
    const double t = n * cfg.dt_outer;
    st.D = diffusivity_single(tanh_window(cfg.window, t, cfg.grid), cfg.chemo);
    st = step_chemo(st, cfg.chemo, cfg.dt_outer);
    if (!st.c.all_finite()) throw NumericalError("1D chemo diverged at t = " + std::to_string(t));
    if ((n + 1) % cfg.snapshot_every == 0 || n + 1 == n_steps) record(n + 1);
  }
  manifest["stages"].push_back({{"name", "one_d"}, {"t_start", 0.0}, {"t_end", n_steps * cfg.dt_outer}, {"steps", n_steps}});
  manifest["termination"] = "t_end";
  manifest["diagnostics"] = {{"outputs", outputs},
                             {"max_interior_ratio", worst_ratio},
                             {"final_leading_c", leading},
                             {"final_trailing_c", trailing},
                             {"final_centre", cfg.window.x0 + cfg.window.v * n_steps * cfg.dt_outer},
                             {"substeps", substep_count(st, cfg.chemo, cfg.dt_outer)}};
  finish_manifest(out, manifest);
  return manifest;
}

json run_chemo_only(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.scenario != Scenario::ChemoOnly) throw ConfigError("run_chemo_only needs scenario chemo_only");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  json manifest = base_manifest(cfg, ctx);

  say(ctx, "relaxing chamber geometry");
  RelaxReport rr;
  PhaseSet ps = prepared_chamber(cfg, &rr);
  manifest["stages"].push_back({{"name", "relax"}, {"t_start", 0.0}, {"t_end", rr.time}, {"steps", rr.steps},
                                {"final_rate", rr.final_rate}, {"converged", rr.converged}});

  ChemoState st = make_chamber_chemo(ps, cfg.chemo);
  const auto snapshot = [&](long step) {
    SnapshotState s{step, step * cfg.dt_outer, "chemo", ps, st, 0.0, false, std::nullopt};
    write_snapshot(out / snap_name(step), s, cfg.chemo, cfg.tim, cfg.dt_outer);
    manifest["snapshots"].push_back({{"step", step}, {"time", s.time}, {"dir", snap_name(step)}});
  };

  // Transient march, capturing the requested times.
  std::vector<long> wanted;
  for (double t : cfg.snapshot_times) wanted.push_back(std::lround(t / cfg.dt_outer));
  long last = 0;
  for (long w : wanted) last = std::max(last, w);
  say(ctx, "marching chemoattractant transient");
  snapshot(0);
  for (long n = 1; n <= last; ++n) {
    st = step_chemo(st, cfg.chemo, cfg.dt_outer);
    if (!st.c.all_finite()) throw NumericalError("chemo diverged at step " + std::to_string(n));
    if (std::find(wanted.begin(), wanted.end(), n) != wanted.end()) snapshot(n);
  }
  const double t_transient = last * cfg.dt_outer;
  manifest["stages"].push_back({{"name", "chemo_transient"}, {"t_start", 0.0}, {"t_end", t_transient}, {"steps", last}});

  say(ctx, "relaxing chemoattractant to steady state");
  const SteadyResult res = relax_to_steady(st, cfg.chemo, cfg.steady);
  st = res.state;
  manifest["stages"].push_back({{"name", "chemo_steady"}, {"t_start", t_transient},
                                {"t_end", t_transient + res.steps * cfg.dt_outer}, {"steps", res.steps},
                                {"residual", res.residual}});
  const fs::path steady_dir = out / "steady";
  {
    SnapshotState s{last + res.steps, st.time, "chemo_steady", ps, st, 0.0, false, std::nullopt};
    write_snapshot(steady_dir, s, cfg.chemo, cfg.tim, cfg.dt_outer);
    manifest["snapshots"].push_back({{"step", s.step}, {"time", s.time}, {"dir", "steady"}});
  }

  const Section cs = cross_section(st.c, cfg.cross_section_y);
  const Section cd = cross_section(st.D, cfg.cross_section_y);
  std::string csv = "x,c,D_eff\n";
  for (std::size_t i = 0; i < cs.x.size(); ++i)
    csv += format_double(cs.x[i]) + "," + format_double(cs.value[i]) + "," + format_double(cd.value[i]) + "\n";
  write_text(out / "cross_section.csv", csv);

  const CorridorProfile prof = corridor_profile(st.c, ps, cfg.scene.center_y);
  std::string pcsv = "distance,c\n";
  for (std::size_t i = 0; i < prof.value.size(); ++i)
    pcsv += format_double(prof.distance[i]) + "," + format_double(prof.value[i]) + "\n";
  write_text(out / "corridor_profile.csv", pcsv);

  json diag = {{"mass_balance_residual", mass_balance_residual(st, cfg.chemo)},
               {"corridor_samples", prof.value.size()},
               {"corridor_max_ripple", prof.max_ripple},
               {"steady_steps", res.steps},
               {"steady_residual", res.residual},
               {"max_c", st.c.max()},
               {"min_c", st.c.min()}};
  try {
    diag["confinement"] = confinement_metric(st.c, ps);
  } catch (const ContractError& e) {
    diag["confinement"] = nullptr;
    diag["confinement_error"] = e.what();
  }
  manifest["diagnostics"] = diag;
  manifest["termination"] = "steady_state";
  finish_manifest(out, manifest);
  return manifest;
}

json run_migration(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.scenario != Scenario::Migration && cfg.scenario != Scenario::VolumeSweep)
    throw ConfigError("run_migration needs scenario migration");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  json manifest = base_manifest(cfg, ctx);
  manifest["scenario"] = to_string(Scenario::Migration);

  SnapshotState s;
  if (cfg.resume_from.empty()) {
    say(ctx, "relaxing chamber geometry");
    RelaxReport rr;
    s.phases = prepared_chamber(cfg, &rr);
    manifest["stages"].push_back({{"name", "relax"}, {"t_start", 0.0}, {"t_end", rr.time}, {"steps", rr.steps},
                                  {"final_rate", rr.final_rate}, {"converged", rr.converged}});

    say(ctx, "relaxing chemoattractant to steady state");
    const SteadyResult res = relax_to_steady(make_chamber_chemo(s.phases, cfg.chemo), cfg.chemo, cfg.steady);
    s.chemo = res.state;
    s.chemo->time = 0.0;
    manifest["stages"].push_back({{"name", "chemo_steady"}, {"t_start", 0.0}, {"t_end", res.steps * cfg.dt_outer},
                                  {"steps", res.steps}, {"residual", res.residual}});
    s.stage = "coupled";
    s.tim_active = cfg.tim.activation == Activation::AfterChemoSteady || cfg.tim.activation_time <= 0.0;
    if (s.tim_active)
      s.rho_K = cfg.tim.rho_K > 0.0 ? cfg.tim.rho_K : calibrate_rho_K(s.chemo->c, s.phases, cfg.scene.center_y);
  } else {
    say(ctx, "resuming from " + cfg.resume_from);
    s = read_snapshot(cfg.resume_from, cfg.chemo);
    if (!s.chemo) throw ConfigError("snapshot " + cfg.resume_from + " holds no chemo state");
    manifest["resumed_from"] = cfg.resume_from;
  }

  const int ci = cluster_index(s.phases);
  const int oi = s.phases.index_of(CellType::Oocyte);
  EnergyParams ep = cfg.energy;
  const double v_target = s.phases[ci].target_volume;
  const long n_end = std::lround(cfg.t_end / cfg.dt_outer);
  const long first_step = s.step;

  const auto snapshot = [&](const SnapshotState& snap) {
    write_snapshot(out / snap_name(snap.step), snap, cfg.chemo, cfg.tim, cfg.dt_outer);
    manifest["snapshots"].push_back({{"step", snap.step}, {"time", snap.time}, {"dir", snap_name(snap.step)}});
  };

  Trajectory raw;
  const auto sample = [&]() {
    const auto [cx, cy] = centroid(s.phases[ci].phi);
    raw.push_back({s.time, cx, cy, 0.0, volume(s.phases[ci].phi), mass_balance_residual(*s.chemo, cfg.chemo)});
    return std::pair{cx, cy};
  };

  update_from_phases(*s.chemo, s.phases, cfg.chemo);
  const auto start_centroid = sample();
  if (cfg.resume_from.empty()) snapshot(s);

  std::string termination = "t_end";
  double worst_volume = max_volume_error(s.phases);
  double contact_time = -1.0;
  double max_xi = occupancy(s.phases).max();
  std::string last_good = cfg.resume_from.empty() ? (out / snap_name(s.step)).string() : cfg.resume_from;
  double activation_t = s.tim_active ? 0.0 : -1.0;

  say(ctx, "coupled migration loop");
  while (s.step < n_end) {
    if (!s.tim_active && cfg.tim.activation == Activation::AtTime && s.time >= cfg.tim.activation_time) {
      s.tim_active = true;
      s.rho_K = cfg.tim.rho_K > 0.0 ? cfg.tim.rho_K : calibrate_rho_K(s.chemo->c, s.phases, cfg.scene.center_y);
      activation_t = s.time;
    }
    update_from_phases(*s.chemo, s.phases, cfg.chemo);
    *s.chemo = step_chemo(*s.chemo, cfg.chemo, cfg.dt_outer);

    std::map<std::size_t, ScalarField> ext;
    if (s.tim_active && (cfg.tim.mu_bar_c > 0.0 || cfg.tim.classical)) {
      TimParams tp = cfg.tim;
      tp.rho_K = s.rho_K;
      if (auto f = cluster_force(s.phases, s.chemo->c, tp, true)) ext.emplace(ci, std::move(*f));
    }
    const auto prev = centroid(s.phases[ci].phi);
    PhaseStepReport rep;
    s.phases = advance_phases(s.phases, ep, cfg.dt_outer, cfg.relax.dt_safety, ext, &rep);
    ++s.step;
    s.time = s.step * cfg.dt_outer;
    s.previous_centroid = prev;

    const double xi = occupancy(s.phases).max();
    max_xi = std::max(max_xi, xi);
    if (!fields_finite(s.phases) || !s.chemo->c.all_finite() || xi > kXiBlowUp || rep.min_phi < -kPhiBlowUp ||
        rep.max_phi > 1.0 + kPhiBlowUp) {
      write_trajectory_csv(out / "trajectory.csv", raw);
      throw NumericalError("migration run broke down at t = " + std::to_string(s.time), last_good);
    }
    sample();
    worst_volume = std::max(worst_volume, max_volume_error(s.phases));

    bool stop = false;
    if (oi >= 0 && overlap(s.phases[ci].phi, s.phases[oi].phi) > cfg.contact_fraction * v_target) {
      termination = "contact";
      contact_time = s.time;
      stop = true;
    }
    if (s.step % cfg.snapshot_every == 0 || stop || s.step == n_end) {
      snapshot(s);
      last_good = (out / snap_name(s.step)).string();
    }
    if (stop) break;
  }

  const Trajectory tr = raw.size() >= 2 ? speed_series(raw, cfg.speed_window) : raw;
  write_trajectory_csv(out / "trajectory.csv", tr);
  double peak = 0.0;
  for (const auto& r : tr) peak = std::max(peak, r.speed);
  const auto& fin = tr.back();

  manifest["stages"].push_back({{"name", "coupled"}, {"t_start", first_step * cfg.dt_outer}, {"t_end", s.time},
                                {"steps", s.step - first_step}, {"tim_activation_time", activation_t}});
  manifest["termination"] = termination;
  manifest["diagnostics"] = {{"cluster_target_volume", v_target},
                             {"rho_K", s.rho_K},
                             {"start_centroid", {start_centroid.first, start_centroid.second}},
                             {"final_centroid", {fin.centroid_x, fin.centroid_y}},
                             {"displacement_x", fin.centroid_x - start_centroid.first},
                             {"displacement", std::hypot(fin.centroid_x - start_centroid.first,
                                                         fin.centroid_y - start_centroid.second)},
                             {"peak_speed", peak},
                             {"max_volume_error", worst_volume},
                             {"max_xi", max_xi},
                             {"contact", contact_time >= 0.0},
                             {"contact_time", contact_time >= 0.0 ? json(contact_time) : json(nullptr)},
                             {"final_time", s.time}};
  finish_manifest(out, manifest);
  return manifest;
}

json run_volume_sweep(const RunConfig& cfg, const RunContext& ctx) {
  if (cfg.scenario != Scenario::VolumeSweep) throw ConfigError("run_volume_sweep needs scenario volume_sweep");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  json manifest = base_manifest(cfg, ctx);
  json members = json::array();
  std::string combined = "volume,time,centroid_x,centroid_y,speed,cluster_volume,mass_balance_residual\n";

  for (double v : cfg.sweep_volumes) {
    RunConfig m = cfg;
    m.scenario = Scenario::Migration;
    m.scene.cluster_volume = v;
    const std::string sub = "v_" + shortest(v);
    m.output_dir = (out / sub).string();
    say(ctx, "sweep member " + sub);
    json entry = {{"volume", v}, {"dir", sub}};
    try {
      const json r = run_migration(m, ctx);
      entry["status"] = "ok";
      entry["termination"] = r["termination"];
      entry["diagnostics"] = r["diagnostics"];
      for (const auto& row : read_trajectory_csv(fs::path(m.output_dir) / "trajectory.csv"))
        combined += format_double(v) + "," + format_double(row.time) + "," + format_double(row.centroid_x) + "," +
                    format_double(row.centroid_y) + "," + format_double(row.speed) + "," +
                    format_double(row.cluster_volume) + "," + format_double(row.mass_balance_residual) + "\n";
    } catch (const std::exception& e) {
      entry["status"] = "failed";
      entry["error"] = e.what();
    }
    members.push_back(entry);
  }
  write_text(out / "sweep_trajectory.csv", combined);
  manifest["members"] = members;
  manifest["termination"] = "complete";
  finish_manifest(out, manifest);
  return manifest;
}

json run(const RunConfig& cfg, const RunContext& ctx) {
  switch (cfg.scenario) {
    case Scenario::OneD: return run_one_d(cfg, ctx);
    case Scenario::ChemoOnly: return run_chemo_only(cfg, ctx);
    case Scenario::Migration: return run_migration(cfg, ctx);
    case Scenario::VolumeSweep: return run_volume_sweep(cfg, ctx);
  }
  throw ConfigError("unknown scenario");
}

}  // namespace bcm
