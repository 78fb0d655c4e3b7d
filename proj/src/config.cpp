#include "bcm/config.hpp"

#include <sstream>

#include "bcm/errors.hpp"
#include "bcm/io.hpp"

namespace bcm {

using nlohmann::json;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::OneD: return "one_d";
    case Scenario::ChemoOnly: return "chemo_only";
    case Scenario::Migration: return "migration";
    case Scenario::VolumeSweep: return "volume_sweep";
  }
  return "unknown";
}

namespace {

Scenario scenario_from_string(const std::string& s) {
  for (Scenario v : {Scenario::OneD, Scenario::ChemoOnly, Scenario::Migration, Scenario::VolumeSweep})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown scenario '" + s + "'");
}

std::string to_string(FaceAverage f) { return f == FaceAverage::Arithmetic ? "arithmetic" : "harmonic"; }

FaceAverage face_average_from_string(const std::string& s) {
  if (s == "arithmetic") return FaceAverage::Arithmetic;
  if (s == "harmonic") return FaceAverage::Harmonic;
  throw ConfigError("chemo.face_average must be 'arithmetic' or 'harmonic'");
}

std::string to_string(Activation a) { return a == Activation::AfterChemoSteady ? "after_chemo_steady" : "at_time"; }

Activation activation_from_string(const std::string& s) {
  if (s == "after_chemo_steady") return Activation::AfterChemoSteady;
  if (s == "at_time") return Activation::AtTime;
  throw ConfigError("tim.activation must be 'after_chemo_steady' or 'at_time'");
}

std::string to_string(PerpConvention p) {
  return p == PerpConvention::CounterClockwise ? "counterclockwise" : "clockwise";
}

PerpConvention perp_from_string(const std::string& s) {
  if (s == "counterclockwise") return PerpConvention::CounterClockwise;
  if (s == "clockwise") return PerpConvention::Clockwise;
  throw ConfigError("tim.perp must be 'counterclockwise' or 'clockwise'");
}

json matrix_to_json(const PairMatrix& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

PairMatrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be a 3x3 array");
  PairMatrix m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) throw ConfigError(std::string(what) + " must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json disc_to_json(const Disc& d) { return {d.x, d.y, d.r}; }

Disc disc_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("discs are [x, y, r] triples");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void merge_strict(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("configuration " + (prefix.empty() ? "root" : prefix) + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown configuration key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_strict(slot, it.value(), key);
    else
      slot = it.value();
  }
}

}  // namespace

void RunConfig::validate() const {
  grid.validate();
  if (!(dt_outer > 0.0)) throw ConfigError("dt_outer must be positive");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
  if (speed_window < 1) throw ConfigError("speed_window must be >= 1");
  if (!(contact_fraction > 0.0)) throw ConfigError("contact_fraction must be positive");
  for (double v : sweep_volumes)
    if (!(v > 0.0)) throw ConfigError("sweep volumes must be positive");
  if (!(relax.mobility > 0.0)) throw ConfigError("relax.mobility must be positive");
  if (!(relax.tol > 0.0) || !(relax.t_max >= 0.0) || !(relax.track_time >= 0.0))
    throw ConfigError("relax.tol must be positive, relax.t_max and relax.track_time non-negative");
  if (!(relax.dt_safety > 0.0 && relax.dt_safety <= 1.0)) throw ConfigError("relax.dt_safety must lie in (0, 1]");
  if (!(steady.tol > 0.0) || steady.max_steps < 1) throw ConfigError("steady.tol and steady.max_steps must be positive");
  energy.validate();
  chemo.validate();
  tim.validate();
  if (scenario == Scenario::OneD) {
    if (!grid.is_1d()) throw ConfigError("scenario one_d needs grid.ny = 1");
    window.validate();
  } else {
    if (grid.is_1d()) throw ConfigError("chamber scenarios need a 2D grid");
    scene.validate();
  }
}

json to_json(const RunConfig& c) {
  json nurses = json::array();
  for (const auto& n : c.scene.nurses) nurses.push_back(disc_to_json(n));
  return {
      {"scenario", to_string(c.scenario)},
      {"grid", {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"dx", c.grid.dx}, {"origin", {c.grid.x0, c.grid.y0}}}},
      {"scene",
       {{"extent", c.scene.extent},
        {"center", {c.scene.center_x, c.scene.center_y}},
        {"semi_axes", {c.scene.semi_a, c.scene.semi_b}},
        {"interface_width", c.scene.interface_width},
        {"oocyte_cap_fraction", c.scene.oocyte_cap_fraction},
        {"gap", c.scene.gap},
        {"nurses", nurses},
        {"cluster", disc_to_json(c.scene.cluster)},
        {"cluster_volume", c.scene.cluster_volume},
        {"overlap_tolerance", c.scene.overlap_tolerance},
        {"seed_cluster", c.scene.seed_cluster},
        {"seed_oocyte", c.scene.seed_oocyte}}},
      {"window",
       {{"x0", c.window.x0}, {"R", c.window.R}, {"eps", c.window.eps}, {"D_phi", c.window.D_phi}, {"v", c.window.v}}},
      {"right_value", c.right_value},
      {"energy",
       {{"eps2", {c.energy.eps2[0], c.energy.eps2[1], c.energy.eps2[2]}},
        {"mobility", c.energy.mobility},
        {"alpha0", c.energy.alpha0},
        {"alpha", c.energy.alpha},
        {"beta0", c.energy.beta0},
        {"beta", matrix_to_json(c.energy.beta)},
        {"gamma0", c.energy.gamma0},
        {"gamma", matrix_to_json(c.energy.gamma)},
        {"cap_adhesion", c.energy.cap_adhesion}}},
      {"relax",
       {{"mobility", c.relax.mobility},
        {"track_time", c.relax.track_time},
        {"tol", c.relax.tol},
        {"t_max", c.relax.t_max},
        {"dt_safety", c.relax.dt_safety}}},
      {"chemo",
       {{"D0", c.chemo.D0},
        {"k", c.chemo.k},
        {"sigma", c.chemo.sigma},
        {"phi_star", c.chemo.phi_star},
        {"s", c.chemo.s},
        {"c0", c.chemo.c0},
        {"substep_safety", c.chemo.substep_safety},
        {"include_epithelium", c.chemo.include_epithelium},
        {"face_average", to_string(c.chemo.face_average)}}},
      {"steady", {{"tol", c.steady.tol}, {"max_steps", c.steady.max_steps}, {"warm_start", c.steady.warm_start}}},
      {"tim",
       {{"mu_bar_c", c.tim.mu_bar_c},
        {"rho_K", c.tim.rho_K},
        {"rho_n", c.tim.rho_n},
        {"sign_eta", c.tim.sign_eta},
        {"activation", to_string(c.tim.activation)},
        {"activation_time", c.tim.activation_time},
        {"nurse_only", c.tim.nurse_only},
        {"perp", to_string(c.tim.perp)},
        {"classical", c.tim.classical},
        {"mu_c", c.tim.mu_c}}},
      {"dt_outer", c.dt_outer},
      {"t_end", c.t_end},
      {"snapshot_every", c.snapshot_every},
      {"snapshot_times", c.snapshot_times},
      {"cross_section_y", c.cross_section_y},
      {"contact_fraction", c.contact_fraction},
      {"speed_window", c.speed_window},
      {"output_dir", c.output_dir},
      {"resume_from", c.resume_from},
      {"rng_seed", c.rng_seed},
      {"sweep_volumes", c.sweep_volumes},
  };
}

RunConfig config_from_json(const json& doc) {
  json full = to_json(RunConfig{});
  merge_strict(full, doc, "");
  RunConfig c;
  try {
    c.scenario = scenario_from_string(full["scenario"].get<std::string>());
    const json& g = full["grid"];
    c.grid.nx = g["nx"].get<int>();
    c.grid.ny = g["ny"].get<int>();
    c.grid.dx = g["dx"].get<double>();
    c.grid.x0 = g["origin"].at(0).get<double>();
    c.grid.y0 = g["origin"].at(1).get<double>();

    const json& s = full["scene"];
    c.scene.extent = s["extent"].get<double>();
    c.scene.center_x = s["center"].at(0).get<double>();
    c.scene.center_y = s["center"].at(1).get<double>();
    c.scene.semi_a = s["semi_axes"].at(0).get<double>();
    c.scene.semi_b = s["semi_axes"].at(1).get<double>();
    c.scene.interface_width = s["interface_width"].get<double>();
    c.scene.oocyte_cap_fraction = s["oocyte_cap_fraction"].get<double>();
    c.scene.gap = s["gap"].get<double>();
    c.scene.nurses.clear();
    for (const auto& n : s["nurses"]) c.scene.nurses.push_back(disc_from_json(n));
    c.scene.cluster = disc_from_json(s["cluster"]);
    c.scene.cluster_volume = s["cluster_volume"].get<double>();
    c.scene.overlap_tolerance = s["overlap_tolerance"].get<double>();
    c.scene.seed_cluster = s["seed_cluster"].get<bool>();
    c.scene.seed_oocyte = s["seed_oocyte"].get<bool>();

    const json& w = full["window"];
    c.window = {w["x0"].get<double>(), w["R"].get<double>(), w["eps"].get<double>(),
                w["D_phi"].get<double>(), w["v"].get<double>()};
    c.right_value = full["right_value"].get<double>();

    const json& e = full["energy"];
    for (int i = 0; i < 3; ++i) c.energy.eps2[i] = e["eps2"].at(i).get<double>();
    c.energy.mobility = e["mobility"].get<double>();
    c.energy.alpha0 = e["alpha0"].get<double>();
    c.energy.alpha = e["alpha"].get<double>();
    c.energy.beta0 = e["beta0"].get<double>();
    c.energy.beta = matrix_from_json(e["beta"], "energy.beta");
    c.energy.gamma0 = e["gamma0"].get<double>();
    c.energy.gamma = matrix_from_json(e["gamma"], "energy.gamma");
    c.energy.cap_adhesion = e["cap_adhesion"].get<bool>();

    const json& r = full["relax"];
    c.relax = {r["mobility"].get<double>(), r["track_time"].get<double>(), r["tol"].get<double>(),
               r["t_max"].get<double>(), r["dt_safety"].get<double>()};

    const json& ch = full["chemo"];
    c.chemo.D0 = ch["D0"].get<double>();
    c.chemo.k = ch["k"].get<double>();
    c.chemo.sigma = ch["sigma"].get<double>();
    c.chemo.phi_star = ch["phi_star"].get<double>();
    c.chemo.s = ch["s"].get<double>();
    c.chemo.c0 = ch["c0"].get<double>();
    c.chemo.substep_safety = ch["substep_safety"].get<double>();
    c.chemo.include_epithelium = ch["include_epithelium"].get<bool>();
    c.chemo.face_average = face_average_from_string(ch["face_average"].get<std::string>());

    const json& st = full["steady"];
    c.steady.tol = st["tol"].get<double>();
    c.steady.max_steps = st["max_steps"].get<int>();
    c.steady.warm_start = st["warm_start"].get<bool>();

    const json& t = full["tim"];
    c.tim.mu_bar_c = t["mu_bar_c"].get<double>();
    c.tim.rho_K = t["rho_K"].get<double>();
    c.tim.rho_n = t["rho_n"].get<double>();
    c.tim.sign_eta = t["sign_eta"].get<double>();
    c.tim.activation = activation_from_string(t["activation"].get<std::string>());
    c.tim.activation_time = t["activation_time"].get<double>();
    c.tim.nurse_only = t["nurse_only"].get<bool>();
    c.tim.perp = perp_from_string(t["perp"].get<std::string>());
    c.tim.classical = t["classical"].get<bool>();
    c.tim.mu_c = t["mu_c"].get<double>();

    c.dt_outer = full["dt_outer"].get<double>();
    c.t_end = full["t_end"].get<double>();
    c.snapshot_every = full["snapshot_every"].get<int>();
    c.snapshot_times = full["snapshot_times"].get<std::vector<double>>();
    c.cross_section_y = full["cross_section_y"].get<double>();
    c.contact_fraction = full["contact_fraction"].get<double>();
    c.speed_window = full["speed_window"].get<int>();
    c.output_dir = full["output_dir"].get<std::string>();
    c.resume_from = full["resume_from"].get<std::string>();
    c.rng_seed = full["rng_seed"].get<int>();
    c.sweep_volumes = full["sweep_volumes"].get<std::vector<double>>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("configuration value has the wrong type: ") + ex.what());
  }
  c.steady.dt_outer = c.dt_outer;
  c.validate();
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  json* node = &doc;
  std::istringstream parts(path);
  std::string part;
  std::string walked;
  while (std::getline(parts, part, '.')) {
    walked += walked.empty() ? part : "." + part;
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("override path '" + walked + "' does not exist");
    node = &(*node)[part];
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = std::move(value);
}

json resolve_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  json doc = to_json(RunConfig{});
  if (!file.empty()) {
    json patch;
    try {
      patch = json::parse(read_text(file));
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + file.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    merge_strict(doc, patch, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return doc;
}

RunConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides) {
  return config_from_json(resolve_config(file, overrides));
}

}  // namespace bcm
