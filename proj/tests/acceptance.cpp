#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bcm/analysis.hpp"
#include "bcm/chemo.hpp"
#include "bcm/config.hpp"
#include "bcm/driver.hpp"
#include "bcm/io.hpp"
#include "bcm/motility.hpp"
#include "bcm/scenario.hpp"

using namespace bcm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunContext context(bool verbose) {
  RunContext ctx;
  if (verbose) ctx.log = [](const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); };
  return ctx;
}

Outcome allen_cahn() {
  const Clock clock;
  const Window1D w;
  const double r1 = ac_residual(ac_wall(w, 5.0, line_grid(10.0, 0.02)), w);
  const double r2 = ac_residual(ac_wall(w, 5.0, line_grid(10.0, 0.01)), w);
  const double ratio = r1 / r2;
  const double t = clock.seconds();
  return {ratio >= 3.5 && ratio <= 4.5 && t < 1.0,
          fmt("residual ratio %.4f (dx 0.02: %.3e, dx 0.01: %.3e), %.2f s", ratio, r1, r2, t)};
}

Outcome conservation() {
  const Clock clock;
  const GridSpec g = square_grid(5.0, 0.1);
  ChemoParams cp;
  cp.k = 0.0;
  const PhaseSet ps = build_chamber(SceneConfig::defaults(), g);
  ChemoState st = make_chamber_chemo(ps, cp);
  st.source = ScalarField(g, 0.0);
  st.c = ScalarField::sample(g, [](double x, double y) { return 1.0 + std::sin(2.0 * x) * std::cos(3.0 * y); });
  double worst = 0.0;
  double prev = integrate(st.c);
  for (int n = 0; n < 1000; ++n) {
    st = step_chemo(st, cp, 0.05);
    const double m = integrate(st.c);
    worst = std::max(worst, std::abs(m - prev) / std::abs(prev));
    prev = m;
  }
  const double t = clock.seconds();
  return {worst <= 1e-10 && t < 10.0,
          fmt("max relative change of the integral per step %.3e over 1000 steps (D in [%.1e, %.2f]), %.2f s", worst,
              st.D.min(), st.D.max(), t)};
}

Outcome decay() {
  const Clock clock;
  const GridSpec g = square_grid(5.0, 0.05);
  ChemoParams cp;
  cp.k = 0.002;
  const PhaseSet ps = build_chamber(SceneConfig::defaults(), g);
  ChemoState st = make_chamber_chemo(ps, cp);
  st.source = ScalarField(g, 0.0);
  st.c = ScalarField(g, 1.0);
  double worst = 0.0;
  for (int n = 1; n <= 100; ++n) {
    st = step_chemo(st, cp, 0.05);
    const double exact = std::exp(-cp.k * 0.05 * n);
    worst = std::max(worst, (st.c.values() - exact).abs().maxCoeff() / exact);
  }
  const double t = clock.seconds();
  return {worst <= 1e-3 && t < 5.0, fmt("max relative deviation from exp(-kt) %.3e, %.2f s", worst, t)};
}

Outcome one_d(const fs::path& out, bool verbose) {
  const Clock clock;
  RunConfig c = load_config({}, {"scenario=\"one_d\"", "grid.nx=201", "grid.ny=1", "grid.dx=0.05", "t_end=2",
                                 "snapshot_every=10"});
  c.output_dir = (out / "one_d").string();
  const json m = run(c, context(verbose));
  const json& d = m["diagnostics"];
  const double ratio = d["max_interior_ratio"].get<double>();
  const double lead = d["final_leading_c"].get<double>();
  const double trail = d["final_trailing_c"].get<double>();
  const double t = clock.seconds();
  return {ratio <= 0.05 && lead > trail && t < 30.0,
          fmt("max interior/exterior ratio %.4f over %zu outputs; leading c %.4f vs trailing c %.3e; %.1f s", ratio,
              d["outputs"].size(), lead, trail, t)};
}

Outcome identical_dirs(const fs::path& a, const fs::path& b, int* compared) {
  *compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel)) return {false, "missing " + rel.string()};
    if (read_text(e.path()) != read_text(b / rel)) return {false, "differs: " + rel.string()};
    ++*compared;
  }
  return {true, ""};
}

Outcome determinism(const fs::path& out, bool verbose) {
  const std::vector<std::string> small{"relax.t_max=1", "t_end=2", "snapshot_every=10"};
  RunConfig c = load_config({}, small);
  const fs::path a = out / "det_a", a2 = out / "det_a_copy", b = out / "det_b";
  fs::remove_all(a);
  fs::remove_all(a2);
  fs::remove_all(b);
  c.output_dir = a.string();
  run_migration(c, context(verbose));
  fs::copy(a, a2, fs::copy_options::recursive);
  run_migration(c, context(verbose));
  int n_rerun = 0;
  const Outcome rerun = identical_dirs(a, a2, &n_rerun);
  const bool manifest_same = read_text(a / "manifest.json") == read_text(a2 / "manifest.json");

  RunConfig r = c;
  r.output_dir = b.string();
  r.resume_from = (a / "snap_20").string();
  run_migration(r, context(verbose));
  int n_resume = 0;
  bool resume_ok = true;
  std::string resume_detail;
  for (const char* snap : {"snap_30", "snap_40"}) {
    int n = 0;
    const Outcome o = identical_dirs(a / snap, b / snap, &n);
    n_resume += n;
    if (!o.pass) {
      resume_ok = false;
      resume_detail = std::string(" (") + snap + ": " + o.detail + ")";
    }
  }
  return {manifest_same && rerun.pass && resume_ok,
          fmt("rerun: manifest %s, %d files identical%s; resume from step 20: %d snapshot files %s%s",
              manifest_same ? "identical" : "differs", n_rerun, rerun.pass ? "" : (" (" + rerun.detail + ")").c_str(),
              n_resume, resume_ok ? "identical" : "differ", resume_detail.c_str())};
}

Outcome tim_properties() {
  const GridSpec g = square_grid(5.0, 0.05);
  const PhaseSet ps = build_chamber(SceneConfig::defaults(), g);
  ChemoParams cp;
  const ScalarField c = steady_solve(make_chamber_chemo(ps, cp), cp);
  const int ci = ps.index_of(CellType::Cluster);
  std::vector<const ScalarField*> nb;
  for (std::size_t m = 0; m < ps.size(); ++m)
    if (static_cast<int>(m) != ci) nb.push_back(&ps[m].phi);
  TimParams tp;
  tp.rho_K = 0.5 * c.max();
  const ScalarField f = tim_force(ps[ci].phi, nb, c, tp);

  const double scale = integrate(ScalarField(g, f.values().abs()));
  const double net = std::abs(integrate(f)) / scale;

  const double uniform = tim_force(ps[ci].phi, nb, ScalarField(g, c.max()), tp).values().abs().maxCoeff();

  // Nodes whose whole stencil has phi_c * sum phi_j == 0.
  NodeArray<double> contact = NodeArray<double>::Zero(g.ny, g.nx);
  for (const auto* n : nb) contact += n->values();
  contact *= ps[ci].phi.values();
  double off_contact = 0.0;
  long free_nodes = 0;
  for (int j = 1; j < g.ny - 1; ++j)
    for (int i = 1; i < g.nx - 1; ++i) {
      if (contact.block(j - 1, i - 1, 3, 3).abs().maxCoeff() != 0.0) continue;
      ++free_nodes;
      off_contact = std::max(off_contact, std::abs(f(i, j)));
    }
  const ScalarField none(g, 0.0);
  const double isolated = tim_force(ps[ci].phi, {&none}, c, tp).values().abs().maxCoeff();

  TimParams cw = tp;
  cw.perp = PerpConvention::Clockwise;
  const double flip = (tim_force(ps[ci].phi, nb, c, cw).values() - f.values()).abs().maxCoeff() /
                      f.values().abs().maxCoeff();

  const bool pass = scale > 0.0 && net <= 1e-10 && uniform == 0.0 && off_contact == 0.0 && isolated == 0.0 &&
                    flip <= 1e-12;
  return {pass, fmt("|int F|/int|F| %.2e; uniform c max|F| %.1e; max|F| off contact %.1e (%ld nodes), isolated "
                    "cluster %.1e; perp flip rel diff %.1e",
                    net, uniform, off_contact, free_nodes, isolated, flip)};
}

double get(const json& d, const char* key) { return d.at(key).is_null() ? NAN : d.at(key).get<double>(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite of the border-cell migration simulator"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  bool verbose = false;
  app.add_option("--out", out, "Scratch directory for the runs");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
  CLI11_PARSE(app, argc, argv);
  const fs::path root = out;
  fs::create_directories(root);
  const std::set<int> wanted(only.begin(), only.end());
  const auto want = [&](std::initializer_list<int> ids) {
    if (wanted.empty()) return true;
    for (int i : ids)
      if (wanted.count(i)) return true;
    return false;
  };

  int failures = 0;
  const auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("criterion %2d %-30s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  const auto guarded = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    if (!want({id})) return;
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("error: ") + e.what()});
    }
  };

  guarded(1, "allen-cahn oracle", allen_cahn);
  guarded(2, "conservation oracle", conservation);
  guarded(3, "decay oracle", decay);

  if (want({4, 5, 6})) {
    json d;
    double seconds = 0.0;
    std::string error;
    try {
      const Clock clock;
      RunConfig c = load_config({}, {"scenario=\"chemo_only\""});
      c.output_dir = (root / "chemo").string();
      d = run(c, context(verbose))["diagnostics"];
      seconds = clock.seconds();
    } catch (const std::exception& e) {
      error = std::string("error: ") + e.what();
    }
    if (!error.empty()) {
      for (int id : {4, 5, 6})
        if (want({id})) report(id, "chemo steady state", {false, error});
    } else {
      if (want({4})) {
        const double conf = get(d, "confinement");
        report(4, "confinement", {conf <= 0.02 && seconds <= 600.0,
                                  fmt("confinement metric %.4f (threshold 0.02); run %.0f s", conf, seconds)});
      }
      if (want({5})) {
        const double mb = get(d, "mass_balance_residual");
        report(5, "steady mass balance", {mb <= 0.02, fmt("residual %.3e after %d steady steps", mb,
                                                          d["steady_steps"].get<int>())});
      }
      if (want({6})) {
        const double ripple = get(d, "corridor_max_ripple");
        const int n = d["corridor_samples"].get<int>();
        report(6, "corridor gradient", {n >= 10 && ripple <= 0.01,
                                        fmt("max ripple %.3e over %d corridor samples", ripple, n)});
      }
    }
  }

  guarded(7, "1d window", [&] { return one_d(root, verbose); });

  if (want({8, 9, 10})) {
    json sweep, null_run;
    double sweep_seconds = 0.0;
    std::string error;
    try {
      const Clock clock;
      RunConfig c = load_config({}, {"scenario=\"volume_sweep\""});
      c.output_dir = (root / "sweep").string();
      sweep = run(c, context(verbose));
      sweep_seconds = clock.seconds();
      if (want({9})) {
        RunConfig n = load_config({}, {"tim.mu_bar_c=0"});
        n.output_dir = (root / "null").string();
        null_run = run(n, context(verbose));
      }
    } catch (const std::exception& e) {
      error = std::string("error: ") + e.what();
    }
    json members;
    for (const auto& m : sweep.value("members", json::array()))
      if (m["status"] == "ok") members[m["dir"].get<std::string>()] = m["diagnostics"];
    const bool complete = members.contains("v_0.12") && members.contains("v_0.15") && members.contains("v_0.18");
    if (error.empty() && !complete) error = "sweep incomplete: " + sweep.value("members", json::array()).dump();

    if (!error.empty()) {
      for (int id : {8, 9, 10})
        if (want({id})) report(id, "migration", {false, error});
    } else {
      const json& def = members["v_0.15"];
      if (want({8})) {
        const double ve = get(def, "max_volume_error");
        report(8, "volume control", {ve <= 0.05, fmt("max relative volume error %.4f over %.0f time units (v=0.15)",
                                                     ve, get(def, "final_time"))});
      }
      if (want({9})) {
        const double dnull = get(null_run["diagnostics"], "displacement");
        const double dx = get(def, "displacement_x");
        const bool contact = def["contact"].get<bool>();
        const double dxg = RunConfig{}.grid.dx;
        report(9, "migration null test",
               {dnull <= dxg && dx > 0.0 && contact,
                fmt("null displacement %.4f (limit %.2f); default x-displacement %.4f; contact %s at t = %s", dnull,
                    dxg, dx, contact ? "reached" : "not reached",
                    contact ? fmt("%.1f", get(def, "contact_time")).c_str() : "-")});
      }
      if (want({10})) {
        const double p12 = get(members["v_0.12"], "peak_speed"), p18 = get(members["v_0.18"], "peak_speed");
        const double d12 = get(members["v_0.12"], "displacement"), d15 = get(def, "displacement"),
                     d18 = get(members["v_0.18"], "displacement");
        report(10, "volume sweep ordering",
               {p12 > p18 && d18 < d12 && d18 < d15 && sweep_seconds <= 2700.0,
                fmt("peak speed 0.12: %.3e vs 0.18: %.3e; displacement 0.12/0.15/0.18: %.4f/%.4f/%.4f; sweep %.0f s",
                    p12, p18, d12, d15, d18, sweep_seconds)});
      }
    }
  }

  guarded(11, "tim structure", tim_properties);
  guarded(12, "determinism and restart", [&] { return determinism(root, verbose); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
