#include "doctest.h"

#include <filesystem>

#include "bcm/config.hpp"
#include "bcm/driver.hpp"
#include "bcm/errors.hpp"
#include "bcm/io.hpp"

using namespace bcm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bcm_test_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig small_migration(const fs::path& out) {
  RunConfig c;
  c.grid = square_grid(5.0, 0.1);
  c.relax.t_max = 0.2;
  c.relax.track_time = 0.1;
  c.t_end = 0.5;
  c.snapshot_every = 4;
  c.output_dir = out.string();
  c.validate();
  return c;
}

}  // namespace

TEST_CASE("1D window run") {
  const fs::path out = scratch("one_d");
  RunConfig c;
  c.scenario = Scenario::OneD;
  c.grid = line_grid(10.0, 0.02);
  c.t_end = 0.5;
  c.snapshot_every = 5;
  c.output_dir = out.string();
  const auto m = run(c);
  CHECK(m["termination"] == "t_end");
  CHECK(m["diagnostics"]["max_interior_ratio"].get<double>() < 0.05);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "snap_10" / "c.csv"));
  fs::remove_all(out);
}

TEST_CASE("migration runs are reproducible and resumable") {
  const fs::path a = scratch("mig_a");
  const fs::path b = scratch("mig_b");
  RunConfig c = small_migration(a);
  const auto m1 = run_migration(c);
  const std::string first = read_text(a / "manifest.json");
  const std::string traj = read_text(a / "trajectory.csv");
  run_migration(c);
  CHECK(read_text(a / "manifest.json") == first);
  CHECK(read_text(a / "trajectory.csv") == traj);
  CHECK(m1["termination"] == "t_end");
  CHECK(m1["stages"].size() == 3);

  const auto snap = read_snapshot(a / "snap_8", c.chemo);
  CHECK(snap.step == 8);
  CHECK(snap.chemo.has_value());

  RunConfig r = c;
  r.output_dir = b.string();
  r.resume_from = (a / "snap_4").string();
  const auto m2 = run_migration(r);
  CHECK(m2["resumed_from"] == r.resume_from);
  for (const auto& f : {"c", "phi_7_cluster", "phi_8_oocyte"})
    CHECK(read_text(a / "snap_10" / (std::string(f) + ".csv")) == read_text(b / "snap_10" / (std::string(f) + ".csv")));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("snapshots round-trip") {
  const fs::path out = scratch("snap");
  RunConfig c = small_migration(out);
  SnapshotState s;
  s.phases = prepared_chamber(c);
  s.chemo = make_chamber_chemo(s.phases, c.chemo, 3.0);
  s.step = 60;
  s.time = 3.0;
  s.stage = "coupled";
  s.rho_K = 0.7;
  s.tim_active = true;
  s.previous_centroid = std::pair{0.5, 2.5};
  write_snapshot(out, s, c.chemo, c.tim, c.dt_outer);
  const SnapshotState t = read_snapshot(out, c.chemo);
  CHECK(t.step == 60);
  CHECK(t.rho_K == 0.7);
  CHECK(t.tim_active);
  CHECK(t.previous_centroid->first == 0.5);
  REQUIRE(t.phases.size() == s.phases.size());
  for (std::size_t m = 0; m < s.phases.size(); ++m) {
    CHECK((t.phases[m].phi.values() == s.phases[m].phi.values()).all());
    CHECK(t.phases[m].target_volume == s.phases[m].target_volume);
    CHECK(t.phases[m].type == s.phases[m].type);
  }
  CHECK(t.phases.occupied_target == s.phases.occupied_target);
  CHECK((t.chemo->c.values() == s.chemo->c.values()).all());
  CHECK(t.chemo->time == 3.0);
  fs::remove_all(out);
}

TEST_CASE("trajectory CSV round-trip") {
  const fs::path out = scratch("traj");
  fs::create_directories(out);
  Trajectory tr{{0.0, 0.1, 0.2, 0.3, 0.15, 1e-13}, {0.05, 0.1 + 1.0 / 3.0, 0.2, 0.3, 0.15, 0.0}};
  write_trajectory_csv(out / "t.csv", tr);
  const Trajectory back = read_trajectory_csv(out / "t.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].centroid_x == tr[1].centroid_x);
  CHECK(back[0].mass_balance_residual == 1e-13);
  fs::remove_all(out);
}

TEST_CASE("resume from a missing snapshot fails cleanly") {
  RunConfig c = small_migration(scratch("missing"));
  c.resume_from = "/nonexistent/snap_0";
  CHECK_THROWS(run_migration(c));
}
