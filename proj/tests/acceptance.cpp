// Acceptance suite: one self-contained criterion per section, each printing a
// single [PASS]/[FAIL] line with the measured value, its tolerance, and the
// runtime budget. Exits nonzero when any criterion fails.
//
// Usage: acceptance <path-to-cli-binary> <config-data-dir>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "contactlab/drivers.hpp"

namespace fs = std::filesystem;
using namespace contactlab;

namespace {

struct Budget {
  std::chrono::steady_clock::time_point t0 =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

int g_failures = 0;

void report(int index, const std::string& name, bool pass, double elapsed,
            double budget, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("[%s] %d/9 %s: %s [%.1fs < %.0fs]\n", pass ? "PASS" : "FAIL",
              index, name.c_str(), detail.c_str(), elapsed, budget);
  std::fflush(stdout);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

MagneticSystem standard_system(const std::string& key) {
  MagneticSystem sys;
  sys.manifold = make_manifold(key);
  sys.metric = extend_metric(sys.manifold, bundle_identity(2));
  sys.strength = 1.0;
  return sys;
}

std::vector<ChartPoint> all_sample_points() {
  std::vector<ChartPoint> pts = torus_grid(20);
  return pts;
}

// --- 1: Reeb field identities on dense point sets --------------------------

void criterion_reeb_identities() {
  const Budget b;
  const double budget = 5.0;
  const auto t3 = make_manifold("t3-standard");
  const auto s3 = make_manifold("s3-standard");
  const auto* sm = dynamic_cast<const SphereManifold*>(s3.get());
  Rng rng(11);

  double worst = 0.0;
  auto sweep = [&](const ContactManifold& m,
                   const std::vector<ChartPoint>& pts) {
    for (const ChartPoint& q : pts) {
      const Vec a = m.alpha(q);
      const Mat D = m.dalpha(q);
      const Vec R = reeb_vector(m, q);
      worst = std::max(worst, std::abs(a.dot(R) - 1.0));
      worst =
          std::max(worst, (D.transpose() * R).lpNorm<Eigen::Infinity>());
    }
  };
  sweep(*t3, torus_grid(20));
  sweep(*s3, sphere_points(*sm, 500, rng));

  const bool pass = worst < 1e-10 && b.seconds() < budget;
  report(1, "reeb-field-identities", pass, b.seconds(), budget,
         "max of |alpha(R)-1|, |i_R dalpha| = " + num(worst) +
             " (tol 1e-10, 20^3 torus grid + 500 sphere points)");
}

// --- 2: class-G construction certificates -----------------------------------

void criterion_class_g() {
  const Budget b;
  const double budget = 5.0;
  Rng rng(13);
  VerifyResult out;
  for (const char* key : {"t3-standard", "s3-standard"}) {
    auto m = make_manifold(key);
    std::vector<ChartPoint> pts;
    if (const auto* sm = dynamic_cast<const SphereManifold*>(m.get()))
      pts = sphere_points(*sm, 300, rng);
    else
      pts = torus_grid(12);
    detail::class_g_checks(m, pts, 0, out);
  }
  double worst = 0.0;
  bool pass = true;
  for (const auto& c : out.checks) {
    worst = std::max(worst, c.value);
    pass = pass && c.pass;
  }
  pass = pass && b.seconds() < budget;
  report(2, "class-g-certificates", pass, b.seconds(), budget,
         "3 bundle metrics x 2 manifolds, worst certificate defect = " +
             num(worst) + " (tol 1e-12; |alpha|_g tol 1e-10)");
}

// --- 3: Lorentz operator identities -----------------------------------------

void criterion_lorentz() {
  const Budget b;
  const double budget = 2.0;
  Rng rng(17);
  VerifyResult out;
  for (const char* key : {"t3-standard", "s3-standard"}) {
    const MagneticSystem sys = standard_system(key);
    std::vector<ChartPoint> pts;
    if (const auto* sm =
            dynamic_cast<const SphereManifold*>(sys.manifold.get()))
      pts = sphere_points(*sm, 100, rng);
    else
      pts = torus_grid(5);
    detail::lorentz_checks(sys, pts, rng, out);
  }
  double worst = 0.0;
  bool pass = true;
  for (const auto& c : out.checks) {
    worst = std::max(worst, c.value);
    pass = pass && c.pass;
  }
  pass = pass && b.seconds() < budget;
  report(3, "lorentz-identities", pass, b.seconds(), budget,
         "defining identity / skew-adjointness / Reeb kernel, worst = " +
             num(worst) + " over 100 random (q,u,v) per manifold (tol 1e-10)");
}

// --- 4: Reeb orbits are magnetic geodesics at every speed -------------------

ClosedOrbit detect_reeb_orbit(const MagneticSystem& sys, double scan_time) {
  const ContactManifold& m = *sys.manifold;
  IntegratorConfig icfg;
  icfg.dt = 1e-3;
  icfg.max_time = scan_time;
  const ChartPoint seed = detail::default_orbit_seed(m);
  Trajectory traj = integrate_reeb(m, seed, icfg);
  const auto hit = detect_period(m, traj, 1e-6);
  if (!hit) throw verification_error("no closed Reeb orbit found", 0.0);
  ClosedOrbit o;
  o.kind = "reeb";
  o.init = traj.samples.front().state;
  o.period = hit->period;
  o.closure_residual = hit->closure_residual;
  o.energy = kinetic_energy(sys, o.init);
  o.cycle = std::move(traj);
  return o;
}

void criterion_speed_sweep() {
  const Budget b;
  const double budget = 60.0;
  double worst_res = 0.0, worst_close = 0.0;
  ClosedOrbit sphere_speed2;
  MagneticSystem sphere_sys;

  for (const char* key : {"t3-standard", "s3-standard"}) {
    const MagneticSystem sys = standard_system(key);
    const ClosedOrbit reeb = detect_reeb_orbit(sys, 8.0);
    ReverifyOptions rv;
    rv.integrator.dt = 1e-3;
    for (double s : {0.5, 1.0, 2.0, 4.0}) {
      const ClosedOrbit mapped =
          reparametrize_to_energy(sys, reeb, 0.5 * s * s, rv);
      worst_res = std::max(worst_res, magnetic_residual(sys, mapped.cycle));
      worst_close = std::max(worst_close, mapped.closure_residual);
      if (std::string(key) == "s3-standard" && s == 2.0) {
        sphere_speed2 = mapped;
        sphere_sys = sys;
      }
    }
  }

  // integrator order on the curved chart geometry: endpoint error against a
  // dt = 1e-3 reference must drop ~2^4 when dt halves from 8e-3 to 4e-3
  auto endpoint = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.max_time = sphere_speed2.period;
    return integrate_magnetic(sphere_sys, sphere_speed2.init, cfg)
        .samples.back()
        .state;
  };
  const TangentState ref = endpoint(1e-3);
  const double e8 = tm_distance(*sphere_sys.manifold, endpoint(8e-3), ref);
  const double e4 = tm_distance(*sphere_sys.manifold, endpoint(4e-3), ref);
  const double ratio = e8 / e4;

  const bool pass = worst_res < 1e-5 && worst_close < 1e-6 && ratio > 8.0 &&
                    ratio < 32.0 && b.seconds() < budget;
  report(4, "magnetic-geodesics-all-speeds", pass, b.seconds(), budget,
         "speeds {0.5,1,2,4} on both manifolds: residual " + num(worst_res) +
             " (tol 1e-5), closure " + num(worst_close) +
             " (tol 1e-6), dt-halving error ratio " + num(ratio) +
             " (band [8,32])");
}

// --- 5: long-time energy conservation ---------------------------------------

void criterion_energy_drift() {
  const Budget b;
  const double budget = 120.0;
  const MagneticSystem sys = standard_system("t3-standard");
  Rng rng(23);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 100.0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double kappa = (i % 2 == 0) ? 0.5 : 2.0;
    TangentState s0;
    s0.q = make_point(
        0, {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0),
            rng.uniform(0.0, 1.0)});
    Vec v = rng.vector(3);
    const double e = 0.5 * v.dot(sys.metric.g(s0.q) * v);
    s0.v = v * std::sqrt(kappa / e);
    const Trajectory traj = integrate_magnetic(sys, s0, cfg);
    worst = std::max(worst, traj.max_energy_drift);
  }
  const bool pass = worst < 1e-6 && b.seconds() < budget;
  report(5, "energy-conservation-T100", pass, b.seconds(), budget,
         "50 random states, kappa in {0.5, 2}, T = 100: max relative drift " +
             num(worst) + " (tol 1e-6)");
}

// --- 6: critical-value bracket on both manifolds ----------------------------

void criterion_mane(const std::string& data_dir) {
  const Budget b;
  const double budget = 300.0;
  bool pass = true;
  std::ostringstream detail_line;
  for (const char* cfg_name : {"t3_standard.json", "s3_standard.json"}) {
    const ExperimentConfig cfg =
        load_config_file(data_dir + "/" + cfg_name);
    const ManeRun run = run_mane(cfg, 1);
    const double lo = run.bracket.lower, hi = run.bracket.upper;
    const bool contains = lo <= 0.5 + 1e-8 && hi >= 0.5 - 1e-8;
    const bool tight = (hi - lo) < 2e-4 && std::abs(lo - 0.5) < 1e-8;

    // the zero function alone certifies sup_q H(q, 0) = 1/2 exactly
    const MagneticSystem sys = cfg.build_system();
    Rng rng(1);
    const auto [grid, refined] =
        build_mane_grids(*sys.manifold, cfg.mane.grid_resolution, rng);
    const FunctionBasis basis(cfg.mane.basis_kind, cfg.mane.degree,
                              sys.manifold);
    const double f0 = detail::hard_max(
        sys, basis, Eigen::VectorXd::Zero(basis.n_coeffs()), refined);
    const bool zero_ok = std::abs(f0 - 0.5) < 1e-9;

    pass = pass && contains && tight && zero_ok;
    detail_line << cfg.manifold_key << " [" << num(lo) << ", " << num(hi)
                << "] ";
  }
  pass = pass && b.seconds() < budget;
  report(6, "critical-value-bracket", pass, b.seconds(), budget,
         detail_line.str() +
             "(must contain 1/2 within 1e-8, width < 2e-4, f=0 bound = 1/2 "
             "within 1e-9)");
}

// --- 7: orbit census and growth verdict --------------------------------------

void criterion_orbit_census(const std::string& data_dir) {
  const Budget b;
  const double budget = 60.0;

  // torus: three seed heights produce three distinct geometric classes and
  // the counting inequality holds at every requested energy
  const ExperimentConfig cfg =
      load_config_file(data_dir + "/t3_standard.json");
  const GrowthReport rep = run_growth(cfg);
  bool pass = rep.reeb_count == 3 && rep.inequality_holds;
  for (int c : rep.magnetic_counts) pass = pass && c >= rep.reeb_count;

  // sphere: every Hopf fiber is closed with period exactly 2*pi
  const auto s3 = make_manifold("s3-standard");
  const auto* sm = dynamic_cast<const SphereManifold*>(s3.get());
  Rng rng(29);
  double worst_period = 0.0;
  int found = 0;
  for (const ChartPoint& seed : sphere_points(*sm, 10, rng)) {
    IntegratorConfig icfg;
    icfg.dt = 1e-3;
    icfg.max_time = 7.0;
    const Trajectory traj = integrate_reeb(*s3, seed, icfg);
    const auto hit = detect_period(*s3, traj, 1e-5);
    if (!hit) continue;
    ++found;
    worst_period = std::max(worst_period, std::abs(hit->period - 2.0 * M_PI));
  }
  pass = pass && found == 10 && worst_period < 1e-5 && b.seconds() < budget;
  report(7, "orbit-census-and-growth", pass, b.seconds(), budget,
         "torus classes = " + std::to_string(rep.reeb_count) +
             " (want 3), verdict holds = " +
             (rep.inequality_holds ? "yes" : "no") + "; sphere fibers " +
             std::to_string(found) + "/10 closed, max |T - 2pi| = " +
             num(worst_period) + " (tol 1e-5)");
}

// --- 8: negative control ------------------------------------------------------

void criterion_negative_control(const std::string& data_dir) {
  const Budget b;
  const double budget = 10.0;
  const ExperimentConfig cfg =
      load_config_file(data_dir + "/t3_perturbed.json");
  const MagneticSystem sys = cfg.build_system();

  IntegratorConfig icfg;
  icfg.dt = 1e-3;
  icfg.max_time = 2.0;
  const ChartPoint seed = make_point(0, {0.0, 0.0, 0.125});
  Trajectory traj = integrate_reeb(*sys.manifold, seed, icfg);
  // re-tag samples with the Reeb velocity so the residual measures the
  // magnetic defect of the Reeb curve under the broken metric
  const double res = magnetic_residual(sys, traj);

  const bool pass = sys.metric.provenance() != "class-G" && res > 1e-3 &&
                    b.seconds() < budget;
  report(8, "negative-control-detects-breakage", pass, b.seconds(), budget,
         "perturbed (non-class-G) metric: Reeb curve magnetic residual " +
             num(res) + " (must exceed 1e-3)");
}

// --- 9: bitwise deterministic reports -----------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_determinism(const std::string& cli,
                           const std::string& data_dir) {
  const Budget b;
  const double budget = 60.0;
  const fs::path out1 = fs::temp_directory_path() / "contactlab_accept_1";
  const fs::path out2 = fs::temp_directory_path() / "contactlab_accept_2";
  fs::remove_all(out1);
  fs::remove_all(out2);

  auto run = [&](const fs::path& out) {
    const std::string cmd = "\"" + cli + "\" --config \"" + data_dir +
                            "/t3_standard.json\" --out \"" + out.string() +
                            "\" --seed 7 verify > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int rc1 = run(out1);
  const int rc2 = run(out2);
  const std::string a = slurp(out1 / "verify.json");
  const std::string c = slurp(out2 / "verify.json");

  const bool pass = rc1 == 0 && rc2 == 0 && !a.empty() && a == c &&
                    b.seconds() < budget;
  report(9, "deterministic-reports", pass, b.seconds(), budget,
         "two seeded CLI verify runs: exit codes " + std::to_string(rc1) +
             "/" + std::to_string(rc2) + ", verify.json byte-identical = " +
             (a == c && !a.empty() ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <cli-binary> <data-dir>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const std::string data_dir = argv[2];

  try {
    criterion_reeb_identities();
    criterion_class_g();
    criterion_lorentz();
    criterion_speed_sweep();
    criterion_energy_drift();
    criterion_mane(data_dir);
    criterion_orbit_census(data_dir);
    criterion_negative_control(data_dir);
    criterion_determinism(cli, data_dir);
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }

  std::printf("%d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
