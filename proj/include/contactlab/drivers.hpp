#pragma once

#include "contactlab/verify.hpp"

namespace contactlab {

/// Closed-loop family for the action-based lower bound: every detected Reeb
/// orbit, its constant-speed reparametrizations, and (on the torus)
/// coordinate circles at sampled z values. Labels are parallel to the loops.
inline std::vector<Trajectory> build_lower_loops(
    const MagneticSystem& sys, const ExperimentConfig& cfg,
    std::vector<std::string>& labels) {
  const ContactManifold& m = *sys.manifold;
  const std::vector<double> speeds{0.25, 0.5, 1.0, 2.0};
  std::vector<Trajectory> loops;
  labels.clear();

  std::vector<ChartPoint> seeds = cfg.seeds;
  if (seeds.empty()) seeds.push_back(detail::default_orbit_seed(m));

  IntegratorConfig icfg = cfg.integrator;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    ChartPoint q0 = seeds[i];
    m.normalize(q0);
    icfg.max_time = 8.0;
    Trajectory scan = integrate_reeb(m, q0, icfg);
    const auto hit = detect_period(m, scan, cfg.closure_tol);
    if (!hit) continue;
    icfg.max_time = hit->period;
    const Trajectory unit = integrate_reeb(m, q0, icfg);
    for (double s : speeds) {
      loops.push_back(resample_speed(unit, s));
      labels.push_back("reeb-loop seed " + std::to_string(i) + " speed " +
                       std::to_string(s));
    }
  }

  if (dynamic_cast<const SphereManifold*>(&m) == nullptr) {
    for (double z : {0.0, 0.125, 0.25, 0.375})
      for (int axis : {0, 1})
        for (double s : speeds) {
          loops.push_back(
              coordinate_circle(make_point(0, {0.0, 0.0, z}), axis, s));
          labels.push_back("circle axis " + std::to_string(axis) + " z " +
                           std::to_string(z) + " speed " + std::to_string(s));
        }
  }
  return loops;
}

/// Evaluation grids for the minimax upper bound: the working grid and its
/// 2x-refined certification grid.
inline std::pair<std::vector<ChartPoint>, std::vector<ChartPoint>>
build_mane_grids(const ContactManifold& m, int resolution, Rng& rng) {
  if (const auto* s3 = dynamic_cast<const SphereManifold*>(&m)) {
    // resolution = quasi-random points per chart
    auto grid = sphere_points(*s3, 2 * resolution, rng);
    auto refined = sphere_points(*s3, 4 * resolution, rng);
    return {std::move(grid), std::move(refined)};
  }
  return {torus_grid(resolution), torus_grid(2 * resolution)};
}

struct ManeRun {
  ManeBracket bracket;
  std::vector<std::string> loop_labels;
};

inline ManeRun run_mane(const ExperimentConfig& cfg, std::uint64_t seed) {
  const MagneticSystem sys = cfg.build_system();
  Rng rng(seed);
  ManeRun run;
  const std::vector<Trajectory> loops =
      build_lower_loops(sys, cfg, run.loop_labels);
  const auto [grid, refined] =
      build_mane_grids(*sys.manifold, cfg.mane.grid_resolution, rng);
  const FunctionBasis basis(cfg.mane.basis_kind, cfg.mane.degree,
                            sys.manifold);
  run.bracket = mane_bracket(sys, basis, loops, grid, refined,
                             cfg.mane.optimizer, cfg.mane.grid_resolution);
  return run;
}

/// Reeb-orbit census from the configured seeds (the `orbits` subcommand).
inline OrbitCensus run_orbit_census(const ExperimentConfig& cfg) {
  const MagneticSystem sys = cfg.build_system();
  const ContactManifold& m = *sys.manifold;
  std::vector<ClosedOrbit> found;
  IntegratorConfig icfg = cfg.integrator;
  icfg.max_time = cfg.t_max + std::max(0.2, 20.0 * icfg.dt);
  for (const ChartPoint& seed : cfg.seeds) {
    ChartPoint q0 = seed;
    m.normalize(q0);
    Trajectory traj = integrate_reeb(m, q0, icfg);
    const auto hit = detect_period(m, traj, cfg.closure_tol);
    if (!hit || hit->period >= cfg.t_max) continue;
    ClosedOrbit o;
    o.kind = "reeb";
    o.init = traj.samples.front().state;
    o.period = hit->period;
    o.closure_residual = hit->closure_residual;
    o.energy = kinetic_energy(sys, o.init);
    o.prime = is_prime_period(m, traj, hit->period, cfg.closure_tol);
    o.cycle = traj;
    found.push_back(std::move(o));
  }
  OrbitCensus census = dedup_geometric(m, found, cfg.match_tol);
  census.t_max = cfg.t_max;
  return census;
}

inline GrowthReport run_growth(const ExperimentConfig& cfg) {
  const MagneticSystem sys = cfg.build_system();
  GrowthOptions opt;
  opt.integrator = cfg.integrator;
  opt.closure_tol = cfg.closure_tol;
  opt.match_tol = cfg.match_tol;
  opt.residual_bound = cfg.residual_bound;
  return growth_report(sys, cfg.seeds, cfg.t_max, cfg.kappas, opt);
}

inline Trajectory run_flow(const ExperimentConfig& cfg) {
  const MagneticSystem sys = cfg.build_system();
  IntegratorConfig icfg = cfg.integrator;
  icfg.max_time = cfg.flow_time;
  if (cfg.flow_reeb) return integrate_reeb(*sys.manifold, cfg.flow_initial.q, icfg);
  return integrate_magnetic(sys, cfg.flow_initial, icfg);
}

}  // namespace contactlab
