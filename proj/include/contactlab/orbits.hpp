#pragma once

#include <map>
#include <optional>

#include "contactlab/integrate.hpp"

namespace contactlab {

/// Distance on TM: chart-coordinate Euclidean distance on (q, v), wrap and
/// chart-transition aware. b is re-expressed in a's chart before comparing.
inline double tm_distance(const ContactManifold& m, const TangentState& a,
                          const TangentState& b) {
  try {
    Vec vb = b.v;
    const ChartPoint qb = m.to_chart(b.q, a.q.chart_id, &vb);
    const Vec dq = m.coord_delta(a.q.coords, qb.coords, a.q.chart_id);
    return std::sqrt(dq.squaredNorm() + (a.v - vb).squaredNorm());
  } catch (const degeneracy_error&) {
    // b sits at the projection pole of a's chart; compare in b's chart
    Vec va = a.v;
    const ChartPoint qa = m.to_chart(a.q, b.q.chart_id, &va);
    const Vec dq = m.coord_delta(qa.coords, b.q.coords, b.q.chart_id);
    return std::sqrt(dq.squaredNorm() + (va - b.v).squaredNorm());
  }
}

/// Cubic-Hermite interpolation of a uniformly sampled trajectory. Wrap and
/// chart mismatches between the bracketing samples are resolved by working in
/// the left sample's chart.
inline TangentState interpolate(const ContactManifold& m,
                                const Trajectory& traj, double t) {
  if (traj.samples.size() < 2)
    throw input_error("interpolate: trajectory too short");
  const double t0 = traj.samples.front().t;
  const double h = traj.dt;
  const std::size_t n = traj.samples.size();
  std::size_t i = static_cast<std::size_t>(
      std::clamp(std::floor((t - t0) / h), 0.0, static_cast<double>(n - 2)));
  const auto& a = traj.samples[i];
  const auto& b = traj.samples[i + 1];
  Vec v1 = b.state.v;
  const ChartPoint qb = m.to_chart(b.state.q, a.state.q.chart_id, &v1);
  const Vec delta =
      m.coord_delta(qb.coords, a.state.q.coords, a.state.q.chart_id);
  const Vec x0 = a.state.q.coords;
  const Vec x1 = x0 + delta;
  const Vec& v0 = a.state.v;
  const double hh = b.t - a.t;
  const double u = (t - a.t) / hh;
  const double u2 = u * u, u3 = u2 * u;
  TangentState out;
  out.q.chart_id = a.state.q.chart_id;
  out.q.coords = (2 * u3 - 3 * u2 + 1) * x0 + (u3 - 2 * u2 + u) * hh * v0 +
                 (-2 * u3 + 3 * u2) * x1 + (u3 - u2) * hh * v1;
  out.v = ((6 * u2 - 6 * u) * x0 + (3 * u2 - 4 * u + 1) * hh * v0 +
           (-6 * u2 + 6 * u) * x1 + (3 * u2 - 2 * u) * hh * v1) /
          hh;
  return out;
}

namespace detail {

/// Golden-section minimization of the return distance on [lo, hi].
inline std::pair<double, double> golden_min(
    const std::function<double(double)>& f, double lo, double hi) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 120 && (b - a) > 1e-13; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace detail

struct PeriodResult {
  double period = 0.0;
  double closure_residual = 0.0;
};

/// Scans the return distance d(t) = dist_TM(gamma(t), gamma(0)) for local
/// minima, refines candidates by golden-section on the interpolated
/// trajectory, and returns the smallest refined period with residual < tol.
/// Absence of a period is a valid answer. The sampled distance near a true
/// closure can be as large as the phase-space speed times dt, so the
/// candidate gate combines 10*tol with a sampling slack.
inline std::optional<PeriodResult> detect_period(const ContactManifold& m,
                                                 const Trajectory& traj,
                                                 double tol) {
  const std::size_t n = traj.samples.size();
  if (n < 8) throw input_error("detect_period: trajectory too short");
  const TangentState& s0 = traj.samples.front().state;

  double vmax = 0.0;
  for (const auto& s : traj.samples) vmax = std::max(vmax, s.state.v.norm());
  const double gate = std::max(10.0 * tol, 3.0 * traj.dt * (1.0 + vmax));

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = tm_distance(m, traj.samples[i].state, s0);

  auto dist_at = [&](double t) {
    return tm_distance(m, interpolate(m, traj, t), s0);
  };

  bool escaped = false;  // gamma must leave a neighborhood of s0 first
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i] > 4.0 * gate) escaped = true;
    if (!escaped) continue;
    if (d[i] <= d[i - 1] && d[i] <= d[i + 1] && d[i] < gate) {
      const auto [t_star, d_star] = detail::golden_min(
          dist_at, traj.samples[i - 1].t, traj.samples[i + 1].t);
      if (d_star < tol) return PeriodResult{t_star, d_star};
    }
  }
  return std::nullopt;
}

/// A detected periodic orbit with one sampled cycle kept for matching.
struct ClosedOrbit {
  TangentState init;
  double period = 0.0;
  double energy = 0.0;
  double closure_residual = 0.0;
  std::string kind = "reeb";  // "reeb" | "magnetic"
  bool prime = true;
  Trajectory cycle;
};

/// True when no divisor period T/k (k >= 2) also closes within tol.
inline bool is_prime_period(const ContactManifold& m, const Trajectory& traj,
                            double period, double tol, int k_max = 8) {
  const TangentState& s0 = traj.samples.front().state;
  auto dist_at = [&](double t) {
    return tm_distance(m, interpolate(m, traj, t), s0);
  };
  for (int k = 2; k <= k_max; ++k) {
    const double tk = period / k;
    if (tk < 4.0 * traj.dt) break;
    const auto [t_star, d_star] =
        detail::golden_min(dist_at, tk - 2.0 * traj.dt, tk + 2.0 * traj.dt);
    (void)t_star;
    if (d_star < tol) return false;
  }
  return true;
}

/// Census of geometric equivalence classes.
struct OrbitCensus {
  std::vector<ClosedOrbit> orbits;
  std::vector<int> equivalence_class;       // per orbit
  std::vector<std::size_t> representatives;  // orbit index per class
  double t_max = std::numeric_limits<double>::infinity();
  double kappa = std::numeric_limits<double>::quiet_NaN();

  int class_count() const { return static_cast<int>(representatives.size()); }
};

namespace detail {

/// Shift-minimized TM distance between an orbit's initial state and a
/// reference cycle: min over the cycle's samples, refined around the best.
inline double shift_distance(const ContactManifold& m, const TangentState& s,
                             const Trajectory& cycle) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < cycle.samples.size(); ++i) {
    const double di = tm_distance(m, cycle.samples[i].state, s);
    if (di < best) {
      best = di;
      best_i = i;
    }
  }
  const double t_best = cycle.samples[best_i].t;
  const double lo = std::max(cycle.samples.front().t, t_best - cycle.dt);
  const double hi = std::min(cycle.samples.back().t, t_best + cycle.dt);
  if (hi > lo) {
    auto f = [&](double t) { return tm_distance(m, interpolate(m, cycle, t), s); };
    best = std::min(best, golden_min(f, lo, hi).second);
  }
  return best;
}

}  // namespace detail

/// Greedy clustering under the shift-minimized TM distance. Non-prime orbits
/// are filtered out first; magnetic inputs must share their energy level.
inline OrbitCensus dedup_geometric(const ContactManifold& m,
                                   const std::vector<ClosedOrbit>& orbits,
                                   double tol) {
  OrbitCensus census;
  for (const auto& o : orbits) {
    if (!o.prime) continue;
    census.orbits.push_back(o);
  }
  if (!census.orbits.empty()) {
    const std::string& kind = census.orbits.front().kind;
    const double e0 = census.orbits.front().energy;
    for (const auto& o : census.orbits) {
      if (o.kind != kind)
        throw input_error("dedup_geometric: mixed orbit kinds");
      if (kind == "magnetic" &&
          std::abs(o.energy - e0) > 1e-6 * std::max(1.0, std::abs(e0)))
        throw input_error("dedup_geometric: mixed energy levels");
    }
    if (kind == "magnetic") census.kappa = e0;
  }
  for (std::size_t i = 0; i < census.orbits.size(); ++i) {
    int assigned = -1;
    for (std::size_t c = 0; c < census.representatives.size(); ++c) {
      const ClosedOrbit& rep = census.orbits[census.representatives[c]];
      if (detail::shift_distance(m, census.orbits[i].init, rep.cycle) < tol) {
        assigned = static_cast<int>(c);
        break;
      }
    }
    if (assigned < 0) {
      assigned = static_cast<int>(census.representatives.size());
      census.representatives.push_back(i);
    }
    census.equivalence_class.push_back(assigned);
  }
  return census;
}

struct ReverifyOptions {
  IntegratorConfig integrator;       // dt is adjusted to divide the period
  double closure_tol = 1e-6;
  double residual_bound = 1e-5;
};

/// Maps a closed Reeb orbit to the magnetic geodesic at energy kappa: speed
/// s = sqrt(2 kappa), initial velocity s R, period T/s. The result is
/// re-verified by integration plus the finite-difference residual before it
/// is accepted.
inline ClosedOrbit reparametrize_to_energy(const MagneticSystem& sys,
                                           const ClosedOrbit& orbit,
                                           double kappa,
                                           const ReverifyOptions& opt) {
  if (!(kappa > 0.0))
    throw input_error("reparametrize_to_energy: kappa must be positive");
  if (orbit.kind != "reeb")
    throw input_error("reparametrize_to_energy: source orbit must be a Reeb "
                      "orbit");
  if (!(orbit.closure_residual < opt.closure_tol))
    throw input_error("reparametrize_to_energy: source orbit does not close");

  const double s = std::sqrt(2.0 * kappa);
  ClosedOrbit out;
  out.kind = "magnetic";
  out.prime = orbit.prime;
  out.init.q = orbit.init.q;
  out.init.v = s * orbit.init.v;
  out.period = orbit.period / s;

  IntegratorConfig cfg = opt.integrator;
  cfg.max_time = out.period;
  out.cycle = integrate_magnetic(sys, out.init, cfg);
  out.energy = kinetic_energy(sys, out.init);
  out.closure_residual =
      tm_distance(*sys.manifold, out.cycle.samples.back().state, out.init);
  const double residual = magnetic_residual(sys, out.cycle);

  if (!(out.closure_residual < opt.closure_tol))
    throw verification_error(
        "mapped orbit fails to close (residual " +
            std::to_string(out.closure_residual) + ")",
        out.closure_residual);
  if (!(residual < opt.residual_bound))
    throw verification_error("mapped orbit magnetic residual " +
                                 std::to_string(residual) + " above bound",
                             residual);
  return out;
}

struct GrowthOptions {
  IntegratorConfig integrator;
  double closure_tol = 1e-6;
  double match_tol = 1e-3;
  double residual_bound = 1e-5;
};

struct GrowthReport {
  double t_max = 0.0;
  OrbitCensus reeb_census;
  int reeb_count = 0;  // classes with period < t_max
  std::vector<double> kappas;
  std::vector<OrbitCensus> magnetic_censuses;  // parallel to kappas
  std::vector<int> magnetic_counts;            // classes with g-length < t_max
  bool inequality_holds = false;
  // Orbit continua (Hopf fibers, rational-slope tori) make the true
  // geometric count infinite; the census counts detected representatives.
  std::string counting_note =
      "counts are seeded lower proxies; orbit continua are counted by "
      "detected representatives after dedup";
};

/// Detects Reeb orbits from the seeds, maps each class representative to
/// every requested energy level, re-verifies, and assembles the counting
/// report with the inequality verdict. Requires a class-G system; any mapped
/// orbit failing re-verification fails the whole report.
inline GrowthReport growth_report(const MagneticSystem& sys,
                                  const std::vector<ChartPoint>& seeds,
                                  double t_max,
                                  const std::vector<double>& kappas,
                                  const GrowthOptions& opt) {
  if (sys.metric.provenance() != "class-G")
    throw input_error("growth_report: requires a class-G metric");
  const ContactManifold& m = *sys.manifold;

  GrowthReport report;
  report.t_max = t_max;
  report.kappas = kappas;

  std::vector<ClosedOrbit> reeb_orbits;
  IntegratorConfig cfg = opt.integrator;
  cfg.max_time = t_max + std::max(0.2, 20.0 * cfg.dt);
  for (const ChartPoint& seed : seeds) {
    ChartPoint q0 = seed;
    m.normalize(q0);
    Trajectory traj = integrate_reeb(m, q0, cfg);
    const auto hit = detect_period(m, traj, opt.closure_tol);
    if (!hit || hit->period >= t_max) continue;
    ClosedOrbit orbit;
    orbit.kind = "reeb";
    orbit.init = traj.samples.front().state;
    orbit.period = hit->period;
    orbit.closure_residual = hit->closure_residual;
    orbit.energy = kinetic_energy(sys, orbit.init);
    orbit.prime = is_prime_period(m, traj, hit->period, opt.closure_tol);
    orbit.cycle = traj;
    reeb_orbits.push_back(std::move(orbit));
  }
  report.reeb_census = dedup_geometric(m, reeb_orbits, opt.match_tol);
  report.reeb_census.t_max = t_max;
  report.reeb_count = report.reeb_census.class_count();

  ReverifyOptions rv;
  rv.integrator = opt.integrator;
  rv.closure_tol = opt.closure_tol;
  rv.residual_bound = opt.residual_bound;

  bool holds = true;
  for (double kappa : kappas) {
    std::vector<ClosedOrbit> magnetic;
    for (std::size_t rep : report.reeb_census.representatives) {
      const ClosedOrbit& r = report.reeb_census.orbits[rep];
      ClosedOrbit mapped = reparametrize_to_energy(sys, r, kappa, rv);
      // g-length of the mapped orbit: speed * period = the Reeb period
      const double length = std::sqrt(2.0 * kappa) * mapped.period;
      if (length < t_max) magnetic.push_back(std::move(mapped));
    }
    OrbitCensus census = dedup_geometric(m, magnetic, opt.match_tol);
    census.t_max = t_max;
    census.kappa = kappa;
    report.magnetic_counts.push_back(census.class_count());
    report.magnetic_censuses.push_back(std::move(census));
    if (report.magnetic_counts.back() < report.reeb_count) holds = false;
  }
  report.inequality_holds = holds;
  return report;
}

}  // namespace contactlab
