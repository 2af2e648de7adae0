#pragma once

#include <cmath>
#include <functional>

#include "contactlab/magnetic.hpp"

namespace contactlab {

struct IntegratorConfig {
  std::string scheme = "rk4";  // "rk4" | "rkf45"
  double dt = 1e-3;
  double tol = 1e-10;          // adaptive local error tolerance
  double max_time = 10.0;
  double drift_bound = 1e-6;   // relative energy drift limit

  void validate() const {
    if (!(dt > 0.0)) throw input_error("integrator: dt must be positive");
    if (!(tol > 0.0)) throw input_error("integrator: tol must be positive");
    if (!(max_time > 0.0))
      throw input_error("integrator: max_time must be positive");
    if (scheme != "rk4" && scheme != "rkf45")
      throw input_error("integrator: unknown scheme '" + scheme + "'");
  }
};

namespace detail {

/// Phase-space state within one chart.
struct PhaseState {
  Vec q;
  Vec v;
};

template <typename Rhs>
PhaseState rk4_step(const Rhs& rhs, int chart_id, const PhaseState& y,
                    double h) {
  const auto [k1q, k1v] = rhs(chart_id, y.q, y.v);
  const auto [k2q, k2v] =
      rhs(chart_id, (y.q + 0.5 * h * k1q).eval(), (y.v + 0.5 * h * k1v).eval());
  const auto [k3q, k3v] =
      rhs(chart_id, (y.q + 0.5 * h * k2q).eval(), (y.v + 0.5 * h * k2v).eval());
  const auto [k4q, k4v] =
      rhs(chart_id, (y.q + h * k3q).eval(), (y.v + h * k3v).eval());
  PhaseState out;
  out.q = y.q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
  out.v = y.v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

// Fehlberg 4(5) tableau.
template <typename Rhs>
PhaseState rkf45_step(const Rhs& rhs, int chart_id, const PhaseState& y,
                      double h, double& err) {
  const auto [k1q, k1v] = rhs(chart_id, y.q, y.v);
  const auto [k2q, k2v] = rhs(chart_id, (y.q + h * (0.25 * k1q)).eval(),
                              (y.v + h * (0.25 * k1v)).eval());
  const auto [k3q, k3v] =
      rhs(chart_id, (y.q + h * (3.0 / 32 * k1q + 9.0 / 32 * k2q)).eval(),
          (y.v + h * (3.0 / 32 * k1v + 9.0 / 32 * k2v)).eval());
  const auto [k4q, k4v] =
      rhs(chart_id,
          (y.q + h * (1932.0 / 2197 * k1q - 7200.0 / 2197 * k2q +
                      7296.0 / 2197 * k3q))
              .eval(),
          (y.v + h * (1932.0 / 2197 * k1v - 7200.0 / 2197 * k2v +
                      7296.0 / 2197 * k3v))
              .eval());
  const auto [k5q, k5v] =
      rhs(chart_id,
          (y.q + h * (439.0 / 216 * k1q - 8.0 * k2q + 3680.0 / 513 * k3q -
                      845.0 / 4104 * k4q))
              .eval(),
          (y.v + h * (439.0 / 216 * k1v - 8.0 * k2v + 3680.0 / 513 * k3v -
                      845.0 / 4104 * k4v))
              .eval());
  const auto [k6q, k6v] =
      rhs(chart_id,
          (y.q + h * (-8.0 / 27 * k1q + 2.0 * k2q - 3544.0 / 2565 * k3q +
                      1859.0 / 4104 * k4q - 11.0 / 40 * k5q))
              .eval(),
          (y.v + h * (-8.0 / 27 * k1v + 2.0 * k2v - 3544.0 / 2565 * k3v +
                      1859.0 / 4104 * k4v - 11.0 / 40 * k5v))
              .eval());
  PhaseState out;
  out.q = y.q + h * (16.0 / 135 * k1q + 6656.0 / 12825 * k3q +
                     28561.0 / 56430 * k4q - 9.0 / 50 * k5q + 2.0 / 55 * k6q);
  out.v = y.v + h * (16.0 / 135 * k1v + 6656.0 / 12825 * k3v +
                     28561.0 / 56430 * k4v - 9.0 / 50 * k5v + 2.0 / 55 * k6v);
  const Vec eq = h * (1.0 / 360 * k1q - 128.0 / 4275 * k3q -
                      2197.0 / 75240 * k4q + 1.0 / 50 * k5q + 2.0 / 55 * k6q);
  const Vec ev = h * (1.0 / 360 * k1v - 128.0 / 4275 * k3v -
                      2197.0 / 75240 * k4v + 1.0 / 50 * k5v + 2.0 / 55 * k6v);
  err = std::max(eq.lpNorm<Eigen::Infinity>(), ev.lpNorm<Eigen::Infinity>());
  return out;
}

/// Shared driver: fixed-step RK4 (dt adjusted to divide max_time exactly, so
/// samples stay uniform and the endpoint lands on max_time) or adaptive
/// RKF45. Chart transitions are applied between steps when the point leaves
/// the chart's safe region, and logged. Energy drift is monitored per sample,
/// never projected away.
template <typename Rhs, typename EnergyFn>
Trajectory integrate_flow(const ContactManifold& m, const TangentState& s0,
                          const IntegratorConfig& cfg, const Rhs& rhs,
                          const EnergyFn& energy, bool track_energy) {
  cfg.validate();
  Trajectory traj;
  traj.scheme = cfg.scheme;
  traj.dt = cfg.dt;

  int chart = s0.q.chart_id;
  PhaseState y{s0.q.coords, s0.v};
  double t = 0.0;

  const double e0 = track_energy ? energy(chart, y.q, y.v) : 0.0;
  traj.energy_start = track_energy
                          ? e0
                          : std::numeric_limits<double>::quiet_NaN();

  auto store = [&](double time) {
    TrajectorySample s;
    s.t = time;
    s.state.q.chart_id = chart;
    s.state.q.coords = y.q;
    m.normalize(s.state.q);
    s.state.v = y.v;
    if (s.state.q.chart_id != chart) {
      // normalization crossed the chart switch: redo through transition so
      // the velocity follows
      s.state.q.chart_id = chart;
      s.state.q.coords = y.q;
      m.transition(s.state.q, &s.state.v);
    }
    traj.samples.push_back(std::move(s));
    if (track_energy && e0 != 0.0) {
      const double e = energy(traj.samples.back().state.q.chart_id,
                              traj.samples.back().state.q.coords,
                              traj.samples.back().state.v);
      traj.max_energy_drift =
          std::max(traj.max_energy_drift, std::abs(e - e0) / std::abs(e0));
    }
  };

  auto maybe_transition = [&](double time) {
    ChartPoint p;
    p.chart_id = chart;
    p.coords = y.q;
    if (m.needs_transition(p)) {
      ChartTransitionEvent ev;
      ev.t = time;
      ev.from_chart = chart;
      m.transition(p, &y.v);
      y.q = p.coords;
      chart = p.chart_id;
      ev.to_chart = chart;
      ev.sample_index = traj.samples.size();
      traj.transitions.push_back(ev);
    }
  };

  store(0.0);

  if (cfg.scheme == "rk4") {
    const long n =
        std::max<long>(1, std::lround(std::ceil(cfg.max_time / cfg.dt - 1e-9)));
    const double h = cfg.max_time / static_cast<double>(n);
    traj.dt = h;
    traj.samples.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i < n; ++i) {
      y = rk4_step(rhs, chart, y, h);
      t = (i + 1 == n) ? cfg.max_time : (i + 1) * h;
      maybe_transition(t);
      store(t);
    }
  } else {
    double h = cfg.dt;
    while (t < cfg.max_time - 1e-14) {
      h = std::min(h, cfg.max_time - t);
      double err = 0.0;
      PhaseState trial = rkf45_step(rhs, chart, y, h, err);
      if (err <= cfg.tol) {
        y = trial;
        t += h;
        maybe_transition(t);
        store(t);
        h *= std::clamp(0.9 * std::pow(cfg.tol / std::max(err, 1e-300), 0.2),
                        1.0, 4.0);
      } else {
        h *= std::clamp(0.9 * std::pow(cfg.tol / err, 0.25), 0.1, 1.0);
      }
      if (h < 1e-13)
        throw integration_error("rkf45: step size underflow");
    }
  }

  if (track_energy) {
    const auto& last = traj.samples.back().state;
    traj.energy_end = energy(last.q.chart_id, last.q.coords, last.v);
    traj.drift_flagged = traj.max_energy_drift > cfg.drift_bound;
  }
  return traj;
}

}  // namespace detail

/// Integrates the magnetic geodesic flow from (q, v). Energy drift beyond
/// cfg.drift_bound flags the trajectory (never silently discarded).
inline Trajectory integrate_magnetic(const MagneticSystem& sys,
                                     const TangentState& s0,
                                     const IntegratorConfig& cfg) {
  const ContactManifold& m = *sys.manifold;
  auto rhs = [&sys](int chart, const Vec& q, const Vec& v) {
    TangentState s;
    s.q.chart_id = chart;
    s.q.coords = q;
    s.v = v;
    return magnetic_rhs(sys, s);
  };
  auto energy = [&sys](int chart, const Vec& q, const Vec& v) {
    TangentState s;
    s.q.chart_id = chart;
    s.q.coords = q;
    s.v = v;
    return kinetic_energy(sys, s);
  };
  return detail::integrate_flow(m, s0, cfg, rhs, energy, true);
}

/// Integrates the Reeb flow q' = R(q); the stored velocity at each sample is
/// the Reeb vector there.
inline Trajectory integrate_reeb(const ContactManifold& m,
                                 const ChartPoint& q0,
                                 const IntegratorConfig& cfg) {
  auto rhs = [&m](int chart, const Vec& q, const Vec& v) {
    (void)v;
    ChartPoint p;
    p.chart_id = chart;
    p.coords = q;
    Vec R = reeb_vector(m, p);
    return std::pair<Vec, Vec>{R, Vec::Zero(q.size())};
  };
  auto energy = [](int, const Vec&, const Vec&) { return 0.0; };
  TangentState s0;
  s0.q = q0;
  s0.v = reeb_vector(m, q0);
  Trajectory traj = detail::integrate_flow(m, s0, cfg, rhs, energy, false);
  // velocities were carried as dead weight; refresh them to R(q)
  for (auto& s : traj.samples) s.state.v = reeb_vector(m, s.state.q);
  return traj;
}

}  // namespace contactlab
