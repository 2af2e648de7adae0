#pragma once

#include <algorithm>
#include <memory>

#include "contactlab/metric.hpp"
#include "contactlab/trajectory.hpp"

namespace contactlab {

/// The exact magnetic system (M, g, strength * dalpha). Immutable after
/// construction and shareable across concurrent workers.
struct MagneticSystem {
  std::shared_ptr<const ContactManifold> manifold;
  MetricField metric;
  double strength = 1.0;   // scalar multiplier on sigma = dalpha
  double fd_step = kDefaultFdStep;

  Mat sigma(const ChartPoint& q) const {
    return strength * manifold->dalpha(q);
  }
};

/// Lorentz force as a matrix acting on chart velocities: the unique Y with
/// g(Y u, v) = sigma(u, v) for all u, v, i.e. Y = g^{-1} A^T for
/// A(i,j) = sigma(e_i, e_j).
inline Mat lorentz_operator(const MagneticSystem& sys, const ChartPoint& q) {
  const Mat A = sys.sigma(q);
  return sys.metric.g(q).ldlt().solve(A.transpose());
}

/// First-order form of nabla_v v = Y v: returns (v, a) with
/// a^k = -Gamma^k_ij v^i v^j + (Y v)^k.
inline std::pair<Vec, Vec> magnetic_rhs(const MagneticSystem& sys,
                                        const TangentState& s) {
  Vec a = -christoffel_quadratic(sys.metric, s.q, s.v, sys.fd_step);
  if (sys.strength != 0.0) {
    const Mat A = sys.sigma(s.q);
    a += sys.metric.g(s.q).ldlt().solve(A.transpose() * s.v).eval();
  }
  return {s.v, std::move(a)};
}

/// E(q, v) = 1/2 g_q(v, v).
inline double kinetic_energy(const MagneticSystem& sys,
                             const TangentState& s) {
  return 0.5 * s.v.dot(sys.metric.g(s.q) * s.v);
}

/// L(q, v) = 1/2 |v|^2 - alpha_q(v)  (alpha scaled by the field strength, so
/// strength 0 is the free Lagrangian).
inline double lagrangian(const MagneticSystem& sys, const TangentState& s) {
  return kinetic_energy(sys, s) -
         sys.strength * sys.manifold->alpha(s.q).dot(s.v);
}

/// H(q, p) = 1/2 |p + alpha_q|^2_g, the Legendre dual of L.
inline double hamiltonian(const MagneticSystem& sys, const ChartPoint& q,
                          const Vec& p) {
  const Vec w = p + sys.strength * sys.manifold->alpha(q);
  return 0.5 * w.dot(sys.metric.g_inv(q) * w);
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

/// Composite Simpson on uniformly spaced values (3/8 rule absorbs an odd
/// interval count). Error estimate from the Simpson/trapezoid discrepancy.
inline QuadratureResult simpson(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  if (n < 2) return {0.0, 0.0};
  double trap = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < n; ++i) trap += f[i];
  trap *= dt;
  if (n < 4) return {trap, 0.0};

  double s = 0.0;
  std::size_t m = n - 1;           // interval count
  std::size_t start = 0;
  if (m % 2 == 1) {                // Simpson 3/8 on the first three intervals
    s += 3.0 * dt / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
    start = 3;
  }
  for (std::size_t i = start; i + 2 <= n - 1; i += 2)
    s += dt / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  return {s, std::abs(s - trap)};
}

/// Chart-coordinate distance of the base points, wrap/transition aware.
inline double base_distance(const ContactManifold& m, const ChartPoint& a,
                            const ChartPoint& b) {
  ChartPoint bb = m.to_chart(b, a.chart_id, nullptr);
  return m.coord_delta(a.coords, bb.coords, a.chart_id).norm();
}

/// Indices [begin, end) of maximal runs of samples sharing one chart.
inline std::vector<std::pair<std::size_t, std::size_t>> chart_segments(
    const Trajectory& traj) {
  std::vector<std::pair<std::size_t, std::size_t>> seg;
  std::size_t begin = 0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    if (traj.samples[i].state.q.chart_id !=
        traj.samples[i - 1].state.q.chart_id) {
      seg.emplace_back(begin, i);
      begin = i;
    }
  }
  if (begin < traj.samples.size()) seg.emplace_back(begin, traj.samples.size());
  return seg;
}

/// Coordinates of a chart segment unwrapped through minimal-image deltas, so
/// finite differencing never sees a torus wrap.
inline std::vector<Vec> unwrap_segment(const ContactManifold& m,
                                       const Trajectory& traj,
                                       std::size_t begin, std::size_t end) {
  std::vector<Vec> x;
  x.reserve(end - begin);
  x.push_back(traj.samples[begin].state.q.coords);
  for (std::size_t i = begin + 1; i < end; ++i) {
    const Vec d = m.coord_delta(traj.samples[i].state.q.coords,
                                traj.samples[i - 1].state.q.coords,
                                traj.samples[i].state.q.chart_id);
    x.push_back(x.back() + d);
  }
  return x;
}

}  // namespace detail

/// S_L(gamma) = integral of L along a closed loop, by Simpson quadrature on
/// the uniform samples. The loop must close in base-point distance.
inline QuadratureResult action(const MagneticSystem& sys,
                               const Trajectory& loop,
                               double closure_tol = 1e-6) {
  if (loop.samples.size() < 2) throw input_error("action: empty loop");
  const double gap = detail::base_distance(*sys.manifold,
                                           loop.samples.front().state.q,
                                           loop.samples.back().state.q);
  if (!(gap < closure_tol))
    throw input_error("action: loop does not close (gap " +
                      std::to_string(gap) + ")");
  std::vector<double> f;
  f.reserve(loop.samples.size());
  for (const auto& s : loop.samples) f.push_back(lagrangian(sys, s.state));
  const double dt =
      (loop.samples.back().t - loop.samples.front().t) /
      static_cast<double>(loop.samples.size() - 1);
  return detail::simpson(f, dt);
}

/// Max over interior samples of the g-norm of the magnetic-geodesic defect
/// nabla_v v - Y v, with the acceleration taken from 5-point central
/// differences of the sampled velocities (independent of the integrator).
/// Differentiating v once instead of q twice keeps the 1/dt amplification
/// of per-sample roundoff a factor 1/dt lower. Computed per chart segment;
/// segments shorter than 5 samples are skipped, and at least one usable
/// segment is required.
inline double magnetic_residual(const MagneticSystem& sys,
                                const Trajectory& traj) {
  const auto segments = detail::chart_segments(traj);
  double worst = 0.0;
  bool usable = false;
  for (const auto& [begin, end] : segments) {
    if (end - begin < 5) continue;
    usable = true;
    const double dt = (traj.samples[begin + 1].t - traj.samples[begin].t);
    auto vel = [&](std::size_t j) -> const Vec& {
      return traj.samples[begin + j].state.v;
    };
    const std::size_t len = end - begin;
    for (std::size_t j = 2; j + 2 < len; ++j) {
      const Vec acc = (-vel(j + 2) + 8.0 * vel(j + 1) - 8.0 * vel(j - 1) +
                       vel(j - 2)) /
                      (12.0 * dt);
      const TangentState& s = traj.samples[begin + j].state;
      Vec defect =
          acc + christoffel_quadratic(sys.metric, s.q, s.v, sys.fd_step);
      if (sys.strength != 0.0) {
        const Mat A = sys.sigma(s.q);
        defect -= sys.metric.g(s.q).ldlt().solve(A.transpose() * s.v).eval();
      }
      const double r = std::sqrt(defect.dot(sys.metric.g(s.q) * defect));
      worst = std::max(worst, r);
    }
  }
  if (!usable)
    throw input_error("magnetic_residual: no chart segment has >= 5 samples");
  return worst;
}

}  // namespace contactlab
