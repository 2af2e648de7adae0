#include <gtest/gtest.h>

#include <cmath>

#include "contactlab/integrate.hpp"
#include "contactlab/metric.hpp"
#include "oracles.hpp"

namespace contactlab {
namespace {

MagneticSystem torus_system() {
  MagneticSystem sys;
  sys.manifold = make_manifold("t3-standard");
  sys.metric = extend_metric(sys.manifold, bundle_identity(2));
  sys.strength = 1.0;
  return sys;
}

MagneticSystem sphere_system() {
  MagneticSystem sys;
  sys.manifold = make_manifold("s3-standard");
  sys.metric = extend_metric(sys.manifold, bundle_identity(2));
  sys.strength = 1.0;
  return sys;
}

TEST(Config, ValidateRejectsBadFields) {
  IntegratorConfig c;
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), input_error);
  c = IntegratorConfig{};
  c.tol = -1.0;
  EXPECT_THROW(c.validate(), input_error);
  c = IntegratorConfig{};
  c.max_time = 0.0;
  EXPECT_THROW(c.validate(), input_error);
  c = IntegratorConfig{};
  c.scheme = "euler";
  EXPECT_THROW(c.validate(), input_error);
  EXPECT_NO_THROW(IntegratorConfig{}.validate());
}

TEST(Driver, StepCountDividesMaxTimeExactly) {
  // dt = 0.3 does not divide max_time = 1.0; the driver shrinks it to 0.25
  const MagneticSystem sys = torus_system();
  IntegratorConfig cfg;
  cfg.dt = 0.3;
  cfg.max_time = 1.0;
  const Trajectory traj =
      integrate_reeb(*sys.manifold, make_point(0, {0, 0, 0}), cfg);
  ASSERT_EQ(traj.samples.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.dt, 0.25);
  EXPECT_DOUBLE_EQ(traj.samples.back().t, 1.0);
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    EXPECT_NEAR(traj.samples[i].t - traj.samples[i - 1].t, traj.dt, 1e-15);
}

TEST(Driver, ReebFlowOnTorusMatchesClosedForm) {
  // at z = 0 the Reeb field is (1, 0, 0): the flow is a straight unit-speed
  // line in x, wrapped into [0, 1)
  const MagneticSystem sys = torus_system();
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.max_time = 2.5;
  const Trajectory traj =
      integrate_reeb(*sys.manifold, make_point(0, {0.25, 0.5, 0.0}), cfg);
  const auto& last = traj.samples.back().state;
  EXPECT_NEAR(last.q.coords[0], 0.75, 1e-12);  // 0.25 + 2.5 mod 1
  EXPECT_NEAR(last.q.coords[1], 0.5, 1e-12);
  EXPECT_NEAR(last.q.coords[2], 0.0, 1e-12);
}

TEST(Driver, MagneticFlowConservesEnergyOnTorus) {
  const MagneticSystem sys = torus_system();
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 10.0;
  TangentState s0;
  s0.q = make_point(0, {0.1, 0.2, 0.3});
  s0.v = Vec::Zero(3);
  s0.v << 0.4, -0.3, 0.5;
  const Trajectory traj = integrate_magnetic(sys, s0, cfg);
  EXPECT_LT(traj.max_energy_drift, 1e-10);
  EXPECT_FALSE(traj.drift_flagged);
  EXPECT_NEAR(traj.energy_start, kinetic_energy(sys, s0), 1e-15);
  EXPECT_NEAR(traj.energy_end, traj.energy_start,
              std::abs(traj.energy_start) * 1e-10);
}

TEST(Driver, SphereFlowLogsChartTransitions) {
  // a Hopf-circle Reeb orbit through the chart-0 origin passes through the
  // antipode, which lives in chart 1: at least two transitions per period
  const MagneticSystem sys = sphere_system();
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 2.0 * M_PI;
  TangentState s0;
  s0.q = make_point(0, {0, 0, 0});
  s0.v = reeb_vector(*sys.manifold, s0.q);
  const Trajectory traj = integrate_magnetic(sys, s0, cfg);
  ASSERT_GE(traj.transitions.size(), 2u);
  for (const auto& ev : traj.transitions) {
    EXPECT_NE(ev.from_chart, ev.to_chart);
    ASSERT_LT(ev.sample_index, traj.samples.size());
    // the first sample at/after the event is already expressed in to_chart
    EXPECT_EQ(traj.samples[ev.sample_index].state.q.chart_id, ev.to_chart);
  }
  // consecutive samples share a chart unless a transition sits between them
  std::size_t k = 0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const int a = traj.samples[i - 1].state.q.chart_id;
    const int b = traj.samples[i].state.q.chart_id;
    if (a != b) {
      while (k < traj.transitions.size() &&
             traj.transitions[k].sample_index < i)
        ++k;
      ASSERT_LT(k, traj.transitions.size());
      EXPECT_EQ(traj.transitions[k].sample_index, i);
    }
  }
}

TEST(Driver, EnergyConservedAcrossChartTransitions) {
  const MagneticSystem sys = sphere_system();
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 8.0;
  TangentState s0;
  s0.q = make_point(0, {0.3, -0.2, 0.1});
  s0.v = Vec::Zero(3);
  s0.v << 0.5, 0.8, -0.4;
  const Trajectory traj = integrate_magnetic(sys, s0, cfg);
  EXPECT_GE(traj.transitions.size(), 1u);
  EXPECT_LT(traj.max_energy_drift, 1e-9);
}

TEST(Driver, Rk4IsFourthOrderOnMagneticFlow) {
  // halving dt must shrink the endpoint error by about 2^4 while both steps
  // sit inside the power-law regime
  const MagneticSystem sys = torus_system();
  TangentState s0;
  s0.q = make_point(0, {0.0, 0.0, 0.2});
  s0.v = Vec::Zero(3);
  s0.v << 0.7, 0.1, 0.4;

  auto endpoint = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.max_time = 1.0;
    return integrate_magnetic(sys, s0, cfg).samples.back().state;
  };
  const TangentState ref = endpoint(1.25e-4);
  auto err = [&](double dt) {
    const TangentState e = endpoint(dt);
    return (e.q.coords - ref.q.coords).norm() + (e.v - ref.v).norm();
  };
  const double ratio = err(4e-2) / err(2e-2);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 24.0);
}

TEST(Driver, Rkf45MatchesRk4Endpoint) {
  const MagneticSystem sys = torus_system();
  TangentState s0;
  s0.q = make_point(0, {0.1, 0.6, 0.35});
  s0.v = Vec::Zero(3);
  s0.v << -0.2, 0.9, 0.3;

  IntegratorConfig fine;
  fine.dt = 2.5e-4;
  fine.max_time = 3.0;
  const auto a = integrate_magnetic(sys, s0, fine).samples.back().state;

  IntegratorConfig adaptive;
  adaptive.scheme = "rkf45";
  adaptive.dt = 1e-2;  // initial step only
  adaptive.tol = 1e-12;
  adaptive.max_time = 3.0;
  const Trajectory tb = integrate_magnetic(sys, s0, adaptive);
  const auto& b = tb.samples.back().state;
  EXPECT_EQ(tb.scheme, "rkf45");
  EXPECT_NEAR(tb.samples.back().t, 3.0, 1e-12);
  ASSERT_EQ(a.q.chart_id, b.q.chart_id);
  EXPECT_LT(sys.manifold->coord_delta(a.q.coords, b.q.coords, a.q.chart_id).norm(), 1e-8);
  EXPECT_LT((a.v - b.v).norm(), 1e-8);
}

TEST(Driver, DriftFlagSetWhenBoundExceeded) {
  const MagneticSystem sys = sphere_system();
  IntegratorConfig cfg;
  cfg.dt = 0.2;  // deliberately coarse: RK4 error dominates
  cfg.max_time = 4.0;
  cfg.drift_bound = 1e-12;
  TangentState s0;
  s0.q = make_point(0, {0.3, -0.2, 0.1});
  s0.v = Vec::Zero(3);
  s0.v << 0.5, 0.8, -0.4;
  const Trajectory traj = integrate_magnetic(sys, s0, cfg);
  EXPECT_TRUE(traj.drift_flagged);
  EXPECT_GT(traj.max_energy_drift, 1e-12);
}

TEST(Driver, ReebSamplesCarryReebVelocity) {
  const MagneticSystem sys = torus_system();
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  cfg.max_time = 1.0;
  const Trajectory traj =
      integrate_reeb(*sys.manifold, make_point(0, {0, 0, 0.125}), cfg);
  for (std::size_t i = 0; i < traj.samples.size(); i += 20) {
    const auto& s = traj.samples[i].state;
    const Vec R = reeb_vector(*sys.manifold, s.q);
    EXPECT_LT((s.v - R).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace contactlab
