#include <gtest/gtest.h>

#include <sstream>

#include "contactlab/config.hpp"
#include "contactlab/report.hpp"

namespace contactlab {
namespace {

TEST(Config, DefaultsApplyOnEmptyObject) {
  const ExperimentConfig cfg = parse_config(json::object());
  EXPECT_EQ(cfg.manifold_key, "t3-standard");
  EXPECT_EQ(cfg.bundle_metric.kind, "identity");
  EXPECT_FALSE(cfg.perturbation);
  EXPECT_DOUBLE_EQ(cfg.sigma_strength, 1.0);
  EXPECT_EQ(cfg.integrator.scheme, "rk4");
  EXPECT_DOUBLE_EQ(cfg.closure_tol, 1e-6);
  ASSERT_EQ(cfg.kappas.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.kappas[0], 0.5);
  EXPECT_DOUBLE_EQ(cfg.kappas[1], 2.0);
}

TEST(Config, ParsesFullDocument) {
  const json j = json::parse(R"({
    "manifold": "s3-standard",
    "bundle_metric": {"kind": "constant", "matrix": [[4, 0], [0, 9]]},
    "sigma_strength": 2.5,
    "integrator": {"scheme": "rkf45", "dt": 0.01, "tol": 1e-9,
                   "max_time": 3.0, "drift_bound": 1e-7},
    "seeds": [{"chart": 1, "coords": [0.5, -0.1, 0.2]}],
    "t_max": 8.0,
    "kappas": [1.0],
    "mane": {"degree": 2, "grid_resolution": 400, "iters": 40},
    "flow": {"kind": "reeb", "initial": {"coords": [0, 0, 0]}, "time": 6.5},
    "verify": {"grid_n": 10, "sphere_samples": 250},
    "closure_tol": 1e-7
  })");
  const ExperimentConfig cfg = parse_config(j);
  EXPECT_EQ(cfg.manifold_key, "s3-standard");
  EXPECT_EQ(cfg.bundle_metric.kind, "constant");
  EXPECT_DOUBLE_EQ(cfg.bundle_metric.matrix(1, 1), 9.0);
  EXPECT_DOUBLE_EQ(cfg.sigma_strength, 2.5);
  EXPECT_EQ(cfg.integrator.scheme, "rkf45");
  EXPECT_DOUBLE_EQ(cfg.integrator.dt, 0.01);
  ASSERT_EQ(cfg.seeds.size(), 1u);
  EXPECT_EQ(cfg.seeds[0].chart_id, 1);
  EXPECT_DOUBLE_EQ(cfg.seeds[0].coords[2], 0.2);
  EXPECT_EQ(cfg.mane.basis_kind, "chart-poly-s3");  // default for s3
  EXPECT_EQ(cfg.mane.degree, 2);
  EXPECT_EQ(cfg.mane.grid_resolution, 400);
  EXPECT_EQ(cfg.mane.optimizer.iters_per_beta, 40);
  EXPECT_TRUE(cfg.flow_reeb);
  EXPECT_DOUBLE_EQ(cfg.flow_time, 6.5);
  EXPECT_EQ(cfg.verify_grid_n, 10);
  EXPECT_DOUBLE_EQ(cfg.closure_tol, 1e-7);
}

TEST(Config, RejectsBadInputs) {
  EXPECT_THROW(parse_config(json::parse(R"({"manifold": "k3"})")),
               config_error);
  EXPECT_THROW(parse_config(json::parse(R"({"kappas": [0.0]})")),
               config_error);
  EXPECT_THROW(
      parse_config(json::parse(R"({"integrator": {"scheme": "euler"}})")),
      input_error);
  EXPECT_THROW(parse_config(json::parse(R"({"seeds": [{"chart": 0}]})")),
               config_error);  // missing coords -> json error -> config_error
  EXPECT_THROW(load_config_file("/nonexistent/path.json"), config_error);
}

TEST(Config, BundleSpecBuildsAndValidates) {
  BundleMetricSpec spec;
  spec.kind = "constant";
  spec.matrix = Mat::Identity(2, 2) * 3.0;
  const BundleMetric bm = spec.build(3);
  EXPECT_DOUBLE_EQ(bm.coeff(make_point(0, {0, 0, 0}))(0, 0), 3.0);

  spec.matrix = Mat::Identity(3, 3);  // wrong size for dim 3
  EXPECT_THROW(spec.build(3), config_error);

  BundleMetricSpec bad;
  bad.kind = "chebyshev";
  EXPECT_THROW(bad.build(3), config_error);

  BundleMetricSpec four;
  four.kind = "fourier-z";
  four.diag = {{2.0, 0.5, 1.0, 0.0}};  // needs dim-1 = 2 entries
  EXPECT_THROW(four.build(3), config_error);
}

TEST(Config, CustomTorusRequiresAlphaTable) {
  ExperimentConfig cfg;
  cfg.manifold_key = "t3-custom";
  EXPECT_THROW(cfg.build_manifold(), config_error);
}

TEST(Config, BuildSystemHonorsPerturbationFlag) {
  ExperimentConfig cfg;
  const MagneticSystem clean = cfg.build_system();
  EXPECT_EQ(clean.metric.provenance(), "class-G");
  cfg.perturbation = true;
  const MagneticSystem dirty = cfg.build_system();
  EXPECT_NE(dirty.metric.provenance(), "class-G");
}

TEST(Report, ConfigHashIsDeterministicAndOrderSensitive) {
  const json a = json::parse(R"({"manifold": "t3-standard", "t_max": 5.0})");
  const json b = json::parse(R"({"manifold": "t3-standard", "t_max": 5.0})");
  const json c = json::parse(R"({"manifold": "t3-standard", "t_max": 6.0})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);  // zero-padded 64-bit hex
}

TEST(Report, Fmt17RoundTripsDoubles) {
  for (double x : {1.0 / 3.0, 2.0 * M_PI, 1e-17, -0.0, 12345.678901234567}) {
    EXPECT_EQ(std::stod(fmt17(x)), x);
  }
}

TEST(Report, TrajectoryCsvShapeAndHeader) {
  Trajectory traj;
  for (int i = 0; i < 3; ++i) {
    TrajectorySample s;
    s.t = 0.5 * i;
    s.state.q = make_point(0, {0.1 * i, 0.0, 0.25});
    s.state.v = Vec::Zero(3);
    s.state.v << 1.0, 0.0, 0.0;
    traj.samples.push_back(std::move(s));
  }
  std::ostringstream out;
  write_trajectory_csv(out, traj, nullptr);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,chart_id,q0,q1,q2,v0,v1,v2,energy");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 8);
    EXPECT_EQ(line.back(), ',');  // energy blank without a system
  }
  EXPECT_EQ(rows, 3);
}

TEST(Report, CheckHelpersSetPassAndComparator) {
  const CheckResult ok = check_below("drift", 1e-9, 1e-6);
  EXPECT_TRUE(ok.pass);
  EXPECT_EQ(ok.comparator, "<");
  const CheckResult bad = check_below("drift", 1e-3, 1e-6);
  EXPECT_FALSE(bad.pass);
  const CheckResult neg = check_above("control", 1.3, 1e-3);
  EXPECT_TRUE(neg.pass);
  EXPECT_EQ(neg.comparator, ">");

  const json arr = checks_to_json({ok, neg});
  ASSERT_EQ(arr.size(), 2u);
  EXPECT_EQ(arr[0]["name"], "drift");
  EXPECT_TRUE(arr[1]["pass"].get<bool>());
}

TEST(Report, HeaderEmbedsHashSeedAndRng) {
  const json cfg = json::parse(R"({"manifold": "t3-standard"})");
  const json h = report_header(cfg, 42);
  EXPECT_EQ(h["tool"], "contactlab");
  EXPECT_EQ(h["version"], kToolVersion);
  EXPECT_EQ(h["config_hash"], config_hash(cfg));
  EXPECT_EQ(h["seed"], 42);
  EXPECT_FALSE(h["rng"].get<std::string>().empty());
}

}  // namespace
}  // namespace contactlab
