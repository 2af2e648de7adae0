#pragma once

#include <fstream>

#include <json.hpp>

#include "contactlab/magnetic.hpp"
#include "contactlab/mane.hpp"

namespace contactlab {

using json = nlohmann::ordered_json;

/// Bundle-metric specification block.
///   {"kind": "identity"}
///   {"kind": "constant", "matrix": [[4,0],[0,9]]}
///   {"kind": "fourier-z", "diag": [{"c0":2, "amp":0.5, "freq":1, "phase":0},
///                                  {"c0":3, "amp":0.4, "freq":2, "phase":1}]}
struct BundleMetricSpec {
  std::string kind = "identity";
  Mat matrix;                          // constant
  std::vector<FourierDiagTerm> diag;   // fourier-z

  BundleMetric build(int dim) const {
    const int fd = dim - 1;
    if (kind == "identity") return bundle_identity(fd);
    if (kind == "constant") {
      if (matrix.rows() != fd || matrix.cols() != fd)
        throw config_error("bundle_metric.matrix must be (dim-1) x (dim-1)");
      return bundle_constant(matrix, "constant");
    }
    if (kind == "fourier-z") {
      if (static_cast<int>(diag.size()) != fd)
        throw config_error("bundle_metric.diag needs dim-1 entries");
      return bundle_fourier_z(diag);
    }
    throw config_error("unknown bundle_metric kind '" + kind + "'");
  }
};

struct ManeSpec {
  std::string basis_kind = "fourier-t3";
  int degree = 1;
  int grid_resolution = 32;    // n^3 on T^3; points per chart on S^3
  MinimaxOptions optimizer;
};

struct ExperimentConfig {
  std::string manifold_key = "t3-standard";
  std::vector<TrigTerm> custom_alpha;  // for manifold_key == "t3-custom"
  BundleMetricSpec bundle_metric;
  bool perturbation = false;           // non-class-G negative control
  double perturbation_amp = 0.3;
  double sigma_strength = 1.0;
  IntegratorConfig integrator;
  std::vector<ChartPoint> seeds;
  double t_max = 3.0;
  std::vector<double> kappas{0.5, 2.0};
  ManeSpec mane;
  // flow subcommand
  TangentState flow_initial;
  double flow_time = 1.0;
  bool flow_reeb = true;
  // verify sweep sizes
  int verify_grid_n = 20;
  int verify_sphere_samples = 500;
  double verify_drift_time = 10.0;
  int verify_drift_states = 4;
  // orbit machinery
  double closure_tol = 1e-6;
  double match_tol = 1e-3;
  double residual_bound = 1e-5;

  std::shared_ptr<const ContactManifold> build_manifold() const {
    if (manifold_key == "t3-custom") {
      if (custom_alpha.empty())
        throw config_error("t3-custom requires an alpha coefficient table");
      return std::make_shared<CustomTorusForm>(3, custom_alpha);
    }
    return make_manifold(manifold_key);
  }

  MagneticSystem build_system() const {
    auto m = build_manifold();
    MetricField metric =
        perturbation
            ? perturbed_metric(m, bundle_metric.build(m->dim()),
                               perturbation_amp)
            : extend_metric(m, bundle_metric.build(m->dim()));
    return MagneticSystem{m, std::move(metric), sigma_strength};
  }
};

namespace detail {

inline ChartPoint point_from_json(const json& j) {
  ChartPoint p;
  p.chart_id = j.value("chart", 0);
  const auto& c = j.at("coords");
  p.coords.resize(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i)
    p.coords[static_cast<Eigen::Index>(i)] = c[i].get<double>();
  return p;
}

inline Vec vec_from_json(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.manifold_key = j.value("manifold", cfg.manifold_key);
    if (cfg.manifold_key != "t3-standard" && cfg.manifold_key != "s3-standard" &&
        cfg.manifold_key != "t3-custom")
      throw config_error("unknown manifold key '" + cfg.manifold_key + "'");
    if (j.contains("alpha_table")) {
      for (const auto& t : j.at("alpha_table")) {
        TrigTerm term;
        term.component = t.at("component").get<int>();
        term.amplitude = t.at("amplitude").get<double>();
        term.is_sin = t.value("func", "cos") == std::string("sin");
        term.freq = detail::vec_from_json(t.at("freq"));
        term.phase = t.value("phase", 0.0);
        cfg.custom_alpha.push_back(std::move(term));
      }
    }
    if (j.contains("bundle_metric")) {
      const auto& b = j.at("bundle_metric");
      cfg.bundle_metric.kind = b.value("kind", "identity");
      if (b.contains("matrix")) {
        const auto& rows = b.at("matrix");
        const int n = static_cast<int>(rows.size());
        cfg.bundle_metric.matrix.resize(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c)
            cfg.bundle_metric.matrix(r, c) = rows[r][c].get<double>();
      }
      if (b.contains("diag")) {
        for (const auto& d : b.at("diag")) {
          FourierDiagTerm t;
          t.c0 = d.value("c0", 1.0);
          t.amp = d.value("amp", 0.0);
          t.freq = d.value("freq", 1.0);
          t.phase = d.value("phase", 0.0);
          cfg.bundle_metric.diag.push_back(t);
        }
      }
    }
    cfg.perturbation = j.value("perturbation", false);
    cfg.perturbation_amp = j.value("perturbation_amp", 0.3);
    cfg.sigma_strength = j.value("sigma_strength", 1.0);
    if (j.contains("integrator")) {
      const auto& i = j.at("integrator");
      cfg.integrator.scheme = i.value("scheme", "rk4");
      cfg.integrator.dt = i.value("dt", 1e-3);
      cfg.integrator.tol = i.value("tol", 1e-10);
      cfg.integrator.max_time = i.value("max_time", 10.0);
      cfg.integrator.drift_bound = i.value("drift_bound", 1e-6);
      cfg.integrator.validate();
    }
    if (j.contains("seeds"))
      for (const auto& s : j.at("seeds"))
        cfg.seeds.push_back(detail::point_from_json(s));
    cfg.t_max = j.value("t_max", cfg.t_max);
    if (j.contains("kappas"))
      cfg.kappas = j.at("kappas").get<std::vector<double>>();
    for (double k : cfg.kappas)
      if (!(k > 0.0)) throw config_error("kappa values must be positive");
    if (j.contains("mane")) {
      const auto& mj = j.at("mane");
      cfg.mane.basis_kind = mj.value(
          "basis", cfg.manifold_key == "s3-standard" ? "chart-poly-s3"
                                                     : "fourier-t3");
      cfg.mane.degree = mj.value("degree", 1);
      cfg.mane.grid_resolution = mj.value("grid_resolution", 32);
      if (mj.contains("betas"))
        cfg.mane.optimizer.betas = mj.at("betas").get<std::vector<double>>();
      cfg.mane.optimizer.iters_per_beta = mj.value("iters", 60);
      cfg.mane.optimizer.step = mj.value("step", 0.05);
    } else if (cfg.manifold_key == "s3-standard") {
      cfg.mane.basis_kind = "chart-poly-s3";
      cfg.mane.grid_resolution = 4000;
    }
    if (j.contains("flow")) {
      const auto& f = j.at("flow");
      cfg.flow_initial.q = detail::point_from_json(f.at("initial"));
      cfg.flow_reeb = f.value("kind", "reeb") == std::string("reeb");
      if (f.contains("velocity"))
        cfg.flow_initial.v = detail::vec_from_json(f.at("velocity"));
      cfg.flow_time = f.value("time", 1.0);
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      cfg.verify_grid_n = v.value("grid_n", 20);
      cfg.verify_sphere_samples = v.value("sphere_samples", 500);
      cfg.verify_drift_time = v.value("drift_time", 10.0);
      cfg.verify_drift_states = v.value("drift_states", 4);
    }
    cfg.closure_tol = j.value("closure_tol", 1e-6);
    cfg.match_tol = j.value("match_tol", 1e-3);
    cfg.residual_bound = j.value("residual_bound", 1e-5);
  } catch (const json::exception& e) {
    throw config_error(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace contactlab
