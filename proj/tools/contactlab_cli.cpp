// contactlab: batch front-end for contact-manifold magnetic-flow experiments.
// Subcommands: verify | flow | orbits | mane | growth. Every report embeds
// the config hash, tool version, RNG name and seed; identical config + seed
// reproduce byte-identical outputs.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "contactlab/drivers.hpp"

namespace {

namespace fs = std::filesystem;
using contactlab::json;

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 1;
};

json load_raw_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw contactlab::config_error("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw contactlab::config_error(std::string("config parse error: ") +
                                   e.what());
  }
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
}

int cmd_verify(const GlobalArgs& g) {
  const json raw = load_raw_config(g.config_path);
  const contactlab::ExperimentConfig cfg = contactlab::parse_config(raw);
  const contactlab::VerifyResult res =
      contactlab::run_verify(cfg, g.seed, g.threads);

  json report = contactlab::report_header(raw, g.seed);
  report["command"] = "verify";
  report["manifold"] = cfg.manifold_key;
  report["checks"] = contactlab::checks_to_json(res.checks);
  report["all_pass"] = res.all_pass;
  fs::create_directories(g.out_dir);
  write_json(fs::path(g.out_dir) / "verify.json", report);

  for (const auto& c : res.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  value "
              << c.value << "  " << c.comparator << "  " << c.threshold
              << '\n';
  if (!res.all_pass) {
    for (const auto& c : res.checks)
      if (!c.pass) std::cerr << "failed check: " << c.name << '\n';
    return 1;
  }
  return 0;
}

int cmd_flow(const GlobalArgs& g) {
  const json raw = load_raw_config(g.config_path);
  const contactlab::ExperimentConfig cfg = contactlab::parse_config(raw);
  const contactlab::MagneticSystem sys = cfg.build_system();
  const contactlab::Trajectory traj = contactlab::run_flow(cfg);

  fs::create_directories(g.out_dir);
  std::ofstream csv(fs::path(g.out_dir) / "flow.csv", std::ios::binary);
  contactlab::write_trajectory_csv(csv, traj, cfg.flow_reeb ? nullptr : &sys);

  json meta = contactlab::report_header(raw, g.seed);
  meta["command"] = "flow";
  meta["scheme"] = traj.scheme;
  meta["dt"] = traj.dt;
  meta["samples"] = traj.samples.size();
  meta["chart_transitions"] = traj.transitions.size();
  meta["energy_start"] = traj.energy_start;
  meta["energy_end"] = traj.energy_end;
  meta["max_energy_drift"] = traj.max_energy_drift;
  meta["drift_flagged"] = traj.drift_flagged;
  write_json(fs::path(g.out_dir) / "flow.json", meta);
  std::cout << "wrote " << traj.samples.size() << " samples to "
            << (fs::path(g.out_dir) / "flow.csv").string() << '\n';
  return traj.drift_flagged ? 1 : 0;
}

int cmd_orbits(const GlobalArgs& g) {
  const json raw = load_raw_config(g.config_path);
  const contactlab::ExperimentConfig cfg = contactlab::parse_config(raw);
  const contactlab::OrbitCensus census = contactlab::run_orbit_census(cfg);

  json report = contactlab::report_header(raw, g.seed);
  report["command"] = "orbits";
  report["census"] = contactlab::census_to_json(census);
  fs::create_directories(g.out_dir);
  write_json(fs::path(g.out_dir) / "orbits.json", report);
  std::cout << census.class_count() << " orbit class(es) detected\n";
  return 0;
}

int cmd_mane(const GlobalArgs& g) {
  const json raw = load_raw_config(g.config_path);
  const contactlab::ExperimentConfig cfg = contactlab::parse_config(raw);
  const contactlab::ManeRun run = contactlab::run_mane(cfg, g.seed);

  json report = contactlab::report_header(raw, g.seed);
  report["command"] = "mane";
  report["bracket"] = contactlab::bracket_to_json(run.bracket, run.loop_labels);
  fs::create_directories(g.out_dir);
  write_json(fs::path(g.out_dir) / "mane.json", report);
  std::cout << "Mane bracket [" << run.bracket.lower << ", "
            << run.bracket.upper << "]\n";
  return 0;
}

int cmd_growth(const GlobalArgs& g) {
  const json raw = load_raw_config(g.config_path);
  const contactlab::ExperimentConfig cfg = contactlab::parse_config(raw);
  const contactlab::GrowthReport rep = contactlab::run_growth(cfg);

  json report = contactlab::report_header(raw, g.seed);
  report["command"] = "growth";
  report["growth"] = contactlab::growth_to_json(rep);
  fs::create_directories(g.out_dir);
  write_json(fs::path(g.out_dir) / "growth.json", report);
  std::cout << "R_t = " << rep.reeb_count << ", verdict: "
            << (rep.inequality_holds ? "holds" : "violated") << '\n';
  return rep.inequality_holds ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactlab: magnetic geodesic and Reeb flow laboratory"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config (JSON)")
      ->required();
  app.add_option("--seed", g.seed, "RNG seed (recorded in reports)");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker threads for sweeps");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  auto* flow = app.add_subcommand("flow", "integrate one flow line to CSV");
  auto* orbits = app.add_subcommand("orbits", "detect closed Reeb orbits");
  auto* mane = app.add_subcommand("mane", "certified Mane-value bracket");
  auto* growth = app.add_subcommand("growth", "orbit-count inequality report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(g);
    if (flow->parsed()) return cmd_flow(g);
    if (orbits->parsed()) return cmd_orbits(g);
    if (mane->parsed()) return cmd_mane(g);
    if (growth->parsed()) return cmd_growth(g);
  } catch (const contactlab::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
