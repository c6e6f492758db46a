// Command-line front end: config-driven geodesic runs, exponential-map scans,
// normal-form construction and the verification suites, with CSV/JSON outputs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cornerflow/normal_form.hpp"
#include "cornerflow/suite.hpp"

using namespace cornerflow;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long seed = -1;
  double tol = 0.0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "config file path");
  cmd->add_option("--out", args->out_dir, "output directory");
  cmd->add_option("--seed", args->seed, "sampling seed override");
  cmd->add_option("--tol", args->tol, "integration tolerance override");
  cmd->add_flag("--quiet", args->quiet, "suppress progress output");
}

RunConfig load_config(const CommonArgs& args) {
  Config c = args.config_path.empty() ? Config::parse_string("")
                                      : Config::parse_file(args.config_path);
  if (!args.out_dir.empty()) c.set("run.out", args.out_dir);
  if (args.seed >= 0) c.set("run.seed", std::to_string(args.seed));
  if (args.tol > 0.0) {
    std::ostringstream ss;
    ss.precision(17);
    ss << args.tol;
    c.set("integrate.tol", ss.str());
  }
  if (args.quiet) c.set("run.quiet", "true");
  return RunConfig::from(c);
}

int cmd_geodesic(const CommonArgs& args, double t_end_flag) {
  RunConfig cfg = load_config(args);
  AdmissibleMetric m = cfg.make_metric();
  BoundaryQ Q = cfg.make_boundary();

  Vec x(cfg.n - 1);
  for (int i = 0; i < cfg.n - 1; ++i)
    x[i] = i < static_cast<int>(cfg.start_x.size()) ? cfg.start_x[i] : 0.0;
  PolarPoint q = Q.at(x, cfg.start_rho);
  double t_end = t_end_flag >= 0.0 ? t_end_flag : cfg.t_end;

  IntegrateOptions io;
  io.theta_min = cfg.theta_min;
  Trajectory tr = integrate(m, initial_state(m, Q, q), t_end, cfg.tol, io);

  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ostringstream os;
    write_trajectory_csv(os, m, tr);
    write_file_atomic(cfg.out_dir + "/trajectory.csv", os.str());
  }
  {
    std::ostringstream os(std::ios::binary);
    write_trajectory_binary(os, m, tr);
    write_file_atomic(cfg.out_dir + "/trajectory.bin", os.str());
  }

  TrajectoryStats st = trajectory_stats(m, tr, &Q);
  const char* reason =
      tr.reason == Trajectory::Termination::kReachedThetaMin ? "reached theta_min"
                                                             : "reached t_end";
  if (!cfg.quiet) {
    std::printf("termination: %s at t = %.6g\n", reason, tr.t_final());
    std::printf("A1 = %.6g  A2 = %.6g  eps = %.6g  C = %.6g\n", st.angle_lower,
                st.angle_upper, st.rho_lower, st.rho_upper);
    std::printf("norm drift max = %.3g\n", st.norm_drift_max);
  }
  return 0;
}

int cmd_expmap_scan(const CommonArgs& args) {
  RunConfig cfg = load_config(args);
  AdmissibleMetric m = cfg.make_metric();
  BoundaryQ Q = cfg.make_boundary();
  ExpMapOptions eo;
  eo.tol = std::min(cfg.tol, 1e-10);
  eo.handoff = cfg.handoff;
  ExpMap em(m, Q, eo);

  ScanSpec spec;
  spec.seed = cfg.seed;
  spec.x_min = cfg.x_min;
  spec.x_max = cfg.x_max;
  spec.rho_min = std::max(cfg.rho_min, 1e-3);
  spec.rho_max = cfg.rho_max;
  ScanReport rep = injectivity_scan(em, spec);

  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir + "/expmap_scan.json", rep.to_json() + "\n");
  if (!cfg.quiet)
    std::printf("scan: %s (min image distance %.3g, c = %.3g)\n",
                rep.pass ? "PASS" : "FAIL", rep.min_image_distance,
                rep.c_measured);
  return rep.pass ? 0 : 1;
}

int cmd_normal_form(const CommonArgs& args, const std::string& form_flag) {
  RunConfig cfg = load_config(args);
  AdmissibleMetric m = cfg.make_metric();
  BoundaryQ Q = cfg.make_boundary();

  NormalFormSpec spec;
  spec.n_param = cfg.n_param;
  spec.n_x = cfg.n_x;
  spec.x_min = cfg.x_min;
  spec.x_max = cfg.x_max;
  spec.n_rho = cfg.n_rho;
  spec.rho_max = cfg.rho_max;
  spec.tol = std::max(1e-12, std::min(cfg.tol, 1e-10));

  bool constant = Q.constant_corner_angle(cfg.n);
  bool use_theta = form_flag == "theta" || (form_flag.empty() && constant);
  if (form_flag == "theta" && !constant)
    throw config_error(
        "theta-form requested but the boundary angle is not constant");

  NormalFormGrid grid = use_theta ? build_theta_form(m, Q, spec)
                                  : build_u_form(m, Q, spec);
  std::filesystem::create_directories(cfg.out_dir);
  std::ostringstream os;
  grid.save(os);
  std::string name = use_theta ? "normal_form_theta.nfg" : "normal_form_u.nfg";
  write_file_atomic(cfg.out_dir + "/" + name, os.str());
  if (!cfg.quiet)
    std::printf("%s written (%zu slices, cross residual %.3g, unit dev %.3g)\n",
                name.c_str(), grid.params.size(), grid.max_cross_residual,
                grid.max_unit_dev);
  return 0;
}

int cmd_verify(const CommonArgs& args, bool list_only) {
  if (list_only) {
    for (const auto& s : suite_names()) std::printf("%s\n", s.c_str());
    return 0;
  }
  RunConfig cfg = load_config(args);
  SuiteReport rep = run_suites(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  write_file_atomic(cfg.out_dir + "/report.json", rep.to_json() + "\n");
  rep.write_csv_summaries(cfg.out_dir);
  if (!cfg.quiet) {
    for (const auto& e : rep.entries)
      std::printf("[%s] %-28s %s (measured %.3g, target %.3g)\n",
                  e.pass ? "PASS" : "FAIL", e.anchor.c_str(), e.suite.c_str(),
                  e.measured, e.target);
  }
  if (!rep.all_pass()) {
    for (const auto& e : rep.entries)
      if (!e.pass)
        std::fprintf(stderr, "FAIL: %s (%s)\n", e.anchor.c_str(),
                     e.suite.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corner normal-form numerics"};
  app.require_subcommand(1);

  CommonArgs args;
  double t_end = -1.0;
  std::string form_flag;
  bool list_only = false;

  CLI::App* geodesic = app.add_subcommand("geodesic", "integrate one normal geodesic");
  add_common(geodesic, &args);
  geodesic->add_option("--t-end", t_end, "integration horizon");

  CLI::App* scan = app.add_subcommand("expmap-scan",
                                      "jacobian sweep and injectivity sampling");
  add_common(scan, &args);

  CLI::App* nf = app.add_subcommand("normal-form", "build slice metrics");
  add_common(nf, &args);
  nf->add_option("--form", form_flag, "force u or theta parameterization")
      ->check(CLI::IsMember({"u", "theta"}));

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  add_common(verify, &args);
  verify->add_flag("--list", list_only, "print suite names without running");

  CLI::App* list = app.add_subcommand("list-suites", "print suite names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (geodesic->parsed()) return cmd_geodesic(args, t_end);
    if (scan->parsed()) return cmd_expmap_scan(args);
    if (nf->parsed()) return cmd_normal_form(args, form_flag);
    if (verify->parsed()) return cmd_verify(args, list_only);
    if (list->parsed()) return cmd_verify(args, true);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
