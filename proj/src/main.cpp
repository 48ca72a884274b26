// spamcli: data generation, runs, sweeps, property checks, and plots for the
// stochastic proximal-point optimizer family in include/spam.
//
// Exit codes: 0 success, 1 runtime/numerical failure, 2 usage error.
// Every output directory receives effective.cfg, the fully resolved
// configuration; re-running from that echo reproduces outputs bit-exactly.

#include "spam/config.hpp"
#include "spam/datagen.hpp"
#include "spam/harness.hpp"
#include "spam/optim.hpp"
#include "spam/problem.hpp"
#include "spam/prox.hpp"
#include "spam/svg.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace spam;
namespace fs = std::filesystem;

const char* kUsage =
    "usage: spamcli <gen|run|sweep|check|plot> [paths...] [flags]\n"
    "\n"
    "subcommands\n"
    "  gen    generate a synthetic federated quadratic suite -> problem container + report\n"
    "  run    execute one optimizer run -> trace.csv + summary line\n"
    "  sweep  run the cartesian parameter sweep -> traces + manifest.txt\n"
    "  check  verification battery (prox contract, similarity bound, descent) -> PASS/FAIL\n"
    "  plot   render traces (CSV paths or a manifest path) -> plot.svg\n"
    "\n"
    "flags\n"
    "  --config <path>   key = value configuration file (sections [problem] [schedule]\n"
    "                    [run] [sweep]; unknown keys are errors)\n"
    "  --seed <u64>      override the problem seed (gen) or run seed (other commands)\n"
    "  --out <dir>       output directory (default out_<subcommand>)\n"
    "  --threads <n>     worker threads; results are identical for any n\n";

std::string fmt17(double v) { return spam::detail::fmt17(v); }

struct CliArgs {
  std::string subcmd;
  std::vector<std::string> positionals;
  std::string config_path;
  std::string out_dir;
  bool seed_set = false;
  uint64_t seed = 0;
  int threads = 1;
};

CliArgs parse_args(int argc, char** argv) {
  if (argc < 2) throw ConfigError("missing subcommand");
  CliArgs args;
  args.subcmd = argv[1];
  static const std::set<std::string> subcmds = {"gen", "run", "sweep", "check", "plot"};
  if (!subcmds.count(args.subcmd)) throw ConfigError("unknown subcommand '" + args.subcmd + "'");
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    const auto need_value = [&](const char* flag) -> std::string {
      if (i + 1 >= argc) throw ConfigError(std::string(flag) + " requires a value");
      return argv[++i];
    };
    if (a == "--config") {
      args.config_path = need_value("--config");
    } else if (a == "--seed") {
      args.seed = cfgdetail::parse_u64("--seed", need_value("--seed"));
      args.seed_set = true;
    } else if (a == "--out") {
      args.out_dir = need_value("--out");
    } else if (a == "--threads") {
      const long t = cfgdetail::parse_long("--threads", need_value("--threads"));
      if (t < 1 || t > 256) throw ConfigError("--threads must lie in [1, 256]");
      args.threads = static_cast<int>(t);
    } else if (!a.empty() && a[0] == '-') {
      throw ConfigError("unknown flag '" + a + "'");
    } else {
      if (args.subcmd != "plot") {
        throw ConfigError("unexpected positional argument '" + a + "'");
      }
      args.positionals.push_back(a);
    }
  }
  if (args.out_dir.empty()) args.out_dir = "out_" + args.subcmd;
  return args;
}

// ---------------------------------------------------------------------------
// Problem and schedule resolution
// ---------------------------------------------------------------------------

FedQuadProblem make_problem(const CliConfig& cfg) {
  if (!cfg.problem.file.empty()) {
    return load_problem(resolve_config_path(cfg, cfg.problem.file));
  }
  GenConfig gen;
  gen.seed = cfg.problem.seed;
  gen.n = static_cast<int>(cfg.problem.n);
  gen.d = static_cast<int>(cfg.problem.d);
  gen.lambda = cfg.problem.lambda;
  gen.hetero_scale = cfg.problem.hetero_scale;
  return generate(gen);
}

ScheduleKind schedule_kind_from(const std::string& s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "decaying") return ScheduleKind::decaying;
  if (s == "pp_constant") return ScheduleKind::pp_constant;
  if (s == "pp_decaying") return ScheduleKind::pp_decaying;
  return ScheduleKind::custom;
}

Algorithm algorithm_from(const std::string& s) {
  if (s == "spam_exact") return Algorithm::spam_exact;
  if (s == "spam_inexact") return Algorithm::spam_inexact;
  if (s == "spam_pp") return Algorithm::spam_pp;
  if (s == "spam_ppa") return Algorithm::spam_ppa;
  return Algorithm::sgd_baseline;
}

struct ResolvedSetup {
  Schedule schedule;
  RunConfig rc;
  double delta = 0.0;
  double sigma2 = 0.0;
  double f_est = 0.0;
  double smoothness = 0.0;
};

// Translates the config sections into a RunConfig, computing auto quantities
// (delta, sigma2 at x0, initial gap) from the problem.
ResolvedSetup resolve_setup(const CliConfig& cfg, const FedQuadProblem& problem,
                            const ProblemCache& pc, uint64_t run_seed, int threads) {
  ResolvedSetup rs;
  rs.delta = cfg.schedule.delta.is_auto ? pc.delta : cfg.schedule.delta.value;
  rs.smoothness = pc.smoothness;
  const DenseVector x0 = generate_x0(run_seed, problem.dim());
  rs.sigma2 = cfg.schedule.sigma2.is_auto ? problem.sigma2_at(x0) : cfg.schedule.sigma2.value;
  rs.f_est = cfg.schedule.f_est.is_auto ? problem.value(x0) - pc.f_inf : cfg.schedule.f_est.value;

  Schedule sch;
  sch.kind = schedule_kind_from(cfg.schedule.kind);
  sch.delta = rs.delta;
  sch.sigma2 = rs.sigma2;
  sch.F_est = rs.f_est;
  sch.smoothness = rs.smoothness;
  sch.K = std::max<long>(cfg.run.K, 1);
  sch.B = cfg.run.B;
  for (const GammaExpr& e : cfg.schedule.gamma) {
    sch.gamma_override.push_back(e.resolve(rs.delta, rs.smoothness));
  }
  sch.p_override = cfg.schedule.p;
  rs.schedule = sch;

  RunConfig rc;
  rc.algorithm = algorithm_from(cfg.run.algorithm);
  rc.schedule = sch;
  rc.K = cfg.run.K;
  rc.B = cfg.run.B;
  if (rc.algorithm == Algorithm::spam_exact) {
    if (cfg.run.local_steps > 0) {
      throw ConfigError("[run] spam_exact takes no local_steps; use spam_inexact");
    }
    rc.local_steps = 0;
  } else if (rc.algorithm == Algorithm::spam_inexact) {
    if (cfg.run.local_steps < 1) {
      throw ConfigError("[run] spam_inexact requires local_steps >= 1");
    }
    rc.local_steps = cfg.run.local_steps;
  } else if (rc.algorithm == Algorithm::sgd_baseline) {
    rc.local_steps = 0;
  } else {
    rc.local_steps = std::max<long>(cfg.run.local_steps, 0);
  }
  if (rc.algorithm != Algorithm::spam_pp && rc.algorithm != Algorithm::spam_ppa && rc.B != 1) {
    throw ConfigError("[run] B > 1 requires spam_pp or spam_ppa");
  }
  rc.warmup_samples = cfg.run.warmup_samples;
  rc.warmup_stratified = cfg.run.warmup_stratified;
  rc.seed = run_seed;
  rc.record_lyapunov = cfg.run.record_lyapunov;
  rc.lyapunov_constant = cfg.run.lyapunov_constant == "main_text" ? LyapunovConstant::main_text
                                                                  : LyapunovConstant::appendix;
  rc.prox_client =
      cfg.run.prox_client == "fresh" ? ProxClientRule::fresh : ProxClientRule::cohort;
  rc.cohort_sampling = cfg.run.cohort_sampling == "with_replacement"
                           ? CohortSampling::with_replacement
                           : CohortSampling::without_replacement;
  rc.threads = threads;
  rs.rc = rc;
  return rs;
}

// ---------------------------------------------------------------------------
// Effective-configuration echo
// ---------------------------------------------------------------------------

void echo_problem_section(std::ostream& out, const CliConfig& cfg, const std::string& file_abs) {
  out << "[problem]\n";
  if (!file_abs.empty()) out << "file = " << file_abs << "\n";
  out << "seed = " << cfg.problem.seed << "\n";
  out << "n = " << cfg.problem.n << "\n";
  out << "d = " << cfg.problem.d << "\n";
  out << "lambda = " << fmt17(cfg.problem.lambda) << "\n";
  out << "hetero_scale = " << fmt17(cfg.problem.hetero_scale) << "\n";
}

void echo_run_section(std::ostream& out, const CliConfig& cfg, uint64_t run_seed) {
  out << "[run]\n";
  out << "algorithm = " << cfg.run.algorithm << "\n";
  out << "K = " << cfg.run.K << "\n";
  out << "B = " << cfg.run.B << "\n";
  out << "local_steps = "
      << (cfg.run.local_steps < 0 ? std::string("exact") : std::to_string(cfg.run.local_steps))
      << "\n";
  out << "warmup_samples = " << cfg.run.warmup_samples << "\n";
  out << "warmup_stratified = " << (cfg.run.warmup_stratified ? "true" : "false") << "\n";
  out << "seed = " << run_seed << "\n";
  out << "record_lyapunov = " << (cfg.run.record_lyapunov ? "true" : "false") << "\n";
  out << "lyapunov_constant = " << cfg.run.lyapunov_constant << "\n";
  out << "prox_client = " << cfg.run.prox_client << "\n";
  out << "cohort_sampling = " << cfg.run.cohort_sampling << "\n";
  out << "trace = " << cfg.run.trace << "\n";
}

void echo_schedule_section(std::ostream& out, const CliConfig& cfg, const ResolvedSetup& rs) {
  out << "[schedule]\n";
  out << "kind = " << cfg.schedule.kind << "\n";
  out << "delta = " << fmt17(rs.delta) << "\n";
  out << "sigma2 = " << fmt17(rs.sigma2) << "\n";
  out << "f_est = " << fmt17(rs.f_est) << "\n";
  if (!rs.schedule.gamma_override.empty()) {
    out << "gamma = ";
    for (size_t i = 0; i < rs.schedule.gamma_override.size(); ++i) {
      out << (i ? "," : "") << fmt17(rs.schedule.gamma_override[i]);
    }
    out << "\n";
  }
  if (!rs.schedule.p_override.empty()) {
    out << "p = ";
    for (size_t i = 0; i < rs.schedule.p_override.size(); ++i) {
      out << (i ? "," : "") << fmt17(rs.schedule.p_override[i]);
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

int cmd_gen(const CliArgs& args, CliConfig cfg) {
  if (args.seed_set) cfg.problem.seed = args.seed;
  fs::create_directories(args.out_dir);

  GenConfig gen;
  gen.seed = cfg.problem.seed;
  gen.n = static_cast<int>(cfg.problem.n);
  gen.d = static_cast<int>(cfg.problem.d);
  gen.lambda = cfg.problem.lambda;
  gen.hetero_scale = cfg.problem.hetero_scale;
  const FedQuadProblem problem = generate(gen);

  // [problem] file names the output container when present.
  const std::string out_file = cfg.problem.file.empty()
                                   ? (fs::path(args.out_dir) / "problem.bin").string()
                                   : resolve_config_path(cfg, cfg.problem.file);
  save_problem(out_file, problem);

  const double delta = problem.compute_delta();
  const double L = problem.compute_smoothness();
  const DenseVector x0 = generate_x0(gen.seed, problem.dim());
  const double sigma2 = problem.sigma2_at(x0);
  const auto [x_star, f_inf] = problem.solve_exact();
  (void)x_star;

  {
    std::ofstream rep(fs::path(args.out_dir) / "report.txt");
    rep << "n = " << gen.n << "\n";
    rep << "d = " << gen.d << "\n";
    rep << "lambda = " << fmt17(gen.lambda) << "\n";
    rep << "hetero_scale = " << fmt17(gen.hetero_scale) << "\n";
    rep << "seed = " << gen.seed << "\n";
    rep << "delta = " << fmt17(delta) << "\n";
    rep << "L = " << fmt17(L) << "\n";
    rep << "sigma2_x0 = " << fmt17(sigma2) << "\n";
    rep << "f_inf = " << fmt17(f_inf) << "\n";
    if (!rep) throw std::runtime_error("failed writing report.txt");
  }
  {
    std::ofstream eff(fs::path(args.out_dir) / "effective.cfg");
    eff << "# effective configuration\n";
    echo_problem_section(eff, cfg, fs::absolute(out_file).string());
    if (!eff) throw std::runtime_error("failed writing effective.cfg");
  }
  std::cout << "wrote " << out_file << " delta=" << fmt17(delta) << " L=" << fmt17(L)
            << " sigma2_x0=" << fmt17(sigma2) << " f_inf=" << fmt17(f_inf) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

int cmd_run(const CliArgs& args, CliConfig cfg) {
  const uint64_t run_seed = args.seed_set ? args.seed : cfg.run.seed;
  const FedQuadProblem problem = make_problem(cfg);
  const ProblemCache pc = ProblemCache::build(problem);
  const ResolvedSetup rs = resolve_setup(cfg, problem, pc, run_seed, args.threads);

  fs::create_directories(args.out_dir);
  const RunTrace trace = run_any(problem, rs.rc, &pc);

  const std::string trace_path = (fs::path(args.out_dir) / cfg.run.trace).string();
  write_trace_csv(trace_path, trace, /*include_rows=*/cfg.run.K != 0);

  {
    std::ofstream eff(fs::path(args.out_dir) / "effective.cfg");
    eff << "# effective configuration\n";
    std::string file_abs;
    if (!cfg.problem.file.empty()) {
      file_abs = fs::absolute(resolve_config_path(cfg, cfg.problem.file)).string();
    }
    echo_problem_section(eff, cfg, file_abs);
    echo_schedule_section(eff, cfg, rs);
    echo_run_section(eff, cfg, run_seed);
    if (!eff) throw std::runtime_error("failed writing effective.cfg");
  }

  if (trace.theory_violation) {
    std::cout << "theory_flag=" << trace.theory_note << "\n";
  }
  if (!trace.rows.empty()) {
    std::cout << "final_rel_log=" << fmt17(trace.rows.back().rel_log)
              << " floor=" << fmt17(error_floor(trace, 0.25))
              << " comm_rounds=" << trace.rows.back().comm_rounds << "\n";
  }
  if (trace.diverged) {
    std::cerr << "run diverged at iteration " << trace.diverged_at << "; partial trace written to "
              << trace_path << "\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckReport {
  std::vector<std::string> lines;
  bool all_pass = true;
  void add(const std::string& name, bool pass, const std::string& detail = "") {
    std::string line = "CHECK " + name + (pass ? " PASS" : " FAIL");
    if (!detail.empty()) line += " " + detail;
    lines.push_back(line);
    all_pass = all_pass && pass;
  }
};

int cmd_check(const CliArgs& args, CliConfig cfg) {
  const uint64_t seed = args.seed_set ? args.seed : cfg.run.seed;
  const FedQuadProblem problem = make_problem(cfg);
  const ProblemCache pc = ProblemCache::build(problem);
  const long steps = cfg.run.local_steps < 1 ? 10 : cfg.run.local_steps;

  CheckReport report;
  RandomStream pick(seed, StreamPurpose::test, 1);
  RandomStream xs(seed, StreamPurpose::test, 2);
  RandomStream gs(seed, StreamPurpose::test, 3);

  const auto random_request = [&](long j) {
    ProxRequest req;
    req.client = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(problem.n())));
    req.anchor = DenseVector(problem.dim());
    req.estimator = DenseVector(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) {
      req.anchor[i] = xs.normal();
      req.estimator[i] = gs.normal();
    }
    req.gamma = std::pow(10.0, -2.0 + 3.0 * static_cast<double>(j % 7) / 6.0);
    return req;
  };

  // 1. Exact prox satisfies the approximate-prox contract at eps = 1e-6.
  {
    bool ok = true;
    for (long j = 0; j < 25 && ok; ++j) {
      const ProxRequest req = random_request(j);
      const ProxResult res = prox_exact(problem, req);
      ok = verify_aprox(problem, req, res, 1e-6).pass;
    }
    report.add("aprox_exact", ok, "eps=1e-06 requests=25");
  }
  // 2. Inexact local GD passes at its self-measured stationarity.
  {
    bool ok = true;
    for (long j = 0; j < 100 && ok; ++j) {
      const ProxRequest req = random_request(j);
      const ProxResult res = prox_inexact_gd(problem, req, steps);
      ok = verify_aprox(problem, req, res, res.phi_grad_norm).pass;
    }
    report.add("aprox_inexact", ok, "local_steps=" + std::to_string(steps) + " requests=100");
  }
  // 3. A broken zero-step "solver" returning the anchor must fail when the
  //    estimator is large: grad phi at the anchor equals the estimator.
  {
    bool all_fail = true;
    for (long j = 0; j < 25 && all_fail; ++j) {
      const ProxRequest req = random_request(j);
      ProxResult broken;
      broken.point = req.anchor;  // zero-step "solver"
      broken.phi_grad_norm = req.estimator.norm();
      const AproxVerdict v = verify_aprox(problem, req, broken, 0.5 * broken.phi_grad_norm);
      all_fail = !v.pass && !v.stationarity_ok;
    }
    report.add("aprox_broken_fails", all_fail, "requests=25");
  }
  // 4. Hessian-similarity inequality on sampled triples.
  {
    const double delta = pc.delta;
    bool ok = true;
    long worst_j = -1;
    for (long j = 0; j < 1000; ++j) {
      const int i = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(problem.n())));
      DenseVector x(problem.dim()), y(problem.dim());
      for (int t = 0; t < problem.dim(); ++t) {
        x[t] = xs.normal();
        y[t] = xs.normal();
      }
      const DenseVector lhs = (problem.client_grad(i, x) - problem.full_grad(x)) -
                              (problem.client_grad(i, y) - problem.full_grad(y));
      if (lhs.norm() > delta * (x - y).norm() * (1.0 + 1e-8)) {
        ok = false;
        worst_j = j;
        break;
      }
    }
    report.add("delta_inequality", ok,
               ok ? "triples=1000 delta=" + fmt17(delta)
                  : "violated at triple " + std::to_string(worst_j));
  }
  // 5. Deterministic descent of the energy function on the homogenized copy
  //    (every client replaced by the population mean): no noise, so the
  //    recorded V_k must be nonincreasing up to roundoff.
  {
    SymMatrix Abar = SymMatrix::zero(problem.dim());
    DenseVector ybar = DenseVector::Zero(problem.dim());
    for (int i = 0; i < problem.n(); ++i) {
      Abar = Abar + problem.client(i).A;
      ybar += problem.client(i).y;
    }
    Abar = Abar.scaled(1.0 / problem.n());
    ybar /= static_cast<double>(problem.n());
    std::vector<ClientData> clients(static_cast<size_t>(problem.n()), ClientData{Abar, ybar});
    const FedQuadProblem homog(clients, problem.lambda());

    const double L = homog.compute_smoothness();
    const long K = 500;
    RunConfig rc;
    rc.algorithm = Algorithm::spam_exact;
    rc.schedule.kind = ScheduleKind::custom;
    rc.schedule.K = K;
    rc.schedule.gamma_override = {1.0 / (4.0 * L)};
    rc.schedule.p_override = {1.0 / static_cast<double>(K)};
    rc.K = K;
    rc.seed = seed;
    rc.record_lyapunov = true;
    rc.lyapunov_constant = LyapunovConstant::appendix;
    const RunTrace tr = run_any(homog, rc);
    bool ok = !tr.diverged && tr.rows.size() == static_cast<size_t>(K) + 1;
    if (ok) {
      const double V0 = tr.rows[0].lyapunov;
      for (size_t i = 1; i < tr.rows.size() && ok; ++i) {
        ok = tr.rows[i].lyapunov <= tr.rows[i - 1].lyapunov + 1e-12 * V0;
      }
    }
    report.add("lyapunov_descent", ok, "homogenized K=500");
  }

  fs::create_directories(args.out_dir);
  {
    std::ofstream rep(fs::path(args.out_dir) / "check_report.txt");
    for (const std::string& line : report.lines) rep << line << "\n";
  }
  {
    std::ofstream eff(fs::path(args.out_dir) / "effective.cfg");
    eff << "# effective configuration\n";
    std::string file_abs;
    if (!cfg.problem.file.empty()) {
      file_abs = fs::absolute(resolve_config_path(cfg, cfg.problem.file)).string();
    }
    echo_problem_section(eff, cfg, file_abs);
    echo_run_section(eff, cfg, seed);
  }
  for (const std::string& line : report.lines) std::cout << line << "\n";
  return report.all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

int cmd_sweep(const CliArgs& args, CliConfig cfg) {
  const uint64_t run_seed = args.seed_set ? args.seed : cfg.run.seed;
  const FedQuadProblem problem = make_problem(cfg);
  const ProblemCache pc = ProblemCache::build(problem);
  const ResolvedSetup rs = resolve_setup(cfg, problem, pc, run_seed, args.threads);

  SweepSpec spec;
  spec.base = rs.rc;
  spec.base.threads = args.threads;
  spec.output_dir = args.out_dir;
  spec.cap = cfg.sweep.cap;
  spec.floor_tail = cfg.sweep.floor_tail;

  // Missing axes collapse to the single value of the base configuration.
  const auto [gamma0, p0] = rs.schedule.at(0);
  if (cfg.sweep.p.empty()) {
    spec.p_axis = {p0};
  } else {
    spec.p_axis = cfg.sweep.p;
  }
  if (cfg.sweep.gamma.empty()) {
    spec.gamma_axis = {gamma0};
    spec.gamma_labels = {fmt17(gamma0)};
  } else {
    for (const GammaExpr& e : cfg.sweep.gamma) {
      spec.gamma_axis.push_back(e.resolve(rs.delta, rs.smoothness));
      spec.gamma_labels.push_back(e.token);
    }
  }
  if (cfg.sweep.local_steps.empty()) {
    spec.local_steps_axis = {cfg.run.local_steps};
  } else {
    spec.local_steps_axis = cfg.sweep.local_steps;
  }
  spec.B_axis = cfg.sweep.B.empty() ? std::vector<long>{cfg.run.B} : cfg.sweep.B;
  spec.seeds = cfg.sweep.seeds.empty() ? std::vector<uint64_t>{run_seed} : cfg.sweep.seeds;

  const SweepResult result = run_sweep(problem, spec, &pc);

  {
    std::ofstream eff(fs::path(args.out_dir) / "effective.cfg");
    eff << "# effective configuration\n";
    std::string file_abs;
    if (!cfg.problem.file.empty()) {
      file_abs = fs::absolute(resolve_config_path(cfg, cfg.problem.file)).string();
    }
    echo_problem_section(eff, cfg, file_abs);
    echo_schedule_section(eff, cfg, rs);
    echo_run_section(eff, cfg, run_seed);
    eff << "[sweep]\n";
    eff << "p = ";
    for (size_t i = 0; i < spec.p_axis.size(); ++i) eff << (i ? "," : "") << fmt17(spec.p_axis[i]);
    eff << "\ngamma = ";
    if (cfg.sweep.gamma.empty()) {
      eff << fmt17(spec.gamma_axis[0]);
    } else {
      for (size_t i = 0; i < cfg.sweep.gamma.size(); ++i) {
        eff << (i ? "," : "") << cfg.sweep.gamma[i].token;
      }
    }
    eff << "\nlocal_steps = ";
    for (size_t i = 0; i < spec.local_steps_axis.size(); ++i) {
      eff << (i ? "," : "")
          << (spec.local_steps_axis[i] < 0 ? std::string("exact")
                                           : std::to_string(spec.local_steps_axis[i]));
    }
    eff << "\nB = ";
    for (size_t i = 0; i < spec.B_axis.size(); ++i) eff << (i ? "," : "") << spec.B_axis[i];
    eff << "\nseeds = ";
    for (size_t i = 0; i < spec.seeds.size(); ++i) eff << (i ? "," : "") << spec.seeds[i];
    eff << "\ncap = " << spec.cap << "\n";
    eff << "floor_tail = " << fmt17(spec.floor_tail) << "\n";
    if (!eff) throw std::runtime_error("failed writing effective.cfg");
  }

  long errors = 0;
  for (const SweepCellResult& rec : result.records) {
    if (rec.status == "error") {
      ++errors;
      std::cerr << "cell " << rec.cell << " seed " << rec.seed << " failed: " << rec.note << "\n";
    }
  }
  std::cout << "wrote " << result.manifest_path << " traces=" << result.records.size()
            << " errors=" << errors << "\n";
  return errors == static_cast<long>(result.records.size()) && errors > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

int cmd_plot(const CliArgs& args, const CliConfig& cfg, bool cfg_loaded) {
  if (args.positionals.empty()) {
    throw ConfigError("plot requires at least one manifest or CSV path");
  }
  std::vector<SvgSeries> series;
  const auto add_trace = [&](const std::string& path, const std::string& label) {
    RunTrace trace;
    try {
      trace = read_trace_csv(path);
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping unreadable trace " << path << " (" << e.what() << ")\n";
      return;
    }
    if (trace.rows.empty()) {
      std::cerr << "warning: skipping empty trace " << path << "\n";
      return;
    }
    SvgSeries s;
    s.label = label;
    for (const TraceRow& r : trace.rows) {
      s.points.emplace_back(static_cast<double>(r.comm_rounds), r.rel_log);
    }
    series.push_back(std::move(s));
  };

  for (const std::string& arg : args.positionals) {
    if (arg.size() > 4 && arg.substr(arg.size() - 4) == ".csv") {
      add_trace(arg, fs::path(arg).stem().string());
      continue;
    }
    std::vector<ManifestRecord> records;
    try {
      records = read_manifest(arg);
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping unreadable manifest " << arg << " (" << e.what() << ")\n";
      continue;
    }
    const fs::path dir = fs::path(arg).parent_path();
    for (const ManifestRecord& rec : records) {
      if (rec.has("status") && rec.get("status") == "error") continue;
      const std::string label = "p=" + rec.get("p") + " g=" + rec.get("gamma_label") +
                                " ls=" + rec.get("local_steps") + " B=" + rec.get("B") +
                                " s=" + rec.get("seed");
      add_trace((dir / rec.get("file")).string(), label);
    }
  }
  if (series.empty()) {
    std::cerr << "no readable traces\n";
    return 1;
  }
  fs::create_directories(args.out_dir);
  const std::string out_path = (fs::path(args.out_dir) / "plot.svg").string();
  write_line_chart(out_path, series, "communication rounds", "log10 relative gradient norm");
  if (cfg_loaded) {
    std::ofstream eff(fs::path(args.out_dir) / "effective.cfg");
    eff << "# effective configuration\n";
    echo_problem_section(eff, cfg, cfg.problem.file);
  }
  std::cout << "wrote " << out_path << " series=" << series.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliArgs args;
  try {
    args = parse_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  }
  try {
    CliConfig cfg;
    bool cfg_loaded = false;
    if (!args.config_path.empty()) {
      cfg = load_config(args.config_path);
      cfg_loaded = true;
    }
    if (args.subcmd == "gen") return cmd_gen(args, cfg);
    if (args.subcmd == "run") return cmd_run(args, cfg);
    if (args.subcmd == "sweep") return cmd_sweep(args, cfg);
    if (args.subcmd == "check") return cmd_check(args, cfg);
    return cmd_plot(args, cfg, cfg_loaded);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
