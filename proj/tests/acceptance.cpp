// Acceptance suite: ten end-to-end properties of the optimizer library and
// CLI, each timed and reported as a single PASS/FAIL line.  Invoked as
//
//   acceptance <path-to-spamcli> <tools-dir>
//
// The CLI binary is spawned for the sweep-based and determinism criteria; the
// rest run the library in-process.  Indented "measured:" lines document the
// observed values behind each verdict.  Exit status is nonzero when any
// criterion fails, including a criterion exceeding its runtime budget.

#include "spam/config.hpp"
#include "spam/datagen.hpp"
#include "spam/harness.hpp"
#include "spam/optim.hpp"
#include "spam/problem.hpp"
#include "spam/prox.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spam;

namespace {

std::string g_cli;     // quoted path to the spamcli binary
std::string g_tools;   // tools directory holding figure1.cfg
const fs::path kScratch = "acceptance_scratch";

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
  return -2;
}

std::string q(const std::string& s) { return "\"" + s + "\""; }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmtf(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

DenseVector stream_vector(RandomStream& s, int d) {
  DenseVector v(d);
  for (int i = 0; i < d; ++i) v[i] = s.normal();
  return v;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// --------------------------------------------------------------------------
// 1. Exact prox: eps-stationarity relative to the anchor gradient, plus
//    objective decrease, across 50 randomly generated suites.
// --------------------------------------------------------------------------
bool criterion1(std::vector<std::string>& notes) {
  const double lambdas[3] = {0.0, 0.1, 1.0};
  const double heteros[4] = {0.0, 0.5, 1.0, 0.3};
  long checked = 0;
  double worst = 0.0;  // largest ratio ||grad phi(y)|| / threshold
  for (int j = 0; j < 50; ++j) {
    GenConfig gc;
    gc.seed = 1000 + static_cast<uint64_t>(j);
    gc.n = 1 + (j % 10);
    gc.d = 2 + (j * 7) % 49;
    gc.lambda = lambdas[j % 3];
    gc.hetero_scale = heteros[j % 4];
    const FedQuadProblem p = generate(gc);
    RandomStream xa(7000 + static_cast<uint64_t>(j), StreamPurpose::test, 1);
    RandomStream ge(7000 + static_cast<uint64_t>(j), StreamPurpose::test, 2);
    for (int r = 0; r < 2; ++r) {
      ProxRequest req;
      req.client = j % p.n();
      req.anchor = stream_vector(xa, p.dim());
      req.estimator = stream_vector(ge, p.dim());
      req.gamma = std::pow(10.0, -3.0 + 4.0 * ((2 * j + r) % 9) / 8.0);
      const ProxResult res = prox_exact(p, req);
      const double anchor_gn = phi_grad(p, req, req.anchor).norm();
      const double point_gn = phi_grad(p, req, res.point).norm();
      const double thr = 1e-9 * std::max(1.0, anchor_gn);
      const double phi_a = phi_value(p, req, req.anchor);
      const double phi_y = phi_value(p, req, res.point);
      worst = std::max(worst, point_gn / thr);
      if (point_gn > thr) {
        notes.push_back("stationarity violated at suite " + std::to_string(j));
        return false;
      }
      if (phi_y > phi_a + 1e-12 * std::max(1.0, std::abs(phi_a))) {
        notes.push_back("objective increase at suite " + std::to_string(j));
        return false;
      }
      ++checked;
    }
  }
  notes.push_back("measured: " + std::to_string(checked) +
                  " requests, worst stationarity ratio " + fmtf("%.3g", worst) +
                  " of the 1e-9 budget");
  return true;
}

// --------------------------------------------------------------------------
// 2. Curvature-similarity inequality: 1e4 random (client, x, y) triples obey
//    the bound with the computed constant, and a witness pair attains it.
// --------------------------------------------------------------------------
bool criterion2(std::vector<std::string>& notes) {
  const FedQuadProblem p = generate(GenConfig{});  // default suite
  const double delta = p.compute_delta();
  RandomStream pick(2024, StreamPurpose::test, 1);
  RandomStream xs(2024, StreamPurpose::test, 2);
  const auto drift = [&](int i, const DenseVector& v) {
    return (p.client_grad(i, v) - p.full_grad(v)).eval();
  };
  for (long t = 0; t < 10000; ++t) {
    const int i = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(p.n())));
    const double scale = (t % 7 == 0) ? 100.0 : 1.0;
    const DenseVector x = scale * stream_vector(xs, p.dim());
    const DenseVector y = scale * stream_vector(xs, p.dim());
    const double lhs = (drift(i, x) - drift(i, y)).norm();
    if (lhs > delta * (x - y).norm() * (1.0 + 1e-8)) {
      notes.push_back("inequality violated at triple " + std::to_string(t));
      return false;
    }
  }
  const auto [wi, wv] = p.delta_witness();
  const DenseVector zero = DenseVector::Zero(p.dim());
  const double attained = (drift(wi, wv) - drift(wi, zero)).norm();
  const double needed = 0.999 * delta * wv.norm();
  notes.push_back("measured: delta=" + fmtf("%.6g", delta) + ", witness attains " +
                  fmtf("%.4f", attained / (delta * wv.norm())) + " of the bound");
  if (attained < needed) {
    notes.push_back("witness too loose");
    return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// 3. Inexact prox contract: ten-step local descent passes the decrease +
//    stationarity check at its own measured accuracy; a zero-step "solver"
//    that returns the anchor with a nonzero estimator fails.
// --------------------------------------------------------------------------
bool criterion3(std::vector<std::string>& notes) {
  const FedQuadProblem p = generate(GenConfig{3333, 6, 20, 0.1, 1.0});
  RandomStream pick(99, StreamPurpose::test, 1);
  RandomStream xs(99, StreamPurpose::test, 2);
  RandomStream gs(99, StreamPurpose::test, 3);
  const auto random_request = [&](long j) {
    ProxRequest req;
    req.client = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(p.n())));
    req.anchor = stream_vector(xs, p.dim());
    req.estimator = stream_vector(gs, p.dim());
    req.gamma = std::pow(10.0, -2.0 + 3.0 * static_cast<double>(j % 7) / 6.0);
    return req;
  };
  for (long j = 0; j < 100; ++j) {
    const ProxRequest req = random_request(j);
    const ProxResult res = prox_inexact_gd(p, req, 10);
    if (!verify_aprox(p, req, res, res.phi_grad_norm).pass) {
      notes.push_back("self-measured contract failed at request " + std::to_string(j));
      return false;
    }
  }
  long broken_failures = 0;
  for (long j = 0; j < 25; ++j) {
    const ProxRequest req = random_request(j);
    ProxResult broken;
    broken.point = req.anchor;  // zero steps: grad phi(anchor) equals the estimator
    broken.phi_grad_norm = req.estimator.norm();
    const AproxVerdict v = verify_aprox(p, req, broken, 0.5 * broken.phi_grad_norm);
    if (!v.pass && !v.stationarity_ok) ++broken_failures;
  }
  notes.push_back("measured: 100 honest requests passed, 25/25 broken requests rejected");
  return broken_failures == 25;
}

// --------------------------------------------------------------------------
// 4. Noise-free energy descent: on a suite whose clients are all the
//    population mean, the recorded energy V_k never increases and the
//    telescoped per-step decrease dominates the weighted gradient sum.
// --------------------------------------------------------------------------
bool criterion4(std::vector<std::string>& notes) {
  const FedQuadProblem base = generate(GenConfig{4242, 5, 30, 0.1, 1.0});
  SymMatrix Abar = SymMatrix::zero(base.dim());
  DenseVector ybar = DenseVector::Zero(base.dim());
  for (int i = 0; i < base.n(); ++i) {
    Abar = Abar + base.client(i).A;
    ybar += base.client(i).y;
  }
  Abar = Abar.scaled(1.0 / base.n());
  ybar /= static_cast<double>(base.n());
  std::vector<ClientData> clients(static_cast<size_t>(base.n()), ClientData{Abar, ybar});
  const FedQuadProblem homog(clients, base.lambda());

  const double L = homog.compute_smoothness();
  const long K = 500;
  const double gamma = 1.0 / (4.0 * L);
  RunConfig rc;
  rc.algorithm = Algorithm::spam_exact;
  rc.schedule.kind = ScheduleKind::custom;
  rc.schedule.K = K;
  rc.schedule.gamma_override = {gamma};
  rc.schedule.p_override = {1.0 / static_cast<double>(K)};
  rc.K = K;
  rc.seed = 11;
  rc.record_lyapunov = true;
  rc.lyapunov_constant = LyapunovConstant::appendix;
  const RunTrace tr = run_any(homog, rc);
  if (tr.diverged || tr.rows.size() != static_cast<size_t>(K) + 1) {
    notes.push_back("run did not complete");
    return false;
  }
  const double V0 = tr.rows[0].lyapunov;
  double grad_sum = 0.0;
  for (size_t k = 1; k < tr.rows.size(); ++k) {
    if (tr.rows[k].lyapunov > tr.rows[k - 1].lyapunov + 1e-12 * V0) {
      notes.push_back("energy increased at step " + std::to_string(k));
      return false;
    }
    grad_sum += (gamma / 32.0) * tr.rows[k].grad_norm * tr.rows[k].grad_norm;
  }
  const double VK = tr.rows.back().lyapunov;
  notes.push_back("measured: V0=" + fmtf("%.6g", V0) + " VK=" + fmtf("%.6g", VK) +
                  " weighted gradient sum=" + fmtf("%.6g", grad_sum));
  if (grad_sum > V0 - VK + 1e-9) {
    notes.push_back("telescoped decrease too small");
    return false;
  }
  return true;
}

// --------------------------------------------------------------------------
// 5. Deterministic single-client limit: with one isotropic client and fresh
//    estimators (p = 1), every proximal step contracts the gradient norm by
//    exactly 1/(1 + gamma*h); the recorded trace must match within 5%.
// --------------------------------------------------------------------------
bool criterion5(std::vector<std::string>& notes) {
  const int d = 10;
  RandomStream ys(555, StreamPurpose::test, 1);
  std::vector<ClientData> clients;
  clients.push_back(ClientData{SymMatrix::identity(d), stream_vector(ys, d)});
  const FedQuadProblem p(std::move(clients), 0.1);
  const double h = 2.0 + 0.1;  // curvature of 2 A^2 + lambda I with A = I
  const double gamma = 0.1 / h;
  const double factor = 1.0 / (1.0 + gamma * h);

  RunConfig rc;
  rc.algorithm = Algorithm::spam_exact;
  rc.schedule.kind = ScheduleKind::custom;
  rc.schedule.K = 100;
  rc.schedule.gamma_override = {gamma};
  rc.schedule.p_override = {1.0};
  rc.K = 100;
  rc.seed = 777;
  const RunTrace tr = run_any(p, rc);
  if (tr.diverged || tr.rows.size() != 101) {
    notes.push_back("run did not complete");
    return false;
  }
  for (size_t k = 0; k + 1 < tr.rows.size(); ++k) {
    const double ratio = tr.rows[k + 1].grad_norm / tr.rows[k].grad_norm;
    if (!(ratio >= 0.95 * factor && ratio <= 1.05 * factor)) {
      notes.push_back("contraction ratio " + fmtf("%.6f", ratio) + " at step " +
                      std::to_string(k) + " outside 5% of " + fmtf("%.6f", factor));
      return false;
    }
    if (tr.rows[k + 1].f_gap > tr.rows[k].f_gap * (1.0 + 1e-12)) {
      notes.push_back("objective gap increased at step " + std::to_string(k));
      return false;
    }
  }
  notes.push_back("measured: 100 steps at factor " + fmtf("%.6f", factor) +
                  ", all ratios within 5%");
  return true;
}

// --------------------------------------------------------------------------
// 6. Decaying schedule: averaged over five seeds on the default suite, the
//    running stepsize-weighted mean of squared gradient norms decays with a
//    log-log slope in [-0.95, -0.45] over the window [1e3, 1e5].
// --------------------------------------------------------------------------
bool criterion6(std::vector<std::string>& notes) {
  const FedQuadProblem p = generate(GenConfig{});  // default suite
  const ProblemCache pc = ProblemCache::build(p);
  const long K = 100000;
  std::vector<RunTrace> traces;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig rc;
    rc.algorithm = Algorithm::spam_exact;
    rc.schedule.kind = ScheduleKind::decaying;
    rc.schedule.delta = pc.delta;
    rc.schedule.K = K;
    rc.K = K;
    rc.seed = seed;
    RunTrace tr = run_any(p, rc, &pc);
    if (tr.diverged) {
      notes.push_back("seed " + std::to_string(seed) + " diverged");
      return false;
    }
    traces.push_back(std::move(tr));
  }
  const RateFit fit = fit_rate_averaged(traces, 1000, K);
  notes.push_back("measured: slope=" + fmtf("%.4f", fit.slope) + " r2=" + fmtf("%.4f", fit.r2));
  return fit.slope >= -0.95 && fit.slope <= -0.45;
}

// --------------------------------------------------------------------------
// 7. Parameter sweep trade-offs, from the shipped figure1.cfg sweep:
//    (a) the error floor separates across the 4x stepsize window.  Constant-
//        parameter floors scale like gamma^(1/3), so this window yields a
//        ~4^(1/3) = 1.6x separation; the check asserts ratio >= 1.2 per
//        solver panel for a majority of seeds and prints the measured values.
//    (b) at the large stepsize, the exact solver reaches 1.5x its own floor
//        in fewer communication rounds than the 1-step solver, while its
//        floor is at least as high.
//    (c) at the small stepsize, exact and 10-step floors agree within 3x.
// --------------------------------------------------------------------------
using CellMap = std::map<uint64_t, ManifestRecord>;

CellMap select_cells(const std::vector<ManifestRecord>& recs, double p, const std::string& glabel,
                     const std::string& ls) {
  CellMap out;
  for (const ManifestRecord& r : recs) {
    if (r.get("status") != "ok") continue;
    if (std::abs(std::strtod(r.get("p").c_str(), nullptr) - p) > 1e-9) continue;
    if (r.get("gamma_label") != glabel || r.get("local_steps") != ls) continue;
    out.emplace(std::strtoull(r.get("seed").c_str(), nullptr, 10), r);
  }
  return out;
}

double cell_floor(const ManifestRecord& r) { return std::strtod(r.get("floor").c_str(), nullptr); }

long comm_to_reach(const fs::path& dir, const ManifestRecord& r, double threshold) {
  const RunTrace tr = read_trace_csv((dir / r.get("file")).string());
  for (const TraceRow& row : tr.rows) {
    if (row.grad_norm <= threshold) return row.comm_rounds;
  }
  return LONG_MAX;
}

bool criterion7(std::vector<std::string>& notes) {
  const fs::path out = kScratch / "f1";
  const std::string cfg = (fs::path(g_tools) / "figure1.cfg").string();
  if (shell(g_cli + " sweep --config " + q(cfg) + " --out " + q(out.string()) +
            " > /dev/null 2> /dev/null") != 0) {
    notes.push_back("sweep command failed");
    return false;
  }
  const auto recs = read_manifest((out / "manifest.txt").string());
  if (recs.size() != 60) {
    notes.push_back("expected 60 sweep records, got " + std::to_string(recs.size()));
    return false;
  }

  bool ok = true;
  // (a) floor separation across the stepsize window, per solver panel.
  for (const std::string ls : {"exact", "1", "10"}) {
    const CellMap hi = select_cells(recs, 0.9, "2/delta", ls);
    const CellMap lo = select_cells(recs, 0.9, "0.5/delta", ls);
    if (hi.size() != 5 || lo.size() != 5) {
      notes.push_back("panel ls=" + ls + " incomplete");
      return false;
    }
    int wins = 0;
    std::vector<double> ratios;
    for (const auto& [seed, rec] : hi) {
      const double ratio = cell_floor(rec) / cell_floor(lo.at(seed));
      ratios.push_back(ratio);
      if (ratio >= 1.2) ++wins;
    }
    notes.push_back("measured (a) ls=" + ls + ": median floor ratio " +
                    fmtf("%.2f", median_of(ratios)) + ", " + std::to_string(wins) +
                    "/5 seeds above 1.2");
    ok = ok && wins >= 3;
  }
  // (b) speed vs neighborhood at the large stepsize.
  {
    const CellMap ex = select_cells(recs, 0.9, "2/delta", "exact");
    const CellMap one = select_cells(recs, 0.9, "2/delta", "1");
    if (ex.size() != 5 || one.size() != 5) {
      notes.push_back("clause (b) cells incomplete");
      return false;
    }
    int wins = 0;
    std::string detail;
    for (const auto& [seed, rec] : ex) {
      const ManifestRecord& other = one.at(seed);
      const double fe = cell_floor(rec), fo = cell_floor(other);
      const long ce = comm_to_reach(out, rec, 1.5 * fe);
      const long co = comm_to_reach(out, other, 1.5 * fo);
      if (ce < co && fe >= fo) ++wins;
      if (detail.empty()) {
        detail = "seed " + std::to_string(seed) + ": comm " + std::to_string(ce) + " vs " +
                 std::to_string(co) + ", floors " + fmtf("%.0f", fe) + " vs " + fmtf("%.0f", fo);
      }
    }
    notes.push_back("measured (b): " + std::to_string(wins) + "/5 seeds (" + detail + ")");
    ok = ok && wins >= 3;
  }
  // (c) solver-accuracy insensitivity at the small stepsize.
  for (const double p : {0.1, 0.9}) {
    const CellMap ex = select_cells(recs, p, "0.5/delta", "exact");
    const CellMap ten = select_cells(recs, p, "0.5/delta", "10");
    if (ex.size() != 5 || ten.size() != 5) {
      notes.push_back("clause (c) cells incomplete");
      return false;
    }
    int wins = 0;
    double worst = 1.0;
    for (const auto& [seed, rec] : ex) {
      const double a = cell_floor(rec), b = cell_floor(ten.at(seed));
      const double ratio = std::max(a, b) / std::min(a, b);
      worst = std::max(worst, ratio);
      if (ratio <= 3.0) ++wins;
    }
    notes.push_back("measured (c) p=" + fmtf("%.1f", p) + ": worst exact/10-step floor ratio " +
                    fmtf("%.2f", worst) + ", " + std::to_string(wins) + "/5 within 3x");
    ok = ok && wins >= 3;
  }
  return ok;
}

// --------------------------------------------------------------------------
// 8. Cohort-size variance reduction: at fixed (gamma = 1/(4 delta), p from
//    the partial-participation rule at B=1), the mean tail estimator error is
//    lower with B=16 than with B=1 for at least 4 of 5 seeds.
// --------------------------------------------------------------------------
bool criterion8(std::vector<std::string>& notes) {
  const FedQuadProblem p = generate(GenConfig{808, 32, 40, 0.1, 1.0});
  const ProblemCache pc = ProblemCache::build(p);
  const double gamma = 1.0 / (4.0 * pc.delta);
  bool violated = false;
  const double prob = schedule_pp(pc.delta, gamma, 1, &violated);
  const long K = 400;

  const auto tail_err = [&](long B, uint64_t seed) {
    RunConfig rc;
    rc.algorithm = Algorithm::spam_pp;
    rc.schedule.kind = ScheduleKind::custom;
    rc.schedule.K = K;
    rc.schedule.gamma_override = {gamma};
    rc.schedule.p_override = {prob};
    rc.K = K;
    rc.B = B;
    rc.seed = seed;
    const RunTrace tr = run_any(p, rc, &pc);
    double sum = 0.0;
    const size_t lo = tr.rows.size() - 100;
    for (size_t i = lo; i < tr.rows.size(); ++i) sum += tr.rows[i].estimator_err;
    return sum / 100.0;
  };

  int wins = 0;
  std::vector<double> ratios;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const double e1 = tail_err(1, seed);
    const double e16 = tail_err(16, seed);
    ratios.push_back(e1 / e16);
    if (e16 < e1) ++wins;
  }
  notes.push_back("measured: p=" + fmtf("%.6f", prob) + ", " + std::to_string(wins) +
                  "/5 seeds improved, median error ratio " + fmtf("%.1f", median_of(ratios)));
  return wins >= 4;
}

// --------------------------------------------------------------------------
// 9. Thread-count determinism through the CLI: three run configurations
//    produce byte-identical traces with --threads 1 and --threads 8.
// --------------------------------------------------------------------------
bool criterion9(std::vector<std::string>& notes) {
  const std::string problem_block =
      "[problem]\nseed = 99\nn = 10\nd = 30\nlambda = 0.1\nhetero_scale = 1.0\n"
      "[schedule]\nkind = custom\ngamma = 0.25/delta\np = 0.5\n";
  const struct {
    const char* name;
    const char* run_block;
  } cases[3] = {
      {"exactprox", "[run]\nalgorithm = spam_exact\nK = 250\nseed = 4\n"},
      {"cohort", "[run]\nalgorithm = spam_pp\nK = 250\nB = 5\nlocal_steps = 0\nseed = 4\n"},
      {"averaged", "[run]\nalgorithm = spam_ppa\nK = 250\nB = 5\nlocal_steps = 3\nseed = 4\n"},
  };
  for (const auto& c : cases) {
    const fs::path cfg = kScratch / (std::string(c.name) + ".cfg");
    write_file(cfg, problem_block + c.run_block);
    const fs::path out1 = kScratch / (std::string(c.name) + "_t1");
    const fs::path out8 = kScratch / (std::string(c.name) + "_t8");
    if (shell(g_cli + " run --config " + q(cfg.string()) + " --threads 1 --out " +
              q(out1.string()) + " > /dev/null 2> /dev/null") != 0 ||
        shell(g_cli + " run --config " + q(cfg.string()) + " --threads 8 --out " +
              q(out8.string()) + " > /dev/null 2> /dev/null") != 0) {
      notes.push_back(std::string(c.name) + " run failed");
      return false;
    }
    if (slurp(out1 / "trace.csv") != slurp(out8 / "trace.csv")) {
      notes.push_back(std::string(c.name) + " traces differ across thread counts");
      return false;
    }
  }
  notes.push_back("measured: 3 configurations byte-identical at 1 and 8 threads");
  return true;
}

// --------------------------------------------------------------------------
// 10. Communication accounting: after K iterations with m warm-up samples the
//     final communication count is exactly m+K, m+K(B+1), or m+2BK depending
//     on the algorithm, and every intermediate row advances by the same
//     per-iteration increment.
// --------------------------------------------------------------------------
bool criterion10(std::vector<std::string>& notes) {
  const FedQuadProblem p = generate(GenConfig{5, 4, 6, 0.1, 1.0});
  const struct {
    Algorithm alg;
    long m, K, B, cpi;
  } cases[] = {
      {Algorithm::spam_exact, 0, 10, 1, 1}, {Algorithm::spam_exact, 4, 7, 1, 1},
      {Algorithm::spam_pp, 0, 10, 1, 2},    {Algorithm::spam_pp, 4, 7, 3, 4},
      {Algorithm::spam_ppa, 0, 10, 1, 2},   {Algorithm::spam_ppa, 4, 7, 3, 6},
  };
  for (const auto& c : cases) {
    RunConfig rc;
    rc.algorithm = c.alg;
    rc.schedule.kind = ScheduleKind::custom;
    rc.schedule.K = c.K;
    rc.schedule.gamma_override = {0.01};
    rc.schedule.p_override = {0.5};
    rc.K = c.K;
    rc.B = c.B;
    rc.warmup_samples = c.m;
    rc.seed = 3;
    const RunTrace tr = run_any(p, rc);
    if (tr.rows.size() != static_cast<size_t>(c.K) + 1) {
      notes.push_back("unexpected trace length");
      return false;
    }
    for (const TraceRow& row : tr.rows) {
      if (row.comm_rounds != c.m + row.k * c.cpi) {
        notes.push_back("row " + std::to_string(row.k) + " has comm " +
                        std::to_string(row.comm_rounds) + ", expected " +
                        std::to_string(c.m + row.k * c.cpi));
        return false;
      }
    }
  }
  notes.push_back("measured: six (algorithm, m, K, B) cases match exactly");
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <spamcli> <tools-dir>\n");
    return 2;
  }
  g_cli = q(argv[1]);
  g_tools = argv[2];
  fs::remove_all(kScratch);
  fs::create_directories(kScratch);

  const struct {
    int num;
    const char* desc;
    double budget_s;
    std::function<bool(std::vector<std::string>&)> fn;
  } criteria[] = {
      {1, "exact prox is stationary and non-increasing on 50 random suites", 5, criterion1},
      {2, "curvature-similarity bound holds on 10^4 triples with a tight witness", 10, criterion2},
      {3, "inexact prox passes the contract at its self-measured accuracy", 5, criterion3},
      {4, "energy function descends monotonically on a noise-free suite", 5, criterion4},
      {5, "single-client runs contract at the closed-form proximal factor", 1, criterion5},
      {6, "decaying schedule yields the predicted power-law decay rate", 180, criterion6},
      {7, "stepsize sweep reproduces the floor and speed trade-offs", 300, criterion7},
      {8, "larger cohorts reduce estimator error at fixed parameters", 120, criterion8},
      {9, "traces are byte-identical across worker-thread counts", 60, criterion9},
      {10, "communication accounting matches the closed-form counts", 1, criterion10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    std::vector<std::string> notes;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      ok = c.fn(notes);
    } catch (const std::exception& e) {
      notes.push_back(std::string("exception: ") + e.what());
      ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ok && elapsed > c.budget_s) {
      ok = false;
      notes.push_back("runtime budget of " + fmtf("%.0f", c.budget_s) + "s exceeded");
    }
    std::printf("%s criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", c.num, c.desc, elapsed);
    for (const std::string& n : notes) std::printf("  %s\n", n.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }

  if (failures == 0) {
    std::error_code ec;
    fs::remove_all(kScratch, ec);
    std::printf("acceptance: all 10 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
