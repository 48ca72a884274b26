#ifndef SPAM_OPTIM_HPP
#define SPAM_OPTIM_HPP

// The stochastic proximal-point algorithm family with momentum variance
// reduction (SPAM): gradient estimator, parameter schedules, Lyapunov
// diagnostics, and the outer loops
//
//   spam_exact / spam_inexact : single sampled client per round
//   spam_pp                   : cohort-averaged estimator, one prox client
//   spam_ppa                  : cohort-averaged estimator and prox average
//   sgd_baseline              : plain stochastic gradient step (plumbing)
//
// Iteration k maps x_k -> x_{k+1}: sample client(s), blend the estimator
//   g_k = grad f_xi(x_k) + (1 - p_k) * (g_{k-1} - grad f_xi(x_{k-1}))
// (with x_{-1} = x_0 at k = 0), then run the prox step with stepsize gamma_k.
//
// Trace convention: rows 0..K.  Row 0 pairs x_0 with the warm-up estimator;
// row k >= 1 pairs x_k with the estimator blended at x_k during iteration k.
// Row K therefore performs one extra estimator blend at x_K (sampling round
// K's clients) without stepping; that refresh is NOT counted in comm_rounds,
// which stay exactly m + K (spam), m + K(B+1) (spam_pp), m + 2BK (spam_ppa).

#include "spam/datagen.hpp"
#include "spam/parallel.hpp"
#include "spam/problem.hpp"
#include "spam/prox.hpp"
#include "spam/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace spam {

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

struct MvrState {
  DenseVector g;       // estimator g_{k-1}
  DenseVector x_prev;  // iterate x_{k-1}
  long k = 0;
};

// g_k = grad_at_xk + (1 - p_k) * (g_{k-1} - grad_at_xprev); both gradients
// must come from the same sampled client.
inline DenseVector mvr_update(const MvrState& state, double p_k, const DenseVector& grad_at_xk,
                              const DenseVector& grad_at_xprev) {
  if (p_k < 0.0 || p_k > 1.0) throw std::invalid_argument("mvr_update: p_k must lie in [0, 1]");
  if (state.g.size() != grad_at_xk.size() || grad_at_xprev.size() != grad_at_xk.size()) {
    throw std::invalid_argument("mvr_update: dimension mismatch");
  }
  return grad_at_xk + (1.0 - p_k) * (state.g - grad_at_xprev);
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

// Constant schedule: gamma = min(1/delta, (F / (2 delta^2 sigma^2 K))^{1/3}),
// clamped to 1/(4 delta) so the constant-kind admissibility condition below
// holds; p = max(gamma^2 delta^2, 1/K).  The delta = 0 degenerate branch
// substitutes gamma = 1/(4L), p = 1/K (theory allows any gamma at delta = 0;
// the L-based clamp keeps inner solvers well posed).
inline std::pair<double, double> schedule_constant(double delta, double sigma2, long K,
                                                   double F_est, double smoothness_L = 0.0) {
  if (K < 1) throw std::invalid_argument("schedule_constant: K must be >= 1");
  if (delta < 0.0 || sigma2 < 0.0 || F_est < 0.0) {
    throw std::invalid_argument("schedule_constant: inputs must be nonnegative");
  }
  if (delta == 0.0) {
    if (!(smoothness_L > 0.0)) {
      throw std::invalid_argument("schedule_constant: delta = 0 branch needs smoothness L > 0");
    }
    return {1.0 / (4.0 * smoothness_L), 1.0 / static_cast<double>(K)};
  }
  double gamma = 1.0 / delta;
  // F = 0 (already optimal) behaves like sigma^2 = 0: no noise-driven clamp.
  if (sigma2 > 0.0 && F_est > 0.0) {
    const double cube = std::cbrt(F_est / (2.0 * delta * delta * sigma2 * static_cast<double>(K)));
    gamma = std::min(gamma, cube);
  }
  gamma = std::min(gamma, 1.0 / (4.0 * delta));  // admissibility clamp
  const double p = std::max(gamma * gamma * delta * delta, 1.0 / static_cast<double>(K));
  return {gamma, p};
}

// Decaying schedule: gamma_k = 1 / (4 delta k^{1/3}),
// p_k = 96 delta^2 gamma_k^2 / (96 delta^2 gamma_k^2 + 1), defined for k >= 1.
inline std::pair<double, double> schedule_decaying(double delta, long k) {
  if (k < 1) throw std::invalid_argument("schedule_decaying: k must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("schedule_decaying: delta must be positive");
  const double gamma = 1.0 / (4.0 * delta * std::cbrt(static_cast<double>(k)));
  const double t = 96.0 * delta * delta * gamma * gamma;
  return {gamma, t / (t + 1.0)};
}

// Partial-participation momentum p_k = 96 d^2 g^2 / (96 d^2 g^2 + B^2).
// The accompanying stepsize condition gamma <= 1/(4 delta) is reported, not
// enforced: a violation sets *violated and the caller records a theory flag.
inline double schedule_pp(double delta, double gamma_k, long B, bool* violated = nullptr) {
  if (B < 1) throw std::invalid_argument("schedule_pp: B must be >= 1");
  if (!(gamma_k > 0.0) || delta < 0.0) {
    throw std::invalid_argument("schedule_pp: gamma must be positive, delta nonnegative");
  }
  if (violated) {
    *violated = delta > 0.0 && gamma_k > (1.0 + 1e-12) / (4.0 * delta);
  }
  const double t = 96.0 * delta * delta * gamma_k * gamma_k;
  return t / (t + static_cast<double>(B) * static_cast<double>(B));
}

enum class ScheduleKind { constant, decaying, pp_constant, pp_decaying, custom };

struct ScheduleError : std::invalid_argument {
  explicit ScheduleError(const std::string& what) : std::invalid_argument(what) {}
};

// Per-iteration (gamma_k, p_k) source.  Non-custom kinds derive both values
// from (delta, sigma2, K, B, F_est); explicit override lists replace either
// component (entry min(k, size-1) applies at iteration k, so a single entry
// acts as a constant).  Emitted pairs are validated: gamma_k > 0, p_k in
// (0, 1], and the kind's stepsize condition (see check()).
struct Schedule {
  ScheduleKind kind = ScheduleKind::custom;
  double delta = 0.0;
  double sigma2 = 0.0;
  double F_est = 0.0;
  double smoothness = 0.0;  // used only by the delta = 0 branch
  long K = 1;
  long B = 1;
  std::vector<double> gamma_override;
  std::vector<double> p_override;

  std::pair<double, double> at(long k) const {
    double gamma;
    if (!gamma_override.empty()) {
      gamma = pick(gamma_override, k);
    } else {
      gamma = default_gamma(k);
    }
    double p;
    if (!p_override.empty()) {
      p = pick(p_override, k);
    } else {
      p = default_p(k, gamma);
    }
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
      throw ScheduleError("schedule emitted negative or non-finite gamma");
    }
    if (!(p > 0.0) || p > 1.0) throw ScheduleError("schedule emitted p outside (0, 1]");
    return {gamma, p};
  }

  // Generation-time admissibility.  Returns a theory-violation note for the
  // soft pp condition (empty when clean); hard inconsistencies throw.
  // gamma = 0 is rejected except when the caller opts in (the plain-SGD
  // baseline treats gamma = 0 as a frozen run; the SPAM prox step needs
  // gamma > 0).
  std::string check(bool allow_zero_gamma = false) const {
    if (K < 1) throw ScheduleError("schedule: K must be >= 1");
    if (kind == ScheduleKind::custom && (gamma_override.empty() || p_override.empty())) {
      throw ScheduleError("schedule: custom kind requires explicit gamma and p");
    }
    std::string note;
    long probe = 4;
    probe = std::max(probe, static_cast<long>(gamma_override.size()));
    probe = std::max(probe, static_cast<long>(p_override.size()));
    probe = std::min(probe, K);
    for (long k = 0; k <= probe; ++k) {
      const auto [gamma, p] = at(k);
      (void)p;
      if (!allow_zero_gamma && !(gamma > 0.0)) {
        throw ScheduleError("schedule emitted nonpositive gamma");
      }
      if (kind == ScheduleKind::constant && delta > 0.0) {
        // Constant-kind admissibility, checked with 1e-9 relative slack:
        // gamma^2 <= 1/(16 delta^2)  and  3 gamma^2 delta^2 (1-p) <= 4p.
        const double g2 = gamma * gamma;
        const bool ok16 = g2 * 16.0 * delta * delta <= 1.0 + 1e-9;
        const bool ok_p = g2 * 3.0 * delta * delta * (1.0 - p) <= 4.0 * p * (1.0 + 1e-9);
        if (!ok16 || !ok_p) throw ScheduleError("schedule: constant kind violates stepsize condition");
      }
      if (kind == ScheduleKind::decaying && delta > 0.0) {
        if (gamma > (1.0 + 1e-12) / (4.0 * delta)) {
          throw ScheduleError("schedule: decaying kind violates gamma <= 1/(4 delta)");
        }
      }
      if ((kind == ScheduleKind::pp_constant || kind == ScheduleKind::pp_decaying) &&
          delta > 0.0 && gamma > (1.0 + 1e-12) / (4.0 * delta) && note.empty()) {
        note = "pp stepsize condition gamma <= 1/(4 delta) violated";
      }
    }
    return note;
  }

 private:
  static double pick(const std::vector<double>& v, long k) {
    const size_t idx = std::min<size_t>(static_cast<size_t>(k < 0 ? 0 : k), v.size() - 1);
    return v[idx];
  }

  double default_gamma(long k) const {
    switch (kind) {
      case ScheduleKind::constant:
        return schedule_constant(delta, sigma2, K, F_est, smoothness).first;
      case ScheduleKind::decaying: {
        if (delta == 0.0) return degenerate_gamma();
        return schedule_decaying(delta, std::max<long>(k, 1)).first;
      }
      case ScheduleKind::pp_constant:
        if (delta == 0.0) return degenerate_gamma();
        return 1.0 / (4.0 * delta);
      case ScheduleKind::pp_decaying: {
        if (delta == 0.0) return degenerate_gamma();
        return 1.0 / (4.0 * delta * std::cbrt(static_cast<double>(std::max<long>(k, 1))));
      }
      case ScheduleKind::custom:
        throw ScheduleError("schedule: custom kind requires explicit gamma");
    }
    throw ScheduleError("schedule: unknown kind");
  }

  double default_p(long k, double gamma) const {
    switch (kind) {
      case ScheduleKind::constant:
        if (gamma_override.empty()) {
          return schedule_constant(delta, sigma2, K, F_est, smoothness).second;
        }
        return std::max(gamma * gamma * delta * delta, 1.0 / static_cast<double>(K));
      case ScheduleKind::decaying:
        if (delta == 0.0) return 1.0 / static_cast<double>(K);
        (void)k;
        {
          const double t = 96.0 * delta * delta * gamma * gamma;
          return t / (t + 1.0);
        }
      case ScheduleKind::pp_constant:
      case ScheduleKind::pp_decaying: {
        if (delta == 0.0) return 1.0 / static_cast<double>(K);
        return schedule_pp(delta, gamma, B);
      }
      case ScheduleKind::custom:
        throw ScheduleError("schedule: custom kind requires explicit p");
    }
    throw ScheduleError("schedule: unknown kind");
  }

  double degenerate_gamma() const {
    if (!(smoothness > 0.0)) {
      throw ScheduleError("schedule: delta = 0 branch needs smoothness L > 0");
    }
    return 1.0 / (4.0 * smoothness);
  }
};

// ---------------------------------------------------------------------------
// Run configuration and traces
// ---------------------------------------------------------------------------

enum class Algorithm { spam_exact, spam_inexact, spam_pp, spam_ppa, sgd_baseline };
enum class LyapunovConstant { main_text, appendix };
enum class ProxClientRule { cohort, fresh };
enum class CohortSampling { without_replacement, with_replacement };

struct RunConfig {
  Algorithm algorithm = Algorithm::spam_exact;
  Schedule schedule;
  long K = 0;
  long B = 1;               // cohort size for spam_pp / spam_ppa
  long local_steps = 0;     // 0 = exact prox; >= 1 = local GD steps
  long warmup_samples = 0;  // m
  bool warmup_stratified = false;
  uint64_t seed = 0;
  bool record_lyapunov = false;
  LyapunovConstant lyapunov_constant = LyapunovConstant::appendix;
  ProxClientRule prox_client = ProxClientRule::cohort;
  CohortSampling cohort_sampling = CohortSampling::without_replacement;
  int threads = 1;
};

struct TraceRow {
  long k = 0;
  double grad_norm = 0.0;      // ||grad f(x_k)|| (true full gradient)
  double rel_log = 0.0;        // log10(grad_norm / grad_norm_0)
  double f_gap = 0.0;          // f(x_k) - f_inf
  double estimator_err = 0.0;  // ||g_k - grad f(x_k)||^2
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  long comm_rounds = 0;
  double gamma_k = 0.0;
  double p_k = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  bool diverged = false;
  long diverged_at = -1;
  bool theory_violation = false;
  std::string theory_note;
};

// Lyapunov value V = f(x) - f_inf + c * gamma / (2p - p^2) * ||g - grad f(x)||^2
// with c = 15/16 (main_text) or c = 3 (appendix).
inline double lyapunov_constant_value(LyapunovConstant variant) {
  return variant == LyapunovConstant::main_text ? 15.0 / 16.0 : 3.0;
}

inline double lyapunov_value(const FedQuadProblem& p, const DenseVector& x_k,
                             const DenseVector& g_k, double gamma_k, double p_k,
                             LyapunovConstant variant) {
  if (!(p_k > 0.0) || p_k >= 2.0) {
    throw std::invalid_argument("lyapunov_value: p_k must lie in (0, 2)");
  }
  const auto [x_star, f_inf] = p.solve_exact();
  (void)x_star;
  const double err2 = (g_k - p.full_grad(x_k)).squaredNorm();
  const double c = lyapunov_constant_value(variant);
  return p.value(x_k) - f_inf + c * gamma_k / (2.0 * p_k - p_k * p_k) * err2;
}

// ---------------------------------------------------------------------------
// Sampling and warm-up
// ---------------------------------------------------------------------------

// Cohort for round `round`: B distinct clients (partial Fisher-Yates) or B
// independent draws.  spam/sgd use B = 1, so a pp run with B = 1 samples the
// same client sequence and couples pathwise with the single-client loop.
inline std::vector<int> sample_cohort(uint64_t seed, long round, long B, int n,
                                      CohortSampling mode) {
  if (B < 1 || B > n) throw std::invalid_argument("sample_cohort: need 1 <= B <= n");
  RandomStream stream(seed, StreamPurpose::cohort, static_cast<uint64_t>(round));
  std::vector<int> out;
  out.reserve(static_cast<size_t>(B));
  if (mode == CohortSampling::with_replacement) {
    for (long j = 0; j < B; ++j) {
      out.push_back(static_cast<int>(stream.uniform_below(static_cast<uint64_t>(n))));
    }
    return out;
  }
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  for (long j = 0; j < B; ++j) {
    const uint64_t r = stream.uniform_below(static_cast<uint64_t>(n - j));
    std::swap(idx[static_cast<size_t>(j)], idx[static_cast<size_t>(j) + r]);
    out.push_back(idx[static_cast<size_t>(j)]);
  }
  return out;
}

// Warm-up estimator at x0: mean of m sampled client gradients (one
// communication each, accounted by the caller).  m = 0 returns the gradient
// of a single fresh sample at zero accounted cost — the run's communication
// contract m + K treats that draw as folded into round 0's exchange.  The
// stratified option cycles clients j mod n, so m = n*t reproduces the full
// gradient exactly.
inline DenseVector g0_warmup(const FedQuadProblem& p, const DenseVector& x0, long m,
                             uint64_t seed, bool stratified = false) {
  if (m < 0) throw std::invalid_argument("g0_warmup: m must be nonnegative");
  RandomStream stream(seed, StreamPurpose::warmup, 0);
  const long count = std::max<long>(m, 1);
  DenseVector g = DenseVector::Zero(p.dim());
  for (long j = 0; j < count; ++j) {
    const int xi = stratified
                       ? static_cast<int>(j % p.n())
                       : static_cast<int>(stream.uniform_below(static_cast<uint64_t>(p.n())));
    g += p.client_grad(xi, x0);
  }
  return g / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Outer loops
// ---------------------------------------------------------------------------

namespace detail {

inline long per_iteration_comm(Algorithm a, long B) {
  switch (a) {
    case Algorithm::spam_pp:
      return B + 1;
    case Algorithm::spam_ppa:
      return 2 * B;
    default:
      return 1;
  }
}

inline bool uses_cohort(Algorithm a) {
  return a == Algorithm::spam_pp || a == Algorithm::spam_ppa;
}

// Cached warm-up twin of g0_warmup (identical sampling; gradients through the
// problem cache).
inline DenseVector g0_warmup_cached(const ProblemCache& pc, const DenseVector& x0, long m,
                                    uint64_t seed, bool stratified) {
  RandomStream stream(seed, StreamPurpose::warmup, 0);
  const long count = std::max<long>(m, 1);
  DenseVector g = DenseVector::Zero(pc.dim);
  for (long j = 0; j < count; ++j) {
    const int xi = stratified
                       ? static_cast<int>(j % pc.n)
                       : static_cast<int>(stream.uniform_below(static_cast<uint64_t>(pc.n)));
    g += pc.client_grad(xi, x0);
  }
  return g / static_cast<double>(count);
}

struct RunEngine {
  const FedQuadProblem& problem;
  const ProblemCache& pc;
  const RunConfig& cfg;
  std::unique_ptr<ThreadPool> pool;

  RunEngine(const FedQuadProblem& p, const ProblemCache& c, const RunConfig& rc)
      : problem(p), pc(c), cfg(rc) {
    if (rc.threads > 1) pool = std::make_unique<ThreadPool>(rc.threads);
  }

  void for_each(long items, const std::function<void(long)>& fn) {
    if (pool) {
      pool->run_indexed(items, fn);
    } else {
      for (long i = 0; i < items; ++i) fn(i);
    }
  }

  // Cohort-averaged MVR blend for round k (slot-parallel, ordered reduce).
  DenseVector blended_estimator(const std::vector<int>& cohort, double p_k,
                                const DenseVector& x, const DenseVector& x_prev,
                                const DenseVector& g_prev) {
    const long B = static_cast<long>(cohort.size());
    std::vector<DenseVector> slots(static_cast<size_t>(B));
    for_each(B, [&](long j) {
      const int i = cohort[static_cast<size_t>(j)];
      slots[static_cast<size_t>(j)] =
          pc.client_grad(i, x) + (1.0 - p_k) * (g_prev - pc.client_grad(i, x_prev));
    });
    DenseVector g = slots[0];
    for (long j = 1; j < B; ++j) g += slots[static_cast<size_t>(j)];
    return g / static_cast<double>(B);
  }

  DenseVector prox_point(int client, const DenseVector& x, const DenseVector& g, double gamma) {
    ProxRequest req{client, x, g, gamma};
    if (cfg.local_steps == 0) return prox_point_cached(pc, req);
    return prox_point_inexact_cached(pc, req, cfg.local_steps);
  }
};

}  // namespace detail

// Shared engine behind run_spam / run_spam_pp / run_spam_ppa / run_sgd_baseline.
inline RunTrace run_any(const FedQuadProblem& problem, const RunConfig& cfg,
                        const ProblemCache* cache = nullptr) {
  const Algorithm alg = cfg.algorithm;
  if (cfg.K < 0) throw std::invalid_argument("run: K must be nonnegative");
  if (cfg.local_steps < 0) throw std::invalid_argument("run: local_steps must be nonnegative");
  if (alg == Algorithm::spam_inexact && cfg.local_steps < 1) {
    throw std::invalid_argument("run: spam_inexact requires local_steps >= 1");
  }
  const long B = detail::uses_cohort(alg) ? cfg.B : 1;
  if (detail::uses_cohort(alg) && (cfg.B < 1 || cfg.B > problem.n())) {
    throw std::invalid_argument("run: cohort size B must satisfy 1 <= B <= n");
  }

  std::unique_ptr<ProblemCache> owned;
  if (!cache) {
    owned = std::make_unique<ProblemCache>(ProblemCache::build(problem));
    cache = owned.get();
  }
  const ProblemCache& pc = *cache;

  RunTrace trace;
  const std::string schedule_note = cfg.schedule.check(alg == Algorithm::sgd_baseline);
  if (!schedule_note.empty()) {
    trace.theory_violation = true;
    trace.theory_note = schedule_note;
  }

  detail::RunEngine eng(problem, pc, cfg);

  const DenseVector x0 = generate_x0(cfg.seed, problem.dim());
  const long m = cfg.warmup_samples;
  const DenseVector g_warm =
      detail::g0_warmup_cached(pc, x0, m, cfg.seed, cfg.warmup_stratified);
  const long cpi = detail::per_iteration_comm(alg, B);

  const double gn0 = pc.full_grad(x0).norm();
  const double lyap_c = lyapunov_constant_value(cfg.lyapunov_constant);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  trace.rows.reserve(static_cast<size_t>(cfg.K) + 1);
  const auto record = [&](long k, const DenseVector& x, const DenseVector& g, double gamma_k,
                          double p_k) -> bool {
    const auto [f, grad] = pc.value_and_grad(x);
    const double gn = grad.norm();
    if (!std::isfinite(f) || !std::isfinite(gn) || gn > 1e150) {
      trace.diverged = true;
      trace.diverged_at = k;
      return false;
    }
    TraceRow row;
    row.k = k;
    row.grad_norm = gn;
    row.rel_log = std::log10(gn / gn0);
    row.f_gap = f - pc.f_inf;
    row.estimator_err = (g - grad).squaredNorm();
    row.lyapunov = cfg.record_lyapunov
                       ? row.f_gap + lyap_c * gamma_k / (2.0 * p_k - p_k * p_k) * row.estimator_err
                       : nan;
    row.comm_rounds = m + k * cpi;
    row.gamma_k = gamma_k;
    row.p_k = p_k;
    trace.rows.push_back(row);
    return true;
  };

  // Theory flags checked per emitted stepsize.
  const double ppa_bound =
      (pc.delta + pc.smoothness) > 0.0 ? 1.0 / (4.0 * (pc.delta + pc.smoothness))
                                       : std::numeric_limits<double>::infinity();
  const double pp_bound = pc.delta > 0.0 ? 1.0 / (4.0 * pc.delta)
                                         : std::numeric_limits<double>::infinity();
  const auto flag_theory = [&](double gamma_k) {
    if (alg == Algorithm::spam_ppa && gamma_k > ppa_bound * (1.0 + 1e-12)) {
      trace.theory_violation = true;
      if (trace.theory_note.empty()) {
        trace.theory_note = "stepsize exceeds 1/(4(delta+L)) required by the prox-average variant";
      }
    } else if (alg == Algorithm::spam_pp && gamma_k > pp_bound * (1.0 + 1e-12)) {
      trace.theory_violation = true;
      if (trace.theory_note.empty()) {
        trace.theory_note = "stepsize exceeds 1/(4 delta) required with partial participation";
      }
    }
  };

  {
    const auto [gamma0, p0] = cfg.schedule.at(0);
    if (!record(0, x0, g_warm, gamma0, p0)) return trace;
  }

  DenseVector x_prev = x0;
  DenseVector x = x0;
  DenseVector g_state = g_warm;

  for (long k = 0; k <= cfg.K; ++k) {
    const auto [gamma_k, p_k] = cfg.schedule.at(k);
    flag_theory(gamma_k);

    const std::vector<int> cohort =
        sample_cohort(cfg.seed, k, B, problem.n(), cfg.cohort_sampling);

    DenseVector g_new;
    if (alg == Algorithm::sgd_baseline) {
      g_new = pc.client_grad(cohort[0], x);
    } else {
      g_new = eng.blended_estimator(cohort, p_k, x, x_prev, g_state);
    }

    if (k >= 1) {
      if (!record(k, x, g_new, gamma_k, p_k)) break;
    }
    if (k == cfg.K) break;  // row-K estimator refresh only; no step, no comm

    DenseVector x_next;
    switch (alg) {
      case Algorithm::spam_exact:
      case Algorithm::spam_inexact:
        x_next = eng.prox_point(cohort[0], x, g_new, gamma_k);
        break;
      case Algorithm::spam_pp: {
        int xi;
        if (cfg.prox_client == ProxClientRule::fresh) {
          RandomStream pick(cfg.seed, StreamPurpose::prox_pick, static_cast<uint64_t>(k));
          xi = static_cast<int>(pick.uniform_below(static_cast<uint64_t>(problem.n())));
        } else if (B == 1) {
          xi = cohort[0];  // no draw consumed: keeps B=1 pathwise equal to spam
        } else {
          RandomStream pick(cfg.seed, StreamPurpose::prox_pick, static_cast<uint64_t>(k));
          xi = cohort[static_cast<size_t>(pick.uniform_below(static_cast<uint64_t>(B)))];
        }
        x_next = eng.prox_point(xi, x, g_new, gamma_k);
        break;
      }
      case Algorithm::spam_ppa: {
        std::vector<DenseVector> slots(static_cast<size_t>(B));
        eng.for_each(B, [&](long j) {
          slots[static_cast<size_t>(j)] =
              eng.prox_point(cohort[static_cast<size_t>(j)], x, g_new, gamma_k);
        });
        x_next = slots[0];
        for (long j = 1; j < B; ++j) x_next += slots[static_cast<size_t>(j)];
        x_next /= static_cast<double>(B);
        break;
      }
      case Algorithm::sgd_baseline:
        x_next = x - gamma_k * g_new;
        break;
    }

    if (!x_next.allFinite() || x_next.norm() > 1e150) {
      trace.diverged = true;
      trace.diverged_at = k + 1;
      break;
    }
    x_prev = x;
    x = std::move(x_next);
    g_state = g_new;
  }
  return trace;
}

inline RunTrace run_spam(const FedQuadProblem& p, const RunConfig& cfg,
                         const ProblemCache* cache = nullptr) {
  if (cfg.algorithm != Algorithm::spam_exact && cfg.algorithm != Algorithm::spam_inexact) {
    throw std::invalid_argument("run_spam: algorithm must be spam_exact or spam_inexact");
  }
  return run_any(p, cfg, cache);
}

inline RunTrace run_spam_pp(const FedQuadProblem& p, const RunConfig& cfg,
                            const ProblemCache* cache = nullptr) {
  if (cfg.algorithm != Algorithm::spam_pp) {
    throw std::invalid_argument("run_spam_pp: algorithm must be spam_pp");
  }
  return run_any(p, cfg, cache);
}

inline RunTrace run_spam_ppa(const FedQuadProblem& p, const RunConfig& cfg,
                             const ProblemCache* cache = nullptr) {
  if (cfg.algorithm != Algorithm::spam_ppa) {
    throw std::invalid_argument("run_spam_ppa: algorithm must be spam_ppa");
  }
  return run_any(p, cfg, cache);
}

inline RunTrace run_sgd_baseline(const FedQuadProblem& p, const RunConfig& cfg,
                                 const ProblemCache* cache = nullptr) {
  if (cfg.algorithm != Algorithm::sgd_baseline) {
    throw std::invalid_argument("run_sgd_baseline: algorithm must be sgd_baseline");
  }
  return run_any(p, cfg, cache);
}

}  // namespace spam

#endif  // SPAM_OPTIM_HPP
