#ifndef SPAM_HARNESS_HPP
#define SPAM_HARNESS_HPP

// Experiment orchestration: CSV trace persistence, rate-slope estimation,
// error floors, and parameter sweeps over (p, gamma, local_steps, B).
//
// CSV schema (exact column order):
//   k,grad_norm,rel_log,f_gap,estimator_err,lyapunov,comm_rounds,gamma_k,p_k
// k and comm_rounds are integers; every other column is decimal text at 17
// significant digits; a missing Lyapunov value is written as "nan".
//
// Manifest: line-oriented text, one record per produced trace file, each a
// sequence of space-separated key=value fields:
//   cell=000 p=0.9 gamma=0.05 gamma_label=0.5/delta local_steps=exact B=1
//   seed=1 file=cell000_seed1.csv status=ok floor=1.2e-05 final_rel_log=-4.2
// status is ok | diverged | error (error records carry note=... instead of
// floor/final_rel_log).

#include "spam/optim.hpp"
#include "spam/parallel.hpp"
#include "spam/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spam {

// ---------------------------------------------------------------------------
// Rate fitting
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  long k_lo = 1;
  long k_hi = 1;
};

// Least squares of log R_K against log K over K in [k_lo, k_hi], where
// R_K = (sum_{k=1..K} gamma_k * gn2_k) / (sum_{k=1..K} gamma_k) is the
// running stepsize-weighted mean of squared gradient norms.  Inputs are
// indexed so that gammas[k-1], gn2[k-1] correspond to iteration k.
inline RateFit fit_rate_points(const std::vector<double>& gammas, const std::vector<double>& gn2,
                               long k_lo, long k_hi) {
  if (gammas.size() != gn2.size()) throw std::invalid_argument("fit_rate: length mismatch");
  if (k_lo < 1 || k_hi <= k_lo) throw std::invalid_argument("fit_rate: need k_hi > k_lo >= 1");
  const long K_max = static_cast<long>(gammas.size());
  const long hi = std::min(k_hi, K_max);
  if (hi - k_lo + 1 < 3) throw std::invalid_argument("fit_rate: fewer than 3 points in window");

  double weight_sum = 0.0;
  double weighted_gn2 = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  long npts = 0;
  for (long k = 1; k <= hi; ++k) {
    const double g = gammas[static_cast<size_t>(k - 1)];
    if (!(g > 0.0)) throw std::invalid_argument("fit_rate: gamma_k must be positive");
    weight_sum += g;
    weighted_gn2 += g * gn2[static_cast<size_t>(k - 1)];
    if (k < k_lo) continue;
    const double R = weighted_gn2 / weight_sum;
    if (!(R > 0.0)) throw std::invalid_argument("fit_rate: nonpositive running mean");
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(R);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++npts;
  }
  const double n = static_cast<double>(npts);
  const double det = n * sxx - sx * sx;
  if (!(det > 0.0)) throw std::invalid_argument("fit_rate: degenerate abscissa");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res =
      syy - 2.0 * (fit.slope * sxy + fit.intercept * sy) +
      fit.slope * fit.slope * sxx + 2.0 * fit.slope * fit.intercept * sx + fit.intercept * fit.intercept * n;
  if (ss_tot <= 0.0) {
    fit.r2 = 1.0;  // constant response: the flat fit is exact
  } else {
    fit.r2 = std::min(1.0, std::max(0.0, 1.0 - ss_res / ss_tot));
  }
  fit.k_lo = k_lo;
  fit.k_hi = hi;
  return fit;
}

namespace detail {
inline void trace_fit_arrays(const RunTrace& trace, std::vector<double>& gammas,
                             std::vector<double>& gn2) {
  gammas.clear();
  gn2.clear();
  for (const TraceRow& row : trace.rows) {
    if (row.k < 1) continue;
    gammas.push_back(row.gamma_k);
    gn2.push_back(row.grad_norm * row.grad_norm);
  }
}
}  // namespace detail

inline RateFit fit_rate(const RunTrace& trace, long k_lo, long k_hi) {
  std::vector<double> gammas, gn2;
  detail::trace_fit_arrays(trace, gammas, gn2);
  return fit_rate_points(gammas, gn2, k_lo, k_hi);
}

// Aggregate across seeds: squared gradient norms are averaged per iteration
// BEFORE any log transform; stepsizes must agree across traces.
inline RateFit fit_rate_averaged(const std::vector<RunTrace>& traces, long k_lo, long k_hi) {
  if (traces.empty()) throw std::invalid_argument("fit_rate_averaged: no traces");
  std::vector<double> gammas, gn2;
  detail::trace_fit_arrays(traces[0], gammas, gn2);
  size_t common = gn2.size();
  std::vector<std::vector<double>> all_gn2;
  all_gn2.push_back(gn2);
  for (size_t t = 1; t < traces.size(); ++t) {
    std::vector<double> g2, q2;
    detail::trace_fit_arrays(traces[t], g2, q2);
    common = std::min(common, q2.size());
    for (size_t i = 0; i < std::min(common, g2.size()); ++i) {
      if (std::abs(g2[i] - gammas[i]) > 1e-12 * std::max(1.0, std::abs(gammas[i]))) {
        throw std::invalid_argument("fit_rate_averaged: stepsize schedules disagree");
      }
    }
    all_gn2.push_back(std::move(q2));
  }
  gammas.resize(common);
  std::vector<double> mean_gn2(common, 0.0);
  for (const auto& v : all_gn2) {
    for (size_t i = 0; i < common; ++i) mean_gn2[i] += v[i];
  }
  for (double& v : mean_gn2) v /= static_cast<double>(traces.size());
  return fit_rate_points(gammas, mean_gn2, k_lo, k_hi);
}

// ---------------------------------------------------------------------------
// Error floor
// ---------------------------------------------------------------------------

// Median of grad_norm over the last ceil-free max(1, floor(tail_fraction * N))
// rows; an even tail takes the mean of the two central order statistics.
inline double error_floor(const RunTrace& trace, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw std::invalid_argument("error_floor: tail_fraction must lie in (0, 1]");
  }
  const size_t n = trace.rows.size();
  if (n == 0) throw std::invalid_argument("error_floor: empty trace");
  const size_t tail = std::max<size_t>(1, static_cast<size_t>(std::floor(tail_fraction * static_cast<double>(n))));
  std::vector<double> v;
  v.reserve(tail);
  for (size_t i = n - tail; i < n; ++i) v.push_back(trace.rows[i].grad_norm);
  std::sort(v.begin(), v.end());
  if (tail % 2 == 1) return v[tail / 2];
  return 0.5 * (v[tail / 2 - 1] + v[tail / 2]);
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

inline const char* trace_csv_header() {
  return "k,grad_norm,rel_log,f_gap,estimator_err,lyapunov,comm_rounds,gamma_k,p_k";
}

namespace detail {
inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

// include_rows = false writes just the header line (the K = 0 CLI contract).
inline void write_trace_csv(const std::string& path, const RunTrace& trace,
                            bool include_rows = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << trace_csv_header() << '\n';
  if (include_rows) {
    for (const TraceRow& r : trace.rows) {
      out << r.k << ',' << detail::fmt17(r.grad_norm) << ',' << detail::fmt17(r.rel_log) << ','
          << detail::fmt17(r.f_gap) << ',' << detail::fmt17(r.estimator_err) << ','
          << detail::fmt17(r.lyapunov) << ',' << r.comm_rounds << ',' << detail::fmt17(r.gamma_k)
          << ',' << detail::fmt17(r.p_k) << '\n';
    }
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_csv_header()) throw std::runtime_error("unexpected trace header in " + path);
  RunTrace trace;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw std::runtime_error("malformed trace row in " + path);
    TraceRow r;
    r.k = std::stol(cells[0]);
    r.grad_norm = std::stod(cells[1]);
    r.rel_log = std::stod(cells[2]);
    r.f_gap = std::stod(cells[3]);
    r.estimator_err = std::stod(cells[4]);
    r.lyapunov = std::stod(cells[5]);
    r.comm_rounds = std::stol(cells[6]);
    r.gamma_k = std::stod(cells[7]);
    r.p_k = std::stod(cells[8]);
    trace.rows.push_back(r);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  RunConfig base;
  std::vector<double> p_axis;
  std::vector<double> gamma_axis;
  std::vector<std::string> gamma_labels;  // parallel to gamma_axis; optional
  std::vector<long> local_steps_axis;     // -1 encodes the exact prox
  std::vector<long> B_axis;
  std::vector<uint64_t> seeds;
  std::string output_dir;
  long cap = 10000;
  double floor_tail = 0.25;
};

struct SweepCellResult {
  long cell = 0;
  double p = 0.0;
  double gamma = 0.0;
  std::string gamma_label;
  long local_steps = -1;  // -1 = exact
  long B = 1;
  uint64_t seed = 0;
  std::string file;
  std::string status;  // ok | diverged | error
  std::string note;
  double floor = std::numeric_limits<double>::quiet_NaN();
  double final_rel_log = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
  std::vector<SweepCellResult> records;
  std::string manifest_path;
};

struct ManifestRecord {
  std::map<std::string, std::string> fields;
  const std::string& get(const std::string& key) const {
    auto it = fields.find(key);
    if (it == fields.end()) throw std::runtime_error("manifest record missing key: " + key);
    return it->second;
  }
  bool has(const std::string& key) const { return fields.count(key) != 0; }
};

inline std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ManifestRecord rec;
    std::stringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      const size_t eq = tok.find('=');
      if (eq == std::string::npos) throw std::runtime_error("malformed manifest token: " + tok);
      rec.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace detail {

inline RunConfig cell_config(const RunConfig& base, double p, double gamma, long local_steps,
                             long B, uint64_t seed) {
  RunConfig cfg = base;
  cfg.schedule = Schedule{};
  cfg.schedule.kind = ScheduleKind::custom;
  cfg.schedule.K = base.K;
  cfg.schedule.B = B;
  cfg.schedule.delta = base.schedule.delta;
  cfg.schedule.smoothness = base.schedule.smoothness;
  cfg.schedule.gamma_override = {gamma};
  cfg.schedule.p_override = {p};
  cfg.B = B;
  cfg.seed = seed;
  cfg.threads = 1;  // parallelism lives at the sweep level
  if (base.algorithm == Algorithm::spam_pp || base.algorithm == Algorithm::spam_ppa) {
    cfg.local_steps = std::max<long>(local_steps, 0);
  } else if (base.algorithm == Algorithm::sgd_baseline) {
    cfg.local_steps = 0;
  } else {
    if (local_steps < 0) {
      cfg.algorithm = Algorithm::spam_exact;
      cfg.local_steps = 0;
    } else {
      cfg.algorithm = Algorithm::spam_inexact;
      cfg.local_steps = std::max<long>(local_steps, 1);
    }
  }
  return cfg;
}

inline std::string local_steps_label(long v) {
  return v < 0 ? std::string("exact") : std::to_string(v);
}

}  // namespace detail

// Runs the cartesian product p x gamma x local_steps x B (nested in that
// order) across all seeds.  Each (cell, seed) pair owns its output file
// `cell{NNN}_seed{S}.csv`; the manifest is written once every cell has
// finished, in deterministic order, so reruns are bit-identical.  A failing
// cell is recorded with status=error and does not abort its peers.
inline SweepResult run_sweep(const FedQuadProblem& problem, const SweepSpec& spec,
                             const ProblemCache* cache = nullptr) {
  if (spec.p_axis.empty() || spec.gamma_axis.empty() || spec.local_steps_axis.empty() ||
      spec.B_axis.empty() || spec.seeds.empty()) {
    throw std::invalid_argument("run_sweep: every axis needs at least one value");
  }
  if (!spec.gamma_labels.empty() && spec.gamma_labels.size() != spec.gamma_axis.size()) {
    throw std::invalid_argument("run_sweep: gamma_labels must parallel gamma_axis");
  }
  const long cells = static_cast<long>(spec.p_axis.size() * spec.gamma_axis.size() *
                                       spec.local_steps_axis.size() * spec.B_axis.size());
  const long total = cells * static_cast<long>(spec.seeds.size());
  if (total > spec.cap) throw std::invalid_argument("run_sweep: product exceeds cap");

  std::unique_ptr<ProblemCache> owned;
  if (!cache) {
    owned = std::make_unique<ProblemCache>(ProblemCache::build(problem));
    cache = owned.get();
  }

  std::filesystem::create_directories(spec.output_dir);

  std::vector<SweepCellResult> records(static_cast<size_t>(total));
  long idx = 0;
  long cell_idx = 0;
  for (double p : spec.p_axis) {
    for (size_t gi = 0; gi < spec.gamma_axis.size(); ++gi) {
      for (long ls : spec.local_steps_axis) {
        for (long B : spec.B_axis) {
          for (uint64_t seed : spec.seeds) {
            SweepCellResult& rec = records[static_cast<size_t>(idx)];
            rec.cell = cell_idx;
            rec.p = p;
            rec.gamma = spec.gamma_axis[gi];
            rec.gamma_label = spec.gamma_labels.empty() ? detail::fmt17(spec.gamma_axis[gi])
                                                        : spec.gamma_labels[gi];
            for (char& c : rec.gamma_label) {
              if (c == ' ' || c == '\t') c = '_';
            }
            rec.local_steps = ls;
            rec.B = B;
            rec.seed = seed;
            char name[64];
            std::snprintf(name, sizeof(name), "cell%03ld_seed%llu.csv", cell_idx,
                          static_cast<unsigned long long>(seed));
            rec.file = name;
            ++idx;
          }
          ++cell_idx;
        }
      }
    }
  }

  const auto run_one = [&](long i) {
    SweepCellResult& rec = records[static_cast<size_t>(i)];
    try {
      const RunConfig cfg = detail::cell_config(spec.base, rec.p, rec.gamma, rec.local_steps,
                                                rec.B, rec.seed);
      const RunTrace trace = run_any(problem, cfg, cache);
      const std::string path = (std::filesystem::path(spec.output_dir) / rec.file).string();
      write_trace_csv(path, trace);
      rec.status = trace.diverged ? "diverged" : "ok";
      if (!trace.rows.empty()) {
        rec.floor = error_floor(trace, spec.floor_tail);
        rec.final_rel_log = trace.rows.back().rel_log;
      }
    } catch (const std::exception& e) {
      rec.status = "error";
      rec.note = e.what();
      for (char& c : rec.note) {
        if (c == ' ' || c == '\n' || c == '\t') c = '_';
      }
    }
  };

  if (spec.base.threads > 1) {
    ThreadPool pool(spec.base.threads);
    pool.run_indexed(total, run_one);
  } else {
    for (long i = 0; i < total; ++i) run_one(i);
  }

  const std::string manifest_path =
      (std::filesystem::path(spec.output_dir) / "manifest.txt").string();
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw std::runtime_error("cannot open manifest for writing: " + manifest_path);
  for (const SweepCellResult& rec : records) {
    char cellbuf[16];
    std::snprintf(cellbuf, sizeof(cellbuf), "%03ld", rec.cell);
    mf << "cell=" << cellbuf << " p=" << detail::fmt17(rec.p) << " gamma="
       << detail::fmt17(rec.gamma) << " gamma_label=" << rec.gamma_label << " local_steps="
       << detail::local_steps_label(rec.local_steps) << " B=" << rec.B << " seed=" << rec.seed
       << " file=" << rec.file << " status=" << rec.status;
    if (rec.status == "error") {
      mf << " note=" << rec.note;
    } else if (!std::isnan(rec.floor)) {
      mf << " floor=" << detail::fmt17(rec.floor)
         << " final_rel_log=" << detail::fmt17(rec.final_rel_log);
    }
    mf << '\n';
  }
  mf.flush();
  if (!mf) throw std::runtime_error("manifest write failed: " + manifest_path);

  SweepResult result;
  result.records = std::move(records);
  result.manifest_path = manifest_path;
  return result;
}

}  // namespace spam

#endif  // SPAM_HARNESS_HPP
