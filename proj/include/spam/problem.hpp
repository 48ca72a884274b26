#ifndef SPAM_PROBLEM_HPP
#define SPAM_PROBLEM_HPP

// The finite-client federated ridge-regression objective
//
//   f(x) = (1/n) sum_i f_i(x),   f_i(x) = ||A_i x - y_i||^2 + (lambda/2) ||x||^2
//
// with symmetric PSD design operators A_i, plus every diagnostic the
// algorithms and the test harness rely on: client/full gradients, constant
// Hessians, the Hessian-similarity constant delta, the smoothness constant L,
// the pointwise gradient variance sigma^2(x), and the exact minimizer.

#include "spam/linalg.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spam {

struct ProblemError : std::runtime_error {
  explicit ProblemError(const std::string& what) : std::runtime_error(what) {}
};

struct ClientData {
  SymMatrix A;    // d x d symmetric PSD design operator
  DenseVector y;  // targets, length d
};

class FedQuadProblem {
 public:
  FedQuadProblem(std::vector<ClientData> clients, double lambda)
      : clients_(std::move(clients)), lambda_(lambda) {
    if (clients_.empty()) throw ProblemError("FedQuadProblem: needs at least one client");
    if (lambda_ < 0.0) throw ProblemError("FedQuadProblem: lambda must be nonnegative");
    dim_ = clients_[0].A.dim();
    for (const auto& c : clients_) {
      if (c.A.dim() != dim_ || c.y.size() != dim_) {
        throw ProblemError("FedQuadProblem: all clients must share dimension d");
      }
      // PSD invariant: lambda_min(A) >= -1e-8 * ||A||_2.
      const auto [lo, hi] = extreme_eigenvalues(c.A);
      const double norm = std::max(std::abs(lo), std::abs(hi));
      if (lo < -1e-8 * norm) {
        throw ProblemError("FedQuadProblem: client design operator is not PSD (lambda_min = " +
                           std::to_string(lo) + ")");
      }
    }
  }

  int n() const { return static_cast<int>(clients_.size()); }
  int dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const ClientData& client(int i) const {
    check_index(i);
    return clients_[static_cast<size_t>(i)];
  }

  double client_value(int i, const DenseVector& x) const {
    check_index(i);
    const auto& c = clients_[static_cast<size_t>(i)];
    const DenseVector r = c.A.mat() * x - c.y;
    return r.squaredNorm() + 0.5 * lambda_ * x.squaredNorm();
  }

  // grad f_i(x) = 2 A_i (A_i x - y_i) + lambda x
  DenseVector client_grad(int i, const DenseVector& x) const {
    check_index(i);
    const auto& c = clients_[static_cast<size_t>(i)];
    const DenseVector r = c.A.mat() * x - c.y;
    return 2.0 * (c.A.mat() * r) + lambda_ * x;
  }

  // Hessian of f_i is the constant 2 A_i^2 + lambda I.
  SymMatrix client_hessian(int i) const {
    check_index(i);
    return clients_[static_cast<size_t>(i)].A.square().scaled(2.0).plus_identity(lambda_);
  }

  double value(const DenseVector& x) const {
    double s = 0.0;
    for (int i = 0; i < n(); ++i) s += client_value(i, x);
    return s / n();
  }

  DenseVector full_grad(const DenseVector& x) const {
    DenseVector g = DenseVector::Zero(dim_);
    for (int i = 0; i < n(); ++i) g += client_grad(i, x);
    return g / n();
  }

  SymMatrix mean_hessian() const {
    SymMatrix h = SymMatrix::zero(dim_);
    for (int i = 0; i < n(); ++i) h = h + client_hessian(i);
    return h.scaled(1.0 / n());
  }

  // Tightest Hessian-similarity constant for quadratics:
  // delta = max_i ||H_i - mean(H)||_2.
  double compute_delta(double tol = 1e-8) const {
    const SymMatrix hbar = mean_hessian();
    double delta = 0.0;
    for (int i = 0; i < n(); ++i) {
      delta = std::max(delta, spectral_norm(client_hessian(i) - hbar, tol));
    }
    return delta;
  }

  // A client index and unit direction attaining ||(H_i - mean(H)) v|| = delta.
  std::pair<int, DenseVector> delta_witness(double tol = 1e-8) const {
    const SymMatrix hbar = mean_hessian();
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < n(); ++i) {
      const double s = spectral_norm(client_hessian(i) - hbar, tol);
      if (s > best) {
        best = s;
        arg = i;
      }
    }
    const SymEigen eig = sym_eigendecompose(client_hessian(arg) - hbar);
    const Eigen::Index last = eig.values.size() - 1;
    const Eigen::Index pick =
        std::abs(eig.values(0)) > std::abs(eig.values(last)) ? 0 : last;
    return {arg, eig.vectors.col(pick)};
  }

  // L = ||mean Hessian||_2.
  double compute_smoothness(double tol = 1e-8) const { return spectral_norm(mean_hessian(), tol); }

  // Pointwise gradient variance (1/n) sum_i ||grad f_i(x) - grad f(x)||^2.
  double sigma2_at(const DenseVector& x) const {
    const DenseVector g = full_grad(x);
    double s = 0.0;
    for (int i = 0; i < n(); ++i) s += (client_grad(i, x) - g).squaredNorm();
    return s / n();
  }

  // Solves (2 mean(A_i^2) + lambda I) x = 2 mean(A_i y_i); returns (x*, f(x*)).
  std::pair<DenseVector, double> solve_exact(double tol = 1e-10) const {
    const SymMatrix h = mean_hessian();
    DenseVector rhs = DenseVector::Zero(dim_);
    for (int i = 0; i < n(); ++i) {
      const auto& c = clients_[static_cast<size_t>(i)];
      rhs += 2.0 * (c.A.mat() * c.y);
    }
    rhs /= n();
    DenseVector x_star;
    try {
      x_star = solve_spd(h, rhs, tol);
    } catch (const LinalgError& e) {
      throw ProblemError(std::string("solve_exact: singular system (") + e.what() + ")");
    }
    return {x_star, value(x_star)};
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n()) {
      throw ProblemError("client index " + std::to_string(i) + " out of range [0, " +
                         std::to_string(n()) + ")");
    }
  }

  std::vector<ClientData> clients_;
  double lambda_ = 0.0;
  int dim_ = 0;
};

// Precomputed per-problem quantities for the hot run loops.  Everything here
// is a pure function of the problem; building the cache does not change any
// observable semantics (tests assert cached and direct routes agree).
struct ClientFactor {
  Eigen::MatrixXd H;   // 2 A_i^2 + lambda I
  DenseVector c;       // 2 A_i y_i  (so grad f_i(x) = H x - c)
  SymEigen eig;        // eigendecomposition of H (for closed-form prox)
  double hess_lmax;    // ||H||_2, for the "auto" local stepsize
};

struct ProblemCache {
  std::vector<ClientFactor> clients;
  Eigen::MatrixXd Hbar;  // mean Hessian
  DenseVector cbar;      // mean of client c vectors
  double y2mean = 0.0;   // mean ||y_i||^2 (so f(x) = x'Hbar x/2 - x'cbar + y2mean)
  DenseVector x_star;
  double f_inf = 0.0;
  double delta = 0.0;
  double smoothness = 0.0;
  int n = 0;
  int dim = 0;

  static ProblemCache build(const FedQuadProblem& p) {
    ProblemCache pc;
    pc.n = p.n();
    pc.dim = p.dim();
    pc.Hbar = Eigen::MatrixXd::Zero(p.dim(), p.dim());
    pc.cbar = DenseVector::Zero(p.dim());
    pc.clients.reserve(static_cast<size_t>(p.n()));
    for (int i = 0; i < p.n(); ++i) {
      ClientFactor f;
      const SymMatrix h = p.client_hessian(i);
      f.H = h.mat();
      f.c = 2.0 * (p.client(i).A.mat() * p.client(i).y);
      f.eig = sym_eigendecompose(h);
      f.hess_lmax = std::max(std::abs(f.eig.values(0)),
                             std::abs(f.eig.values(f.eig.values.size() - 1)));
      pc.Hbar += f.H;
      pc.cbar += f.c;
      pc.y2mean += p.client(i).y.squaredNorm();
      pc.clients.push_back(std::move(f));
    }
    pc.Hbar /= p.n();
    pc.cbar /= p.n();
    pc.y2mean /= p.n();
    auto [xs, fi] = p.solve_exact();
    pc.x_star = std::move(xs);
    pc.f_inf = fi;
    pc.delta = p.compute_delta();
    pc.smoothness = p.compute_smoothness();
    return pc;
  }

  DenseVector client_grad(int i, const DenseVector& x) const {
    const auto& f = clients[static_cast<size_t>(i)];
    return f.H * x - f.c;
  }

  DenseVector full_grad(const DenseVector& x) const { return Hbar * x - cbar; }

  // Returns (f(x), grad f(x)) sharing the single Hbar*x product.
  std::pair<double, DenseVector> value_and_grad(const DenseVector& x) const {
    const DenseVector hx = Hbar * x;
    const double f = 0.5 * x.dot(hx) - x.dot(cbar) + y2mean;
    return {f, hx - cbar};
  }
};

// ---------------------------------------------------------------------------
// Serialization.  Binary little-endian container, documented in README.md:
//   bytes 0..3  magic "FQPB"
//   byte  4     format version (1)
//   u32         n
//   u32         d
//   f64         lambda
//   n times:    d*d f64 (A_i, row-major) then d f64 (y_i)
// Round-trips bit-exactly on little-endian hosts (the only supported kind).
// ---------------------------------------------------------------------------

inline void save_problem(const std::string& path, const FedQuadProblem& p) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ProblemError("save_problem: cannot open " + path);
  const char magic[4] = {'F', 'Q', 'P', 'B'};
  out.write(magic, 4);
  const char version = 1;
  out.write(&version, 1);
  const uint32_t n = static_cast<uint32_t>(p.n());
  const uint32_t d = static_cast<uint32_t>(p.dim());
  const double lambda = p.lambda();
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&lambda), 8);
  std::vector<double> buf(static_cast<size_t>(d) * d);
  for (int i = 0; i < p.n(); ++i) {
    const auto& a = p.client(i).A.mat();
    for (uint32_t r = 0; r < d; ++r)
      for (uint32_t c = 0; c < d; ++c) buf[static_cast<size_t>(r) * d + c] = a(r, c);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(p.client(i).y.data()),
              static_cast<std::streamsize>(d) * 8);
  }
  if (!out) throw ProblemError("save_problem: write failure on " + path);
}

inline FedQuadProblem load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ProblemError("load_problem: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FQPB", 4) != 0) {
    throw ProblemError("load_problem: bad magic header in " + path);
  }
  char version = 0;
  in.read(&version, 1);
  if (!in || version != 1) throw ProblemError("load_problem: unsupported container version");
  uint32_t n = 0, d = 0;
  double lambda = 0.0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&d), 4);
  in.read(reinterpret_cast<char*>(&lambda), 8);
  if (!in || n == 0 || d == 0) throw ProblemError("load_problem: corrupt header");
  std::vector<ClientData> clients;
  clients.reserve(n);
  std::vector<double> buf(static_cast<size_t>(d) * d);
  for (uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    Eigen::MatrixXd a(d, d);
    for (uint32_t r = 0; r < d; ++r)
      for (uint32_t c = 0; c < d; ++c) a(r, c) = buf[static_cast<size_t>(r) * d + c];
    DenseVector y(d);
    in.read(reinterpret_cast<char*>(y.data()), static_cast<std::streamsize>(d) * 8);
    if (!in) throw ProblemError("load_problem: truncated client block");
    clients.push_back(ClientData{SymMatrix::mirror_lower(a), std::move(y)});
  }
  return FedQuadProblem(std::move(clients), lambda);
}

}  // namespace spam

#endif  // SPAM_PROBLEM_HPP
