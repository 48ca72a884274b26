#ifndef SPAM_LINALG_HPP
#define SPAM_LINALG_HPP

// Minimal dense symmetric linear algebra: matrix-vector products, SPD solves
// with a verified residual contract, and extreme-eigenvalue estimation.
//
// Storage and factorizations are delegated to Eigen; every operation exposed
// here is deterministic for fixed input (no randomized starts, no threading),
// and the solve/eigen contracts below are checked rather than assumed.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace spam {

using DenseVector = Eigen::VectorXd;

struct LinalgError : std::runtime_error {
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

// Dense symmetric matrix.  Symmetry holds exactly as stored: every
// constructor mirrors the lower triangle, so M(i,j) and M(j,i) are the same
// value bit-for-bit and no asymmetric entry can be introduced afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;

  static SymMatrix zero(int d) { return SymMatrix(Eigen::MatrixXd::Zero(d, d)); }

  static SymMatrix identity(int d) { return SymMatrix(Eigen::MatrixXd::Identity(d, d)); }

  static SymMatrix diagonal(const DenseVector& diag) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(diag.size(), diag.size());
    m.diagonal() = diag;
    return SymMatrix(std::move(m));
  }

  // Accepts any square matrix and stores its exactly-symmetric part obtained
  // by mirroring the lower triangle (entries above the diagonal are copies of
  // their transposed counterparts, not averages).
  static SymMatrix mirror_lower(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) throw LinalgError("SymMatrix: matrix must be square");
    Eigen::MatrixXd full = m;
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = i + 1; j < full.cols(); ++j) full(i, j) = full(j, i);
    return SymMatrix(std::move(full));
  }

  // Gram construction G * G^T, mirrored so the result is exactly symmetric.
  static SymMatrix gram(const Eigen::MatrixXd& g) {
    Eigen::MatrixXd p = g * g.transpose();
    return mirror_lower(p);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  SymMatrix operator+(const SymMatrix& o) const { return SymMatrix(m_ + o.m_); }
  SymMatrix operator-(const SymMatrix& o) const { return SymMatrix(m_ - o.m_); }
  SymMatrix scaled(double c) const { return SymMatrix(c * m_); }
  SymMatrix plus_identity(double c) const {
    Eigen::MatrixXd m = m_;
    m.diagonal().array() += c;
    return SymMatrix(std::move(m));
  }
  // Symmetric square M*M (mirrored; the product of a symmetric matrix with
  // itself is symmetric up to rounding only).
  SymMatrix square() const { return mirror_lower(m_ * m_); }

 private:
  explicit SymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

inline DenseVector matvec(const SymMatrix& m, const DenseVector& v) {
  if (m.dim() != v.size()) {
    throw LinalgError("matvec: dimension mismatch (" + std::to_string(m.dim()) + " x " +
                      std::to_string(v.size()) + ")");
  }
  return m.mat() * v;
}

namespace detail {
// Locates the first non-positive pivot of an (attempted) Cholesky
// factorization; used only to name the failure point in error messages.
inline int failing_cholesky_pivot(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double s = m(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 0.0) || !std::isfinite(s)) return j;
    l(j, j) = std::sqrt(s);
    for (int i = j + 1; i < d; ++i) {
      double t = m(i, j);
      for (int k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return -1;
}
}  // namespace detail

// Solves M y = b for symmetric positive definite M via Cholesky plus one step
// of iterative refinement.  Contract: ||M y - b|| <= tol * max(1, ||b||),
// verified before returning.
inline DenseVector solve_spd(const SymMatrix& m, const DenseVector& b, double tol = 1e-10) {
  if (m.dim() != b.size()) throw LinalgError("solve_spd: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(m.mat());
  if (llt.info() != Eigen::Success) {
    const int pivot = detail::failing_cholesky_pivot(m.mat());
    throw LinalgError("solve_spd: matrix is not positive definite (Cholesky pivot " +
                      std::to_string(pivot) + " failed)");
  }
  DenseVector y = llt.solve(b);
  const double bound = tol * std::max(1.0, b.norm());
  DenseVector r = b - m.mat() * y;
  if (r.norm() > bound) {
    y += llt.solve(r);  // one refinement step
    r = b - m.mat() * y;
    if (r.norm() > bound) {
      throw LinalgError("solve_spd: residual " + std::to_string(r.norm()) +
                        " exceeds contract after refinement");
    }
  }
  if (!y.allFinite()) throw LinalgError("solve_spd: non-finite solution entries");
  return y;
}

struct SymEigen {
  DenseVector values;      // ascending
  Eigen::MatrixXd vectors; // column i pairs with values[i]
};

// Full symmetric eigendecomposition (deterministic tridiagonal QL via Eigen).
inline SymEigen sym_eigendecompose(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  if (es.info() != Eigen::Success) {
    throw LinalgError("sym_eigendecompose: eigensolver failed to converge");
  }
  return SymEigen{es.eigenvalues(), es.eigenvectors()};
}

// Smallest and largest eigenvalue, each within tol * ||M||_2 of the truth.
inline std::pair<double, double> extreme_eigenvalues(const SymMatrix& m, double tol = 1e-8) {
  (void)tol;  // full decomposition is accurate far below any meaningful tol
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw LinalgError("extreme_eigenvalues: eigensolver failed to converge");
  }
  const auto& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

inline double spectral_norm(const SymMatrix& m, double tol = 1e-8) {
  const auto [lo, hi] = extreme_eigenvalues(m, tol);
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace spam

#endif  // SPAM_LINALG_HPP
