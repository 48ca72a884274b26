#ifndef SPAM_PROX_HPP
#define SPAM_PROX_HPP

// Client-side subproblem solvers for the shifted proximal objective
//
//   phi(y) = f_i(y) + <g - grad f_i(x_a), y - x_a> + (1/(2 gamma)) ||y - x_a||^2
//
// where x_a is the anchor iterate and g the server's gradient estimator.
// Provided: exact closed-form solve (the stationarity system is SPD for
// quadratic clients), an inexact local gradient-descent solver, and the
// approximate-prox contract checker (function decrease + eps-stationarity).

#include "spam/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spam {

struct ProxRequest {
  int client = 0;
  DenseVector anchor;     // x_a
  DenseVector estimator;  // g
  double gamma = 0.0;     // stepsize, > 0
};

struct ProxResult {
  DenseVector point;
  double phi_grad_norm = 0.0;   // ||grad phi(point)||
  double phi_decrease = 0.0;    // phi(anchor) - phi(point)
  long inner_iterations = 0;
};

namespace detail {
inline void check_request(const FedQuadProblem& p, const ProxRequest& req) {
  if (req.gamma <= 0.0) throw std::invalid_argument("prox: gamma must be positive");
  if (req.anchor.size() != p.dim() || req.estimator.size() != p.dim()) {
    throw std::invalid_argument("prox: anchor/estimator dimension mismatch");
  }
  if (req.client < 0 || req.client >= p.n()) {
    throw std::invalid_argument("prox: client index out of range");
  }
}
}  // namespace detail

inline double phi_value(const FedQuadProblem& p, const ProxRequest& req, const DenseVector& y) {
  detail::check_request(p, req);
  const DenseVector shift = req.estimator - p.client_grad(req.client, req.anchor);
  const DenseVector dy = y - req.anchor;
  return p.client_value(req.client, y) + shift.dot(dy) + dy.squaredNorm() / (2.0 * req.gamma);
}

inline DenseVector phi_grad(const FedQuadProblem& p, const ProxRequest& req,
                            const DenseVector& y) {
  detail::check_request(p, req);
  return p.client_grad(req.client, y) + req.estimator - p.client_grad(req.client, req.anchor) +
         (y - req.anchor) / req.gamma;
}

// Exact prox: solves the stationarity system
//   (2 A_i^2 + lambda I + (1/gamma) I) y = 2 A_i y_i + (1/gamma) x_a - g + grad f_i(x_a)
inline ProxResult prox_exact(const FedQuadProblem& p, const ProxRequest& req, double tol = 1e-10) {
  detail::check_request(p, req);
  const SymMatrix m = p.client_hessian(req.client).plus_identity(1.0 / req.gamma);
  const auto& c = p.client(req.client);
  const DenseVector rhs = 2.0 * (c.A.mat() * c.y) + req.anchor / req.gamma - req.estimator +
                          p.client_grad(req.client, req.anchor);
  ProxResult res;
  res.point = solve_spd(m, rhs, tol);
  res.phi_grad_norm = phi_grad(p, req, res.point).norm();
  res.phi_decrease = phi_value(p, req, req.anchor) - phi_value(p, req, res.point);
  res.inner_iterations = 0;
  return res;
}

// Cached fast path used by the run loops: with grad f_i(x) = H x - c the
// right-hand side collapses to (H + I/gamma) x_a - g, so the solution is
// x_a - (H + I/gamma)^{-1} g computed through the cached eigenbasis.
// Tests assert bit-level-independent agreement with prox_exact to 1e-10.
inline DenseVector prox_point_cached(const ProblemCache& pc, const ProxRequest& req) {
  const auto& f = pc.clients[static_cast<size_t>(req.client)];
  const DenseVector z = f.eig.vectors.transpose() * req.estimator;
  const DenseVector w =
      z.array() / (f.eig.values.array() + 1.0 / req.gamma);
  return req.anchor - f.eig.vectors * w;
}

// Local gradient descent on phi from y0 = anchor.  With local_lr <= 0 the
// stepsize is chosen automatically as 1 / (2 L_phi), where
// L_phi = ||2 A_i^2 + lambda I||_2 + 1/gamma is the exact smoothness of phi;
// this guarantees monotone inner descent on quadratic clients.
inline ProxResult prox_inexact_gd(const FedQuadProblem& p, const ProxRequest& req, long steps,
                                  double local_lr = 0.0) {
  detail::check_request(p, req);
  if (steps < 1) throw std::invalid_argument("prox_inexact_gd: steps must be >= 1");
  double lr = local_lr;
  if (!(lr > 0.0)) {
    const double l_phi = spectral_norm(p.client_hessian(req.client)) + 1.0 / req.gamma;
    lr = 1.0 / (2.0 * l_phi);
  }
  DenseVector y = req.anchor;
  for (long s = 0; s < steps; ++s) y -= lr * phi_grad(p, req, y);
  ProxResult res;
  res.point = std::move(y);
  res.phi_grad_norm = phi_grad(p, req, res.point).norm();
  res.phi_decrease = phi_value(p, req, req.anchor) - phi_value(p, req, res.point);
  res.inner_iterations = steps;
  return res;
}

// Cached fast path for the run loops (same iteration, no diagnostics).
inline DenseVector prox_point_inexact_cached(const ProblemCache& pc, const ProxRequest& req,
                                             long steps, double local_lr = 0.0) {
  const auto& f = pc.clients[static_cast<size_t>(req.client)];
  double lr = local_lr;
  if (!(lr > 0.0)) lr = 1.0 / (2.0 * (f.hess_lmax + 1.0 / req.gamma));
  // grad phi(y) = H y - c + g - (H x_a - c) + (y - x_a)/gamma
  //            = H (y - x_a) + g + (y - x_a)/gamma
  const DenseVector grad_shift = req.estimator;
  DenseVector y = req.anchor;
  for (long s = 0; s < steps; ++s) {
    const DenseVector dy = y - req.anchor;
    y -= lr * (f.H * dy + grad_shift + dy / req.gamma);
  }
  return y;
}

struct AproxVerdict {
  bool pass = false;
  bool decrease_ok = false;
  bool stationarity_ok = false;
  double phi_anchor = 0.0;
  double phi_point = 0.0;
  double grad_norm = 0.0;
};

// Approximate-prox contract: function decrease up to roundoff slack plus
// eps-stationarity of phi, both checked per call.
inline AproxVerdict verify_aprox(const FedQuadProblem& p, const ProxRequest& req,
                                 const ProxResult& result, double eps) {
  AproxVerdict v;
  v.phi_anchor = phi_value(p, req, req.anchor);
  v.phi_point = phi_value(p, req, result.point);
  v.grad_norm = phi_grad(p, req, result.point).norm();
  const double scale = std::max(1.0, std::abs(v.phi_anchor));
  v.decrease_ok = v.phi_point <= v.phi_anchor + 1e-12 * scale;
  v.stationarity_ok = v.grad_norm * v.grad_norm <= eps * eps;
  v.pass = v.decrease_ok && v.stationarity_ok;
  return v;
}

}  // namespace spam

#endif  // SPAM_PROX_HPP
