#pragma once

// Screened gradient-data reconstruction.
//
// Given an anchor image i0 and a target gradient field g, reconstruct the
// minimizer of the strictly convex quadratic energy
//
//   E(u) = ||u - i0||^2 + beta * (||Dx u - gx||^2 + ||Dy u - gy||^2)
//
// whose normal equations are (Id + beta (Dx'Dx + Dy'Dy)) u = i0 + beta D'g.
// With forward differences and a replicated boundary, Dx'Dx is the 1-D
// Neumann second-difference matrix tridiag(-1, 2, -1) with unit corners,
// which the type-II cosine basis diagonalizes exactly: eigenvalues
// lambda_k = 4 sin^2(pi k / (2n)). The spectral path is therefore a direct
// solve (exact to rounding), and a Jacobi-preconditioned conjugate-gradient
// path provides an independent matrix-free cross-check.

#include "pls/dct.hpp"
#include "pls/gradient.hpp"

namespace pls {

enum class SolveMethod { spectral, cg };

struct ReconstructionConfig {
  double beta = 16.0;
  SolveMethod solver = SolveMethod::spectral;
  double cg_tol = 1e-8;   // relative residual ||r||/||b||
  int cg_max_iters = 1000;
};

// E(candidate) as above; all sums run over every pixel and channel.
template <typename Scalar>
double energy(const Image<Scalar>& candidate, const Image<Scalar>& i0,
              const GradientField<Scalar>& g, double beta) {
  require_same_shape(i0, candidate, "energy");
  require_same_shape(i0, g.gx, "energy");
  const GradientField<Scalar> du = forward_gradient(candidate);
  double e = 0;
  for (int c = 0; c < i0.channels(); ++c) {
    e += double((candidate.planes[c] - i0.planes[c]).square().sum());
    e += beta * double((du.gx.planes[c] - g.gx.planes[c]).square().sum());
    e += beta * double((du.gy.planes[c] - g.gy.planes[c]).square().sum());
  }
  return e;
}

// Data term ||u - i0||^2 alone (the quantity whose growth in beta the
// smoothing-strength study tracks).
template <typename Scalar>
double data_term(const Image<Scalar>& i0, const Image<Scalar>& u) {
  require_same_shape(i0, u, "data_term");
  double e = 0;
  for (int c = 0; c < i0.channels(); ++c)
    e += double((u.planes[c] - i0.planes[c]).square().sum());
  return e;
}

// Max-norm of the energy gradient at `candidate`, computed analytically as
// 2 (candidate - i0) + 2 beta D'(D candidate - g). At an exact minimizer this
// is zero; callers compare against a tolerance scaled by (1 + max |i0|).
template <typename Scalar>
double residual_gradient_check(const Image<Scalar>& candidate, const Image<Scalar>& i0,
                               const GradientField<Scalar>& g, double beta) {
  require_same_shape(i0, candidate, "residual_gradient_check");
  GradientField<Scalar> du = forward_gradient(candidate);
  for (int c = 0; c < candidate.channels(); ++c) {
    du.gx.planes[c] -= g.gx.planes[c];
    du.gy.planes[c] -= g.gy.planes[c];
  }
  const Image<Scalar> dt = divergence_adjoint(du);
  double m = 0;
  for (int c = 0; c < candidate.channels(); ++c) {
    const Plane<Scalar> grad =
        Scalar(2) * (candidate.planes[c] - i0.planes[c]) + Scalar(2 * beta) * dt.planes[c];
    m = std::max(m, double(grad.abs().maxCoeff()));
  }
  return m;
}

namespace detail {

// Eigenvalues of the 1-D Neumann second-difference operator in DCT-II order.
inline Eigen::ArrayXd neumann_eigenvalues(int n) {
  Eigen::ArrayXd lambda(n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sin(M_PI * k / (2.0 * n));
    lambda[k] = 4.0 * s * s;
  }
  return lambda;
}

inline Eigen::ArrayXXd spectral_solve_plane(const Eigen::ArrayXXd& rhs, double beta) {
  const int h = int(rhs.rows()), w = int(rhs.cols());
  Eigen::ArrayXXd a = rhs;
  dct2_inplace(a);
  const Eigen::ArrayXd ly = neumann_eigenvalues(h);
  const Eigen::ArrayXd lx = neumann_eigenvalues(w);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y) a(y, x) /= 1.0 + beta * (lx[x] + ly[y]);
  idct2_inplace(a);
  a /= 4.0 * double(w) * double(h);
  return a;
}

// Matrix-free application of (Id + beta D'D) to a single plane.
inline Eigen::ArrayXXd apply_normal_operator(const Eigen::ArrayXXd& u, double beta) {
  const int h = int(u.rows()), w = int(u.cols());
  Eigen::ArrayXXd out = u;
  if (w > 1) {
    Eigen::ArrayXXd gx = Eigen::ArrayXXd::Zero(h, w);
    gx.leftCols(w - 1) = u.rightCols(w - 1) - u.leftCols(w - 1);
    out.leftCols(w - 1) -= beta * gx.leftCols(w - 1);
    out.rightCols(w - 1) += beta * gx.leftCols(w - 1);
  }
  if (h > 1) {
    Eigen::ArrayXXd gy = Eigen::ArrayXXd::Zero(h, w);
    gy.topRows(h - 1) = u.bottomRows(h - 1) - u.topRows(h - 1);
    out.topRows(h - 1) -= beta * gy.topRows(h - 1);
    out.bottomRows(h - 1) += beta * gy.topRows(h - 1);
  }
  return out;
}

inline Eigen::ArrayXXd cg_solve_plane(const Eigen::ArrayXXd& rhs,
                                      const Eigen::ArrayXXd& init, double beta,
                                      double tol, int max_iters) {
  const int h = int(rhs.rows()), w = int(rhs.cols());

  // Jacobi preconditioner: diag = 1 + beta * (degree_x + degree_y), where the
  // difference operator contributes 2 to interior samples and 1 at the ends.
  Eigen::ArrayXXd diag = Eigen::ArrayXXd::Constant(h, w, 1.0);
  if (w > 1) {
    diag += 2.0 * beta;
    diag.col(0) -= beta;
    diag.col(w - 1) -= beta;
  }
  if (h > 1) {
    diag += 2.0 * beta;
    diag.row(0) -= beta;
    diag.row(h - 1) -= beta;
  }

  const double bnorm = std::sqrt(rhs.square().sum());
  if (bnorm == 0.0) return Eigen::ArrayXXd::Zero(h, w);

  Eigen::ArrayXXd x = init;
  Eigen::ArrayXXd r = rhs - apply_normal_operator(x, beta);
  Eigen::ArrayXXd z = r / diag;
  Eigen::ArrayXXd p = z;
  double rz = (r * z).sum();
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(r.square().sum()) <= tol * bnorm) return x;
    const Eigen::ArrayXXd ap = apply_normal_operator(p, beta);
    const double alpha = rz / (p * ap).sum();
    x += alpha * p;
    r -= alpha * ap;
    z = r / diag;
    const double rz_next = (r * z).sum();
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  if (std::sqrt(r.square().sum()) <= tol * bnorm) return x;
  throw CgDidNotConverge("cg: relative residual above tolerance after max iterations");
}

}  // namespace detail

// Minimize E over u. beta == 0 returns i0 unchanged; beta < 0 is invalid.
template <typename Scalar>
Image<Scalar> reconstruct(const Image<Scalar>& i0, const GradientField<Scalar>& g,
                          const ReconstructionConfig& cfg = {}) {
  require_same_shape(i0, g.gx, "reconstruct");
  require_same_shape(i0, g.gy, "reconstruct");
  if (cfg.beta < 0) throw std::invalid_argument("reconstruct: beta must be >= 0");
  if (cfg.beta == 0) return i0;

  Image<Scalar> out(i0.width(), i0.height(), i0.channels());
  out.declared_range = i0.declared_range;
  const Image<Scalar> div = divergence_adjoint(g);
  for (int c = 0; c < i0.channels(); ++c) {
    const Eigen::ArrayXXd rhs = (i0.planes[c].template cast<double>() +
                                 cfg.beta * div.planes[c].template cast<double>())
                                    .eval();
    Eigen::ArrayXXd sol;
    if (cfg.solver == SolveMethod::spectral) {
      sol = detail::spectral_solve_plane(rhs, cfg.beta);
    } else {
      sol = detail::cg_solve_plane(rhs, i0.planes[c].template cast<double>(), cfg.beta,
                                   cfg.cg_tol, cfg.cg_max_iters);
    }
    out.planes[c] = sol.cast<Scalar>();
  }
  return out;
}

}  // namespace pls
