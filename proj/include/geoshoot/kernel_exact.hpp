#pragma once

#include <vector>

#include "geoshoot/core.hpp"

namespace geoshoot {

// Exact O(N^2) evaluation of the Gaussian kernel machinery: the Hamiltonian
// H(q, p) = sum_ij (p_i . p_j) G(|q_i - q_j|), its first partials, the
// interpolated velocity field, and the second-order products needed by the
// backward (adjoint) recursion. This backend is the ground-truth oracle for
// the Barnes-Hut backend; it never truncates the kernel.

/// Unnormalized Gaussian, G(r) = exp(-r^2 / (2 sigma^2)). G(0) = 1, which is
/// what the block definition G * I3 of the kernel matrix requires.
inline double gaussian(double r, double sigma) {
  const double u = r / sigma;
  return std::exp(-0.5 * u * u);
}

/// The Hamiltonian here carries no 1/2 factor, so dH/dp_i = 2 sum_j G_ij p_j
/// is exactly twice the interpolated velocity sum_j G_ij p_j. The flow and
/// the warp both advance points with dH/dp, i.e. flow_velocity_factor times
/// the plain kernel sum. Everything that converts between the two conventions
/// goes through this one constant (asserted in the unit tests): a silent
/// mismatch between flow and gradient is the classic bug in this method.
inline constexpr double flow_velocity_factor = 2.0;

struct HamiltonianGradients {
  std::vector<Vec3> dH_dp;  // per point, dH/dp_i
  std::vector<Vec3> dH_dq;  // per point, dH/dq_i
};

/// H(q, p) = sum_i sum_j (p_i . p_j) G(|q_i - q_j|). Nonnegative because the
/// Gaussian Gram matrix is positive semidefinite.
double hamiltonian(const PointSet& q, const MomentumSet& p, double sigma);

/// Analytic first partials of `hamiltonian`:
///   dH/dp_i =  2           sum_j G_ij p_j
///   dH/dq_i = -(2/sigma^2) sum_j (p_i . p_j) G_ij (q_i - q_j)
double/*H*/ hamiltonian_with_gradients(const PointSet& q, const MomentumSet& p,
                                       double sigma, HamiltonianGradients& out);

HamiltonianGradients hamiltonian_gradients(const PointSet& q,
                                           const MomentumSet& p, double sigma);

/// v(x) = sum_i G(|x - q_i|) p_i for each x in q_eval. When q_eval aliases
/// q_src, the self term is included (it is part of dH/dp as well).
std::vector<Vec3> exact_velocity(const PointSet& q_eval, const PointSet& q_src,
                                 const MomentumSet& p_src, double sigma);

// ---------------------------------------------------------------------------
// Second-order products for the backward recursion.
//
// The backward pass transposes the linearized Euler step, which needs four
// Hessian-of-H products against the adjoints alpha (conjugate to q) and beta
// (conjugate to p). With g = G(|d|), d = q_i - q_j, s = sigma^2:
//
//   pq_alpha[i] = [ (d(dH/dp)/dq)^T a ]_i
//               = -(2/s) sum_j g [ (p_j . a_i) + (p_i . a_j) ] d
//   pp_alpha[i] = [ (d(dH/dp)/dp)^T a ]_i =  2 sum_j g a_j
//   qq_beta[i]  = [ (d(dH/dq)/dq)^T b ]_i
//               =  (2/s) sum_j (p_i . p_j) g [ (d . db) d / s - db ]
//   qp_beta[i]  = [ (d(dH/dq)/dp)^T b ]_i = -(2/s) sum_j g (d . db) p_j
//
// where db = b_i - b_j. Each is unit-tested against finite differences of
// hamiltonian_gradients before being trusted by the recursion.
// ---------------------------------------------------------------------------

struct HessianProducts {
  std::vector<Vec3> pq_alpha;
  std::vector<Vec3> pp_alpha;
  std::vector<Vec3> qq_beta;
  std::vector<Vec3> qp_beta;
};

HessianProducts hessian_products(const PointSet& q, const MomentumSet& p,
                                 const std::vector<Vec3>& alpha,
                                 const std::vector<Vec3>& beta, double sigma);

}  // namespace geoshoot
