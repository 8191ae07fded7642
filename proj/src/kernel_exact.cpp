#include "geoshoot/kernel_exact.hpp"

namespace geoshoot {

namespace {

inline double pair_kernel(const Vec3& d, double inv_two_s) {
  return std::exp(-norm2(d) * inv_two_s);
}

}  // namespace

double hamiltonian(const PointSet& q, const MomentumSet& p, double sigma) {
  require_aligned(q.size(), p.size(), "hamiltonian");
  const std::size_t n = q.size();
  const double inv_two_s = 1.0 / (2.0 * sigma * sigma);

  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) h += dot(p[i], p[i]);  // diagonal, g = 1
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = pair_kernel(q[i] - q[j], inv_two_s);
      h += 2.0 * dot(p[i], p[j]) * g;
    }
  }
  return h;
}

double hamiltonian_with_gradients(const PointSet& q, const MomentumSet& p,
                                  double sigma, HamiltonianGradients& out) {
  require_aligned(q.size(), p.size(), "hamiltonian_gradients");
  const std::size_t n = q.size();
  const double s = sigma * sigma;
  const double inv_two_s = 1.0 / (2.0 * s);
  const double two_over_s = 2.0 / s;

  out.dH_dp.assign(n, Vec3{});
  out.dH_dq.assign(n, Vec3{});

  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.dH_dp[i] = 2.0 * p[i];  // self term, g = 1
    h += dot(p[i], p[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 qi = q[i];
    const Vec3 pi = p[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = qi - q[j];
      const double g = pair_kernel(d, inv_two_s);
      const double pipj = dot(pi, p[j]);
      out.dH_dp[i] += (2.0 * g) * p[j];
      out.dH_dp[j] += (2.0 * g) * pi;
      const Vec3 grad = (two_over_s * pipj * g) * d;
      out.dH_dq[i] -= grad;
      out.dH_dq[j] += grad;
      h += 2.0 * pipj * g;
    }
  }
  return h;
}

HamiltonianGradients hamiltonian_gradients(const PointSet& q,
                                           const MomentumSet& p, double sigma) {
  HamiltonianGradients out;
  hamiltonian_with_gradients(q, p, sigma, out);
  return out;
}

std::vector<Vec3> exact_velocity(const PointSet& q_eval, const PointSet& q_src,
                                 const MomentumSet& p_src, double sigma) {
  require_aligned(q_src.size(), p_src.size(), "exact_velocity");
  const double inv_two_s = 1.0 / (2.0 * sigma * sigma);
  std::vector<Vec3> v(q_eval.size(), Vec3{});
  for (std::size_t e = 0; e < q_eval.size(); ++e) {
    Vec3 sum{};
    for (std::size_t i = 0; i < q_src.size(); ++i)
      sum += pair_kernel(q_eval[e] - q_src[i], inv_two_s) * p_src[i];
    v[e] = sum;
  }
  return v;
}

HessianProducts hessian_products(const PointSet& q, const MomentumSet& p,
                                 const std::vector<Vec3>& alpha,
                                 const std::vector<Vec3>& beta, double sigma) {
  require_aligned(q.size(), p.size(), "hessian_products");
  require_aligned(q.size(), alpha.size(), "hessian_products(alpha)");
  require_aligned(q.size(), beta.size(), "hessian_products(beta)");
  const std::size_t n = q.size();
  const double s = sigma * sigma;
  const double inv_s = 1.0 / s;
  const double inv_two_s = 0.5 * inv_s;
  const double two_over_s = 2.0 * inv_s;

  HessianProducts out;
  out.pq_alpha.assign(n, Vec3{});
  out.pp_alpha.assign(n, Vec3{});
  out.qq_beta.assign(n, Vec3{});
  out.qp_beta.assign(n, Vec3{});

  for (std::size_t i = 0; i < n; ++i) out.pp_alpha[i] = 2.0 * alpha[i];

  // Every off-diagonal pair contributes to both endpoints; the (i, i) terms
  // vanish because d = 0 and beta_i - beta_i = 0.
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 qi = q[i];
    const Vec3 pi = p[i];
    const Vec3 ai = alpha[i];
    const Vec3 bi = beta[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = qi - q[j];
      const double g = pair_kernel(d, inv_two_s);
      const Vec3 db = bi - beta[j];
      const double d_db = dot(d, db);

      const double uc = two_over_s * g * (dot(p[j], ai) + dot(pi, alpha[j]));
      out.pq_alpha[i] -= uc * d;
      out.pq_alpha[j] += uc * d;

      out.pp_alpha[i] += (2.0 * g) * alpha[j];
      out.pp_alpha[j] += (2.0 * g) * ai;

      const double zc = two_over_s * g * dot(pi, p[j]);
      const Vec3 zterm = (d_db * inv_s) * d - db;
      out.qq_beta[i] += zc * zterm;
      out.qq_beta[j] -= zc * zterm;

      const double mc = two_over_s * g * d_db;
      out.qp_beta[i] -= mc * p[j];
      out.qp_beta[j] -= mc * pi;
    }
  }
  return out;
}

}  // namespace geoshoot
