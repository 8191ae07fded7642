#include <Eigen/Dense>

#include "geoshoot/pipeline.hpp"

namespace geoshoot {

ProcrustesResult procrustes_align(const PointSet& source,
                                  const PointSet& target) {
  require_aligned(source.size(), target.size(), "procrustes_align");
  const std::size_t n = source.size();
  if (n < 3)
    throw DegenerateConfiguration("procrustes_align: needs at least 3 points");

  Vec3 s_mean{}, t_mean{};
  for (std::size_t i = 0; i < n; ++i) {
    s_mean += source[i];
    t_mean += target[i];
  }
  s_mean *= 1.0 / n;
  t_mean *= 1.0 / n;

  // Cross-covariance H = sum (s_i - s_mean)(t_i - t_mean)^T.
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s = source[i] - s_mean;
    const Vec3 t = target[i] - t_mean;
    const Eigen::Vector3d sv(s.x, s.y, s.z);
    const Eigen::Vector3d tv(t.x, t.y, t.z);
    h += sv * tv.transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  // Collinear sources leave the rotation about their axis undetermined.
  if (!(sv(1) > 1e-12 * sv(0)))
    throw DegenerateConfiguration(
        "procrustes_align: rank-deficient cross-covariance (collinear points?)");

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();

  RigidTransform tf;
  for (int i = 0; i < 3; ++i)
    tf.rotation_rows[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1), r(i, 2)};
  const Vec3 rs = {dot(tf.rotation_rows[0], s_mean),
                   dot(tf.rotation_rows[1], s_mean),
                   dot(tf.rotation_rows[2], s_mean)};
  tf.translation = t_mean - rs;

  std::vector<Vec3> aligned;
  aligned.reserve(n);
  for (std::size_t i = 0; i < n; ++i) aligned.push_back(tf.apply(source[i]));
  return {tf, PointSet(std::move(aligned))};
}

}  // namespace geoshoot
