#include "cfx/mds.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace cfx {

namespace {

void check_matrix(const DistanceMatrix& m) {
  if (m.n < 2) throw CfxError("mds_embed: need at least 2 points");
  if (m.d.size() != m.n * m.n) throw CfxError("mds_embed: malformed matrix buffer");
  for (std::size_t i = 0; i < m.n; ++i) {
    if (m.at(i, i) != 0.0) throw CfxError("mds_embed: nonzero diagonal");
    for (std::size_t j = 0; j < m.n; ++j) {
      double v = m.at(i, j);
      if (!std::isfinite(v) || v < 0.0) throw CfxError("mds_embed: negative or non-finite distance");
      if (std::abs(v - m.at(j, i)) > 1e-9 * std::max(1.0, std::abs(v)))
        throw CfxError("mds_embed: matrix is not symmetric");
    }
  }
}

double raw_stress(const Eigen::MatrixXd& z, const DistanceMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = i + 1; j < m.n; ++j) {
      double dz = (z.row(static_cast<Eigen::Index>(i)) - z.row(static_cast<Eigen::Index>(j))).norm();
      double diff = dz - m.at(i, j);
      s += diff * diff;
    }
  return s;
}

}  // namespace

Embedding mds_embed(const DistanceMatrix& matrix, int dims, const MdsConfig& config) {
  if (dims < 1) throw CfxError("mds_embed: dims must be >= 1");
  check_matrix(matrix);
  auto n = static_cast<Eigen::Index>(matrix.n);

  // Classical scaling (double centering of squared distances) gives a
  // deterministic start that is already exact for Euclidean-embeddable input.
  Eigen::MatrixXd d2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = matrix.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      d2(i, j) = v * v;
    }
  Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  Eigen::MatrixXd b = -0.5 * centering * d2 * centering;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  if (eig.info() != Eigen::Success) throw CfxError("mds_embed: eigendecomposition failed");

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, dims);
  for (int d = 0; d < dims; ++d) {
    Eigen::Index src = n - 1 - d;  // eigenvalues come back ascending
    if (src < 0) break;
    double lambda = eig.eigenvalues()(src);
    if (lambda <= 0.0) continue;
    z.col(d) = eig.eigenvectors().col(src) * std::sqrt(lambda);
  }

  Embedding out;
  out.n = matrix.n;
  out.dims = dims;
  double stress = raw_stress(z, matrix);
  out.stress_history.push_back(stress);

  // Guttman transform iterations.
  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (stress == 0.0) break;
    Eigen::MatrixXd bz = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        double dz = (z.row(i) - z.row(j)).norm();
        double w = dz > 1e-15 ? -matrix.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) / dz : 0.0;
        bz(i, j) = w;
        row_sum += w;
      }
      bz(i, i) = -row_sum;
    }
    z = (bz * z) / static_cast<double>(n);

    double next = raw_stress(z, matrix);
    out.stress_history.push_back(next);
    double rel = std::abs(stress - next) / std::max(stress, 1e-300);
    stress = next;
    if (rel < config.rel_tol) break;
  }

  out.stress = stress;
  out.z.resize(matrix.n * static_cast<std::size_t>(dims));
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < dims; ++d) out.z[static_cast<std::size_t>(i) * dims + d] = z(i, d);
  return out;
}

}  // namespace cfx
