#include "footif/fastica.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "footif/error.hpp"

namespace footif {
namespace {

// (W W^T)^{-1/2} W
Eigen::MatrixXd decorrelate(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

FastIcaResult fast_ica(const Eigen::MatrixXd& data, const FastIcaOptions& opts) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const Eigen::Index k = opts.n_components;
  if (k < 1 || k > p) throw Error(ErrorCode::InvalidArgument, "component count out of range");
  if (n < 2) throw Error(ErrorCode::DegenerateWhitening, "need at least 2 observations");

  FastIcaResult res;
  res.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - res.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  // Eigen sorts ascending; take the k largest and fix each vector's sign.
  const Eigen::VectorXd evals = es.eigenvalues().reverse();
  Eigen::MatrixXd evecs = es.eigenvectors().rowwise().reverse();
  const double top = evals[0];
  if (!(top > 0.0) || evals[k - 1] <= 1e-12 * top) {
    throw Error(ErrorCode::DegenerateWhitening,
                "covariance rank is below " + std::to_string(k) + " components");
  }
  res.whitening.resize(k, p);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    evecs.col(c).cwiseAbs().maxCoeff(&arg);
    if (evecs(arg, c) < 0) evecs.col(c) *= -1.0;
    res.whitening.row(c) = evecs.col(c).transpose() / std::sqrt(evals[c]);
  }
  const Eigen::MatrixXd z = res.whitening * centered.transpose();  // k x n

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < k; ++c) w(r, c) = normal(rng);
  }
  w = decorrelate(w);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::MatrixXd g = (w * z).array().tanh().matrix();
    const Eigen::VectorXd g_prime = (1.0 - g.array().square()).rowwise().mean();
    Eigen::MatrixXd next = g * z.transpose() * inv_n - g_prime.asDiagonal() * w;
    next = decorrelate(next);
    const double change = ((next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = next;
    if (change < opts.tolerance) {
      res.unmixing = w;
      res.iterations = it;
      return res;
    }
  }
  throw Error(ErrorCode::NonConvergence,
              "FastICA did not converge in " + std::to_string(opts.max_iterations) + " iterations");
}

}  // namespace footif
