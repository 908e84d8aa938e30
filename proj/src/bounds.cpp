#include "ddr/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace ddr {

OutputCovariance estimate_czz(const LinkConfig& cfg, int n_window, size_t n_trials, uint64_t seed) {
  if (n_window < 2 || n_window % 2 != 0) throw std::invalid_argument("window must be even");
  if (n_trials < 2) throw std::invalid_argument("need at least two trials");

  LinkConfig c = cfg;
  c.n_symbols = static_cast<size_t>(n_window) / 2 + 8;
  if (2 * c.n_symbols < static_cast<size_t>(n_window))
    throw std::invalid_argument("window exceeds the simulated length");

  const int n = n_window;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd w(n);
  for (size_t trial = 0; trial < n_trials; ++trial) {
    c.seed = mix_seed(seed, trial);
    LinkRealization real = simulate(c);
    // Guard symbols make every sample in [1 - mem, 2 n_data - mem] fully
    // determined; the first window position is even (a diamond sample).
    int p0 = 1 - real.channel_memory;
    for (int i = 0; i < n; ++i) w(i) = real.z_at(p0 + i);
    mean += w;
    outer += w * w.transpose();
  }
  double inv = 1.0 / static_cast<double>(n_trials);
  mean *= inv;
  outer *= inv;

  OutputCovariance cov;
  cov.n_window = n;
  cov.mean_z = mean;
  Eigen::MatrixXd raw = outer - mean * mean.transpose();
  cov.c_zz = 0.5 * (raw + raw.transpose());  // estimator noise breaks symmetry
  return cov;
}

double upper_bound_logdet(const OutputCovariance& cov, double sigma2) {
  if (!(sigma2 > 0)) throw std::invalid_argument("noise variance must be positive");
  if (!cov.c_zz.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.c_zz);
  double acc = 0;
  for (int i = 0; i < cov.n_window; ++i) {
    double lambda = std::max(0.0, eig.eigenvalues()(i));  // clip MC negatives
    acc += std::log2(1.0 + lambda / sigma2);
  }
  return acc / static_cast<double>(cov.n_window);  // (2/n) * (1/2) * sum
}

double upper_bound_scalar(const OutputCovariance& cov, double sigma2) {
  if (!(sigma2 > 0)) throw std::invalid_argument("noise variance must be positive");
  if (!cov.c_zz.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
  double avg = cov.c_zz.trace() / static_cast<double>(cov.n_window);
  return std::log2(1.0 + avg / sigma2);
}

}  // namespace ddr
