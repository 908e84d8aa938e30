#pragma once

#include <Eigen/Dense>

#include "ddr/link.hpp"

namespace ddr {

/// Monte-Carlo estimate of the noiseless-output mean and covariance over a
/// window of consecutive receiver samples (diamond sample first).
struct OutputCovariance {
  Eigen::MatrixXd c_zz;
  Eigen::VectorXd mean_z;
  int n_window = 0;
};

OutputCovariance estimate_czz(const LinkConfig& cfg, int n_window, size_t n_trials, uint64_t seed);

/// Gaussian-output bound (2/n) * (1/2) log2 det(I + C_ZZ / sigma^2), bpcu.
double upper_bound_logdet(const OutputCovariance& cov, double sigma2);

/// Trace bound log2(1 + mean diagonal power / sigma^2), bpcu.
double upper_bound_scalar(const OutputCovariance& cov, double sigma2);

}  // namespace ddr
