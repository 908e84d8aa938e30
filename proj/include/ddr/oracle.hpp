#pragma once

#include <Eigen/Dense>

#include "ddr/detector.hpp"
#include "ddr/trellis.hpp"

namespace ddr::oracle {

/// Noiseless square-law output via the explicit Toeplitz channel matrix:
/// |Psi [s0; x']|^2 with rows of time-reversed two-fold-grid taps. Returns
/// the 2 * n_data samples of the data window. Independent of the streaming
/// simulation path.
std::vector<double> toeplitz_sld_output(const std::vector<cplx>& psi2, int mem,
                                        const Constellation& c, double gain,
                                        const std::vector<int>& preamble,
                                        const std::vector<int>& data);

/// log2 q(y) by exhaustive marginalization over all Q^(steps) input strings
/// with the initial state known.
double exhaustive_log2_py(const AuxiliaryChannel& aux, const Constellation& c, double gain,
                          const StepSequence& steps, bool diamond_only);

/// Exhaustive symbol posteriors p(x_k | y); rows are steps, columns symbols.
Eigen::MatrixXd exhaustive_posteriors(const AuxiliaryChannel& aux, const Constellation& c,
                                      double gain, const StepSequence& steps);

/// Random observation sequence drawn from the auxiliary channel model itself
/// (uniform inputs, model outputs plus unit-variance noise). Supports any
/// memory parity, unlike the physical link frames.
StepSequence sample_model_sequence(const AuxiliaryChannel& aux, const Constellation& c, double gain,
                                   size_t n_steps, uint64_t seed, double noise_sigma = 1.0);

}  // namespace ddr::oracle
