#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ddr/link.hpp"

namespace ddr {

/// Reduced-memory Gaussian auxiliary channel: the center taps of psi at the
/// two-fold grid plus per-phase residual means and variances (diamond and
/// spade samples respectively).
struct AuxiliaryChannel {
  std::vector<cplx> psi_prime;  // 2 * mem + 1 taps, center index = mem
  int mem = 1;                  // N~, odd
  double mu1 = 0.0, mu2 = 0.0;
  double var1 = 1.0, var2 = 1.0;
  bool variance_clamped = false;

  cplx tap(int offset) const { return psi_prime[static_cast<size_t>(offset + mem)]; }
};

/// Center 2*mem+1 two-fold-grid taps of the channel; taps beyond the true
/// memory are zero. For WDM scenarios the taps are band-limited by the
/// channel-select filter first.
std::vector<cplx> aux_taps(const DiscreteChannel& ch, int mem,
                           std::optional<double> select_bandwidth = std::nullopt);

/// Noiseless auxiliary-channel outputs for the actual transmitted string.
struct AuxOutputs {
  std::vector<double> z_diamond;
  std::vector<double> z_spade;
};
AuxOutputs aux_noiseless_outputs(const std::vector<cplx>& taps, int mem, const Constellation& c,
                                 double gain, const StepSequence& steps);

/// Estimates (mu1, mu2, var1, var2) as the sample moments of the residual
/// W = Y - |Psi' x|^2 on a training realization, split by sample phase.
AuxiliaryChannel estimate_aux_params(const LinkConfig& cfg, int aux_mem, size_t n_train,
                                     uint64_t train_seed);

/// Residual moments from an existing step sequence. Degenerate variances are
/// clamped at 1e-12 and flagged.
AuxiliaryChannel estimate_from_steps(std::vector<cplx> taps, int mem, const Constellation& c,
                                     double gain, const StepSequence& steps);

/// Empirical value of the divergence proxy E[-log2 q(Y|X)] per sample for
/// the given parameters, evaluated on held-out steps.
double aux_objective(const std::vector<cplx>& taps, int mem, const Constellation& c, double gain,
                     const StepSequence& steps, double mu1, double mu2, double var1, double var2);

/// Finite-state machine over the last `mem` symbols with precomputed
/// noiseless branch outputs: the diamond output depends on the state only,
/// the spade output on state and input.
class Trellis {
 public:
  Trellis(const AuxiliaryChannel& aux, const Constellation& c, double gain, bool force = false);

  int q() const { return q_; }
  int mem() const { return mem_; }
  size_t n_states() const { return n_states_; }
  double gain() const { return gain_; }
  const Constellation& constellation() const { return *cons_; }

  size_t next_state(size_t s, int input) const { return (s % mod_) * static_cast<size_t>(q_) + static_cast<size_t>(input); }
  int newest_symbol(size_t s) const { return static_cast<int>(s % static_cast<size_t>(q_)); }
  /// State id for symbols ordered oldest first.
  size_t state_of(const int* window) const;

  double z_diamond(size_t s) const { return z_diamond_[s]; }
  double z_spade(size_t s, int input) const { return z_spade_[s * static_cast<size_t>(q_) + static_cast<size_t>(input)]; }
  const double* z_spade_row(size_t s) const { return z_spade_.data() + s * static_cast<size_t>(q_); }

  /// q(yd | s) * q(ys | x, s) * P(x) with the auxiliary Gaussian factors.
  double branch_metric(const AuxiliaryChannel& aux, size_t s, int input, double yd,
                       double ys) const;

 private:
  int q_ = 0;
  int mem_ = 0;
  size_t n_states_ = 0;
  size_t mod_ = 0;  // Q^(mem-1)
  double gain_ = 1.0;
  const Constellation* cons_ = nullptr;
  std::vector<double> z_diamond_;
  std::vector<double> z_spade_;
};

struct ForwardOptions {
  bool diamond_only = false;
  bool log_domain = false;
  size_t step_limit = 0;  // 0 -> all steps
};

struct ForwardResult {
  double log2_py = 0.0;
  std::vector<double> step_log2;  // per-step increments of log2 q(y)
};

/// Normalized forward recursion over the trellis; per-step normalizers are
/// accumulated as the log output density. Underflow of the whole state
/// vector raises a numeric error.
ForwardResult forward_log_output_density(const Trellis& t, const AuxiliaryChannel& aux,
                                         const StepSequence& steps, const ForwardOptions& opts = {},
                                         std::vector<std::vector<double>>* alphas = nullptr);

/// log2 q(y | x) as a direct sum of Gaussian log densities along the true
/// transmitted path.
ForwardResult forward_log_conditional_density(const Trellis& t, const AuxiliaryChannel& aux,
                                              const StepSequence& steps,
                                              const ForwardOptions& opts = {});

struct RateEstimate {
  double snr_db = 0.0;
  double rate_total = 0.0;        // I_q(X;Y), bpcu
  double rate_diamond = 0.0;      // I_q(X;Y_diamond)
  double rate_spade_cond = 0.0;   // I_q(X;Y_spade | Y_diamond) = total - diamond
  double half_width_total = 0.0;  // block-bootstrap uncertainty
  double half_width_diamond = 0.0;
  double log2_py = 0.0;           // forward-path output density (consistency checks)
};

/// Simulation-based achievable rate of the auxiliary channel with the
/// optional diamond/spade chain-rule decomposition.
RateEstimate forward_rate(const Trellis& t, const AuxiliaryChannel& aux, const StepSequence& steps,
                          bool decompose, bool log_domain = false, uint64_t bootstrap_seed = 7);

/// Differential entropy rate of the Gaussian noise, bits per sample.
double awgn_entropy_rate(double sigma2);

}  // namespace ddr
