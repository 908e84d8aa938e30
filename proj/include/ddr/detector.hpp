#pragma once

#include <vector>

#include "ddr/trellis.hpp"

namespace ddr {

/// Transmitted-symbol posteriors from the forward-backward pass, plus the
/// consecutive-pair marginals used to decode differential phase inside the
/// detector.
struct AppTable {
  size_t n_steps = 0;  // data steps
  int q = 0;
  std::vector<double> posteriors;       // [step * q + a] = p(x_k = a | y)
  std::vector<double> pair_posteriors;  // [step * q * q + prev * q + a], steps >= 2
  double log2_py = 0.0;                 // forward-path output density

  double app(size_t step, int a) const { return posteriors[step * static_cast<size_t>(q) + static_cast<size_t>(a)]; }
  double pair(size_t step, int prev, int a) const {
    return pair_posteriors[(step * static_cast<size_t>(q) + static_cast<size_t>(prev)) * static_cast<size_t>(q) + static_cast<size_t>(a)];
  }
};

enum class TerminalMode { KnownTail, Uniform };
enum class DecisionMode { Joint, Hard };

/// Symbol-wise MAP posteriors on the auxiliary trellis. With KnownTail the
/// step sequence must include the trailing known steps; the backward pass is
/// then pinned through them.
AppTable forward_backward(const Trellis& t, const AuxiliaryChannel& aux, const StepSequence& steps,
                          TerminalMode mode = TerminalMode::KnownTail);

/// Per-step argmax of the transmitted-symbol APPs; ties break to the lowest
/// constellation index.
std::vector<int> map_decide(const AppTable& apps);

/// Information-symbol decisions: marginalize the pair posteriors through the
/// differential map (or decode hard MAP decisions when mode is Hard).
std::vector<int> decide_info(const AppTable& apps, const Constellation& c, DecisionMode mode);

struct DetectionReport {
  double snr_db = 0.0;
  double ser = 0.0;
  size_t n_symbols = 0;
  size_t errors = 0;
  int aux_memory = 0;
};

/// End-to-end symbol error rate on information symbols: simulate, detect,
/// differentially decode, count.
DetectionReport measure_ser(const LinkConfig& cfg, const Trellis& t, const AuxiliaryChannel& aux,
                            size_t n_trials, DecisionMode mode = DecisionMode::Joint,
                            TerminalMode terminal = TerminalMode::KnownTail);

}  // namespace ddr
