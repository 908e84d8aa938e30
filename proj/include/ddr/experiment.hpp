#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddr/bounds.hpp"
#include "ddr/detector.hpp"

namespace ddr {

enum class Scenario { Rates, Ser, Bounds, WdmCompare, RateDecomposition };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& s);

struct ExperimentConfig {
  Scenario scenario = Scenario::Rates;
  std::string constellation = "2-PAM";
  std::string constellation_file;  // overrides `constellation` when set
  PulseSpec pulse{PulseKind::Sinc, 0.0, 1.0 / 35e9};
  int span_symbols = 32;
  FiberParams fiber{};
  std::vector<double> snr_grid_db{-5, -3, -1, 1, 3, 5, 7, 9, 11, 13};
  size_t n_symbols = 20000;  // n/2 per realization
  int aux_memory = 5;
  std::vector<uint64_t> seeds{1};
  size_t train_symbols = 100000;
  bool rate_decomposition = true;
  bool with_bounds = false;
  int cov_window = 256;
  size_t cov_trials = 2000;
  size_t ser_trials = 1;
  DecisionMode decision = DecisionMode::Joint;
  double wdm_spacing_hz = 0.0;  // 0 -> B for sinc/fdrc, measured bandwidth for tdrc
  bool ici = true;
  double trunc_energy = 1e-6;
  int max_memory = 301;
  bool force = false;
  bool log_domain = false;
  int threads = 0;  // 0 -> hardware concurrency
  std::string out_path = "results.csv";
};

struct ResultRow {
  std::string scenario;
  std::string constellation;
  std::string pulse;
  double alpha = 0.0;
  double length_km = 0.0;
  double snr_db = 0.0;
  double rate_total = 0.0;
  double rate_diamond = 0.0;
  double rate_spade_cond = 0.0;
  double ub_logdet = 0.0;
  double ub_scalar = 0.0;
  double ser = 0.0;
  double se_bits_s_hz = 0.0;
  int aux_memory = 0;
  size_t n_symbols = 0;
  uint64_t seed = 0;
  double mc_half_width = 0.0;
};

ExperimentConfig load_config(const std::string& json_path);

/// Runs the configured scenario over the SNR grid and seeds. Completed rows
/// are appended to `rows` as they finish so an interrupted run can still be
/// flushed; on success the rows come back sorted and invariant-checked.
void run(const ExperimentConfig& config, std::vector<ResultRow>& rows);

/// Fixed 17-column schema with round-trip float formatting.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
std::string csv_string(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

void write_metadata(const ExperimentConfig& config, const std::string& csv_path);

/// Brute-force verification suite (forward recursion, posteriors and the
/// Toeplitz matrix form against their streaming counterparts). Returns the
/// number of failed checks.
int run_oracle_suite(size_t max_symbols, std::ostream& log);

}  // namespace ddr
