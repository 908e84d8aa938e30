#include <fstream>
#include <iostream>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddr/experiment.hpp"

namespace {

bool parse_on_off(const std::string& v, const char* flag) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw CLI::ValidationError(std::string(flag) + " expects on|off");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Achievable-rate, bound and SER simulator for direct-detection fiber links"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run an experiment scenario and write a CSV");
  std::string config_path, scenario, out_path, constellation, constellation_file, pulse, decision;
  std::string rate_decomp, bounds_flag, ici_flag;
  std::vector<double> snr_grid;
  std::vector<uint64_t> seeds;
  double rolloff = -1, baud = 0, length_km = -1, atten = -1, trunc = 0, wdm_spacing = 0;
  double beta2 = std::numeric_limits<double>::quiet_NaN();
  long long symbols = 0, aux_memory = 0, span = 0, train_symbols = 0, cov_window = 0, trials = 0,
            threads = 0;
  bool force = false, log_domain = false, detect = false;

  run_cmd->add_option("--config", config_path, "JSON config file; flags override its values");
  run_cmd->add_option("--scenario", scenario, "rates|ser|bounds|wdm-compare|rate-decomposition");
  run_cmd->add_option("--out", out_path, "output CSV path");
  run_cmd->add_option("--constellation", constellation, "2-PAM|4-PAM|8-PAM|2-ASK|4-ASK|8-ASK|QPSK|8-SQAM");
  run_cmd->add_option("--constellation-file", constellation_file, "custom alphabet, one 're im' per line");
  run_cmd->add_option("--pulse", pulse, "sinc|fdrc|tdrc");
  run_cmd->add_option("--rolloff", rolloff, "roll-off factor in [0,1]");
  run_cmd->add_option("--span", span, "pulse truncation span in symbol periods");
  run_cmd->add_option("--baud", baud, "symbol rate B in Hz");
  run_cmd->add_option("--length-km", length_km, "fiber length");
  run_cmd->add_option("--beta2", beta2, "CD parameter in s^2/m");
  run_cmd->add_option("--atten-db-km", atten, "attenuation in dB/km");
  run_cmd->add_option("--trunc-energy", trunc, "channel truncation tail-energy threshold");
  run_cmd->add_option("--snr-db", snr_grid, "SNR grid in dB")->delimiter(',');
  run_cmd->add_option("--symbols", symbols, "transmit symbols per realization (n/2)");
  run_cmd->add_option("--seed", seeds, "seeds, one task per (SNR, seed)")->delimiter(',');
  run_cmd->add_option("--aux-memory", aux_memory, "auxiliary channel memory (odd)");
  run_cmd->add_option("--train-symbols", train_symbols, "training length for (mu, sigma^2)");
  run_cmd->add_option("--rate-decomposition", rate_decomp, "on|off diamond/spade split");
  run_cmd->add_option("--bounds", bounds_flag, "on|off Gaussian upper bounds");
  run_cmd->add_option("--cov-window", cov_window, "covariance window length (samples)");
  run_cmd->add_flag("--detect", detect, "shortcut for --scenario ser");
  run_cmd->add_option("--trials", trials, "detection trials");
  run_cmd->add_option("--decision", decision, "joint|hard information-symbol decision");
  run_cmd->add_option("--wdm-spacing", wdm_spacing, "WDM channel spacing B_c in Hz");
  run_cmd->add_option("--ici", ici_flag, "on|off neighbouring-channel interference");
  run_cmd->add_flag("--force", force, "override the trellis size guard");
  run_cmd->add_flag("--log-domain", log_domain, "log-domain forward recursion");
  run_cmd->add_option("--threads", threads, "worker threads (0 = hardware)");

  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force verification suite");
  long long max_symbols = 8;
  oracle_cmd->add_option("--max-symbols", max_symbols, "string length for exhaustive checks");

  auto* dump_cmd = app.add_subcommand("dump", "Write one realization's samples for debugging");
  std::string dump_out = "samples.csv", dump_constellation = "QPSK", dump_pulse = "sinc";
  double dump_snr = 6.0, dump_rolloff = 0.0, dump_length = 0.0, dump_wdm = 0.0;
  long long dump_symbols = 256, dump_seed = 1;
  std::string dump_ici;
  dump_cmd->add_option("--out", dump_out, "output CSV (position, z, y)");
  dump_cmd->add_option("--constellation", dump_constellation, "alphabet name");
  dump_cmd->add_option("--pulse", dump_pulse, "sinc|fdrc|tdrc");
  dump_cmd->add_option("--rolloff", dump_rolloff, "roll-off factor");
  dump_cmd->add_option("--snr-db", dump_snr, "SNR in dB");
  dump_cmd->add_option("--length-km", dump_length, "fiber length");
  dump_cmd->add_option("--symbols", dump_symbols, "data symbols");
  dump_cmd->add_option("--seed", dump_seed, "RNG seed");
  dump_cmd->add_option("--wdm-spacing", dump_wdm, "enable WDM at this spacing (Hz)");
  dump_cmd->add_option("--ici", dump_ici, "on|off neighbours (with --wdm-spacing)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle_cmd->parsed()) {
      int failures = ddr::run_oracle_suite(static_cast<size_t>(max_symbols), std::cout);
      return failures == 0 ? 0 : 1;
    }

    if (dump_cmd->parsed()) {
      ddr::PulseSpec spec{ddr::pulse_kind_from_name(dump_pulse), dump_rolloff, 1.0 / 35e9};
      ddr::FiberParams fiber;
      fiber.length_m = dump_length * 1000.0;
      ddr::DiscreteChannel ch =
          ddr::build_discrete_channel(ddr::transmit_pulse_taps(spec, 4, 32), spec, fiber);
      ddr::Constellation cons = ddr::Constellation::named(dump_constellation);
      ddr::LinkConfig lc;
      lc.channel = &ch;
      lc.constellation = &cons;
      lc.snr_db = dump_snr;
      lc.n_symbols = static_cast<size_t>(dump_symbols);
      lc.seed = static_cast<uint64_t>(dump_seed);
      if (dump_wdm > 0) {
        ddr::WdmConfig w;
        w.channel_spacing = dump_wdm;
        if (!dump_ici.empty()) w.enable_ici = parse_on_off(dump_ici, "--ici");
        lc.wdm = w;
      }
      ddr::LinkRealization real = ddr::simulate(lc);
      std::ofstream out(dump_out);
      if (!out) throw std::runtime_error("cannot write " + dump_out);
      out << "position,z,y\n";
      for (size_t i = 0; i < real.z.size(); ++i)
        out << real.origin + static_cast<int>(i) << ',' << real.z[i] << ',' << real.y[i] << '\n';
      std::cout << "wrote " << real.z.size() << " samples to " << dump_out << "\n";
      return 0;
    }

    ddr::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ddr::load_config(config_path);
    if (!scenario.empty()) cfg.scenario = ddr::scenario_from_name(scenario);
    if (detect) cfg.scenario = ddr::Scenario::Ser;
    if (!out_path.empty()) cfg.out_path = out_path;
    if (!constellation.empty()) cfg.constellation = constellation;
    if (!constellation_file.empty()) cfg.constellation_file = constellation_file;
    if (!pulse.empty()) cfg.pulse.kind = ddr::pulse_kind_from_name(pulse);
    if (rolloff >= 0) cfg.pulse.alpha = rolloff;
    if (baud > 0) cfg.pulse.symbol_period = 1.0 / baud;
    if (span > 0) cfg.span_symbols = static_cast<int>(span);
    if (length_km >= 0) cfg.fiber.length_m = length_km * 1000.0;
    if (!std::isnan(beta2)) cfg.fiber.beta2 = beta2;
    if (atten >= 0) cfg.fiber.attenuation_db_per_km = atten;
    if (trunc > 0) cfg.trunc_energy = trunc;
    if (!snr_grid.empty()) cfg.snr_grid_db = snr_grid;
    if (symbols > 0) cfg.n_symbols = static_cast<size_t>(symbols);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (aux_memory > 0) cfg.aux_memory = static_cast<int>(aux_memory);
    if (train_symbols > 0) cfg.train_symbols = static_cast<size_t>(train_symbols);
    if (!rate_decomp.empty()) cfg.rate_decomposition = parse_on_off(rate_decomp, "--rate-decomposition");
    if (!bounds_flag.empty()) cfg.with_bounds = parse_on_off(bounds_flag, "--bounds");
    if (cov_window > 0) cfg.cov_window = static_cast<int>(cov_window);
    if (trials > 0) cfg.ser_trials = static_cast<size_t>(trials);
    if (!decision.empty())
      cfg.decision = decision == "hard" ? ddr::DecisionMode::Hard : ddr::DecisionMode::Joint;
    if (wdm_spacing > 0) cfg.wdm_spacing_hz = wdm_spacing;
    if (!ici_flag.empty()) cfg.ici = parse_on_off(ici_flag, "--ici");
    if (force) cfg.force = true;
    if (log_domain) cfg.log_domain = true;
    if (threads > 0) cfg.threads = static_cast<int>(threads);

    std::vector<ddr::ResultRow> rows;
    try {
      ddr::run(cfg, rows);
    } catch (const std::exception& e) {
      if (!rows.empty()) {
        ddr::emit_csv(rows, cfg.out_path + ".partial");
        std::cerr << "flushed " << rows.size() << " partial rows to " << cfg.out_path
                  << ".partial\n";
      }
      throw;
    }
    ddr::emit_csv(rows, cfg.out_path);
    ddr::write_metadata(cfg, cfg.out_path);
    std::cout << "wrote " << rows.size() << " rows to " << cfg.out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
