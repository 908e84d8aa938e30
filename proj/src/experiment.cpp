#include "ddr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "ddr/oracle.hpp"

namespace ddr {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw std::runtime_error("bad float field: " + s);
  return v;
}

struct RunContext {
  Constellation cons;
  DiscreteChannel channel;
  double se_divisor = 1.0;  // occupied bandwidth over B
  double wdm_spacing = 0.0;
};

ResultRow base_row(const ExperimentConfig& cfg, const RunContext& ctx, double snr, uint64_t seed,
                   const std::string& pulse_label) {
  ResultRow row;
  row.scenario = scenario_name(cfg.scenario);
  row.constellation = ctx.cons.name();
  row.pulse = pulse_label;
  row.alpha = cfg.pulse.alpha;
  row.length_km = cfg.fiber.length_m / 1000.0;
  row.snr_db = snr;
  row.rate_total = row.rate_diamond = row.rate_spade_cond = std::numeric_limits<double>::quiet_NaN();
  row.ub_logdet = row.ub_scalar = std::numeric_limits<double>::quiet_NaN();
  row.ser = std::numeric_limits<double>::quiet_NaN();
  row.se_bits_s_hz = std::numeric_limits<double>::quiet_NaN();
  row.aux_memory = cfg.aux_memory;
  row.n_symbols = cfg.n_symbols;
  row.seed = seed;
  row.mc_half_width = std::numeric_limits<double>::quiet_NaN();
  return row;
}

LinkConfig make_link_config(const ExperimentConfig& cfg, const RunContext& ctx, double snr,
                            uint64_t seed, bool with_wdm, bool ici) {
  LinkConfig lc;
  lc.channel = &ctx.channel;
  lc.constellation = &ctx.cons;
  lc.snr_db = snr;
  lc.n_symbols = cfg.n_symbols;
  lc.seed = seed;
  lc.guard_symbols = cfg.aux_memory;
  if (with_wdm) {
    WdmConfig w;
    w.channel_spacing = ctx.wdm_spacing;
    w.enable_ici = ici;
    lc.wdm = w;
  }
  return lc;
}

ResultRow rates_task(const ExperimentConfig& cfg, const RunContext& ctx, double snr, uint64_t seed,
                     size_t snr_index, bool with_wdm, bool ici, const std::string& pulse_label) {
  ResultRow row = base_row(cfg, ctx, snr, seed, pulse_label);
  LinkConfig lc = make_link_config(cfg, ctx, snr, seed, with_wdm, ici);

  AuxiliaryChannel aux =
      estimate_aux_params(lc, cfg.aux_memory, cfg.train_symbols, mix_seed(seed, 0x7100 + snr_index));
  LinkRealization real = simulate(lc);
  StepSequence steps = make_steps(real, cfg.aux_memory, /*noisy=*/true, /*include_tail=*/false);
  Trellis trellis(aux, ctx.cons, real.gain, cfg.force);

  bool decompose = cfg.rate_decomposition || cfg.scenario == Scenario::RateDecomposition;
  RateEstimate r =
      forward_rate(trellis, aux, steps, decompose, cfg.log_domain, mix_seed(seed, 0xb007));
  row.rate_total = r.rate_total;
  row.mc_half_width = r.half_width_total;
  if (decompose) {
    row.rate_diamond = r.rate_diamond;
    row.rate_spade_cond = r.rate_spade_cond;
  }
  row.se_bits_s_hz = r.rate_total / ctx.se_divisor;

  if (cfg.with_bounds || cfg.scenario == Scenario::Bounds) {
    OutputCovariance cov = estimate_czz(lc, cfg.cov_window, cfg.cov_trials, mix_seed(seed, 0xc0f));
    row.ub_logdet = upper_bound_logdet(cov, 1.0);
    row.ub_scalar = upper_bound_scalar(cov, 1.0);
  }
  return row;
}

ResultRow ser_task(const ExperimentConfig& cfg, const RunContext& ctx, double snr, uint64_t seed,
                   size_t snr_index) {
  ResultRow row = base_row(cfg, ctx, snr, seed, pulse_kind_name(cfg.pulse.kind));
  LinkConfig lc = make_link_config(cfg, ctx, snr, seed, false, false);
  AuxiliaryChannel aux =
      estimate_aux_params(lc, cfg.aux_memory, cfg.train_symbols, mix_seed(seed, 0x7100 + snr_index));
  LinkRealization probe = simulate(lc);  // gain only; trellis needs it
  Trellis trellis(aux, ctx.cons, probe.gain, cfg.force);
  DetectionReport rep = measure_ser(lc, trellis, aux, cfg.ser_trials, cfg.decision);
  row.ser = rep.ser;
  row.n_symbols = rep.n_symbols;
  return row;
}

void validate_rows(const ExperimentConfig& cfg, const RunContext& ctx,
                   const std::vector<ResultRow>& rows) {
  double cap = std::log2(static_cast<double>(ctx.cons.q()));
  for (const ResultRow& r : rows) {
    if (!std::isnan(r.rate_total)) {
      if (r.rate_total < -0.1 || r.rate_total > cap + 0.1)
        throw std::runtime_error("rate outside [0, log2 Q] beyond tolerance at SNR " +
                                 std::to_string(r.snr_db));
      if (!std::isnan(r.rate_diamond) &&
          std::abs(r.rate_total - r.rate_diamond - r.rate_spade_cond) > 1e-12)
        throw std::runtime_error("chain-rule identity violated");
    }
    if (!std::isnan(r.ub_logdet)) {
      if (r.ub_logdet > r.ub_scalar + 1e-9)
        throw std::runtime_error("log-det bound exceeds the scalar bound at SNR " +
                                 std::to_string(r.snr_db));
      double slack = std::isnan(r.mc_half_width) ? 0.0 : r.mc_half_width;
      if (!std::isnan(r.rate_total) && r.rate_total - slack > r.ub_logdet + 1e-9)
        throw std::runtime_error("achievable rate exceeds the upper bound at SNR " +
                                 std::to_string(r.snr_db));
    }
    if (!std::isnan(r.ser) && (r.ser < 0.0 || r.ser > 1.0))
      throw std::runtime_error("SER outside [0,1]");
  }
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Rates: return "rates";
    case Scenario::Ser: return "ser";
    case Scenario::Bounds: return "bounds";
    case Scenario::WdmCompare: return "wdm-compare";
    case Scenario::RateDecomposition: return "rate-decomposition";
  }
  return "?";
}

Scenario scenario_from_name(const std::string& s) {
  if (s == "rates") return Scenario::Rates;
  if (s == "ser") return Scenario::Ser;
  if (s == "bounds") return Scenario::Bounds;
  if (s == "wdm-compare") return Scenario::WdmCompare;
  if (s == "rate-decomposition") return Scenario::RateDecomposition;
  throw std::invalid_argument("unknown scenario: " + s);
}

ExperimentConfig load_config(const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw std::runtime_error("cannot open config: " + json_path);
  json j;
  in >> j;

  ExperimentConfig cfg;
  if (j.contains("scenario")) cfg.scenario = scenario_from_name(j["scenario"]);
  if (j.contains("constellation")) cfg.constellation = j["constellation"];
  if (j.contains("constellation_file")) cfg.constellation_file = j["constellation_file"];
  if (j.contains("pulse")) cfg.pulse.kind = pulse_kind_from_name(j["pulse"]);
  if (j.contains("rolloff")) cfg.pulse.alpha = j["rolloff"];
  if (j.contains("baud")) cfg.pulse.symbol_period = 1.0 / j["baud"].get<double>();
  if (j.contains("span")) cfg.span_symbols = j["span"];
  if (j.contains("length_km")) cfg.fiber.length_m = j["length_km"].get<double>() * 1000.0;
  if (j.contains("beta2")) cfg.fiber.beta2 = j["beta2"];
  if (j.contains("atten_db_km")) cfg.fiber.attenuation_db_per_km = j["atten_db_km"];
  if (j.contains("snr_db")) cfg.snr_grid_db = j["snr_db"].get<std::vector<double>>();
  if (j.contains("symbols")) cfg.n_symbols = j["symbols"];
  if (j.contains("aux_memory")) cfg.aux_memory = j["aux_memory"];
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<uint64_t>>();
  if (j.contains("train_symbols")) cfg.train_symbols = j["train_symbols"];
  if (j.contains("rate_decomposition")) cfg.rate_decomposition = j["rate_decomposition"];
  if (j.contains("bounds")) cfg.with_bounds = j["bounds"];
  if (j.contains("cov_window")) cfg.cov_window = j["cov_window"];
  if (j.contains("cov_trials")) cfg.cov_trials = j["cov_trials"];
  if (j.contains("trials")) cfg.ser_trials = j["trials"];
  if (j.contains("decision"))
    cfg.decision = j["decision"] == "hard" ? DecisionMode::Hard : DecisionMode::Joint;
  if (j.contains("wdm_spacing")) cfg.wdm_spacing_hz = j["wdm_spacing"];
  if (j.contains("ici")) cfg.ici = j["ici"];
  if (j.contains("trunc_energy")) cfg.trunc_energy = j["trunc_energy"];
  if (j.contains("max_memory")) cfg.max_memory = j["max_memory"];
  if (j.contains("force")) cfg.force = j["force"];
  if (j.contains("log_domain")) cfg.log_domain = j["log_domain"];
  if (j.contains("threads")) cfg.threads = j["threads"];
  if (j.contains("out")) cfg.out_path = j["out"];
  return cfg;
}

void run(const ExperimentConfig& cfg, std::vector<ResultRow>& rows) {
  for (size_t i = 1; i < cfg.snr_grid_db.size(); ++i)
    if (!(cfg.snr_grid_db[i] > cfg.snr_grid_db[i - 1]))
      throw std::invalid_argument("SNR grid must be strictly increasing");

  RunContext ctx{
      cfg.constellation_file.empty() ? Constellation::named(cfg.constellation)
                                     : Constellation::from_file(cfg.constellation_file),
      DiscreteChannel{}, 1.0, 0.0};

  SampledFilter pulse = transmit_pulse_taps(cfg.pulse, 4, cfg.span_symbols);
  ChannelBuildOptions copts;
  copts.truncation_threshold = cfg.trunc_energy;
  copts.max_memory_symbols = cfg.max_memory;
  ctx.channel = build_discrete_channel(pulse, cfg.pulse, cfg.fiber, copts);

  double baud = 1.0 / cfg.pulse.symbol_period;
  if (cfg.pulse.kind == PulseKind::TdRc) {
    double bw = measure_bandwidth_95(pulse);
    ctx.se_divisor = bw / baud;
    ctx.wdm_spacing = cfg.wdm_spacing_hz > 0 ? cfg.wdm_spacing_hz : bw;
  } else {
    ctx.se_divisor = 1.0 + cfg.pulse.alpha;
    ctx.wdm_spacing = cfg.wdm_spacing_hz > 0 ? cfg.wdm_spacing_hz : (1.0 + cfg.pulse.alpha) * baud;
  }

  struct Task {
    double snr;
    size_t snr_index;
    uint64_t seed;
    int variant;  // wdm-compare: 0 = ici, 1 = no ici
  };
  std::vector<Task> tasks;
  for (size_t si = 0; si < cfg.snr_grid_db.size(); ++si)
    for (uint64_t seed : cfg.seeds) {
      if (cfg.scenario == Scenario::WdmCompare) {
        tasks.push_back({cfg.snr_grid_db[si], si, seed, 0});
        tasks.push_back({cfg.snr_grid_db[si], si, seed, 1});
      } else {
        tasks.push_back({cfg.snr_grid_db[si], si, seed, 0});
      }
    }
  if (tasks.empty()) return;  // empty grid: empty output, success

  std::mutex rows_mutex;
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        ResultRow row;
        switch (cfg.scenario) {
          case Scenario::Ser:
            row = ser_task(cfg, ctx, task.snr, task.seed, task.snr_index);
            break;
          case Scenario::WdmCompare: {
            bool ici = task.variant == 0;
            std::string label = std::string(pulse_kind_name(cfg.pulse.kind)) +
                                (ici ? "/ici" : "/no-ici");
            row = rates_task(cfg, ctx, task.snr, task.seed, task.snr_index, true, ici, label);
            break;
          }
          default:
            row = rates_task(cfg, ctx, task.snr, task.seed, task.snr_index, false, false,
                             pulse_kind_name(cfg.pulse.kind));
        }
        std::lock_guard<std::mutex> lock(rows_mutex);
        rows.push_back(std::move(row));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.scenario, a.pulse, a.snr_db, a.seed) <
           std::tie(b.scenario, b.pulse, b.snr_db, b.seed);
  });
  validate_rows(cfg, ctx, rows);
}

std::string csv_string(const std::vector<ResultRow>& rows) {
  std::string out =
      "scenario,constellation,pulse,alpha,length_km,snr_db,rate_total,rate_diamond,"
      "rate_spade_cond,ub_logdet,ub_scalar,ser,se_bits_s_hz,aux_memory,n_symbols,seed,"
      "mc_half_width\n";
  for (const ResultRow& r : rows) {
    out += r.scenario + ',' + r.constellation + ',' + r.pulse + ',';
    out += format_double(r.alpha) + ',' + format_double(r.length_km) + ',';
    out += format_double(r.snr_db) + ',' + format_double(r.rate_total) + ',';
    out += format_double(r.rate_diamond) + ',' + format_double(r.rate_spade_cond) + ',';
    out += format_double(r.ub_logdet) + ',' + format_double(r.ub_scalar) + ',';
    out += format_double(r.ser) + ',' + format_double(r.se_bits_s_hz) + ',';
    out += std::to_string(r.aux_memory) + ',' + std::to_string(r.n_symbols) + ',';
    out += std::to_string(r.seed) + ',' + format_double(r.mc_half_width) + '\n';
  }
  return out;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << csv_string(rows);
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 17) throw std::runtime_error("expected 17 columns, got " + std::to_string(f.size()));
    ResultRow r;
    r.scenario = f[0];
    r.constellation = f[1];
    r.pulse = f[2];
    r.alpha = parse_double(f[3]);
    r.length_km = parse_double(f[4]);
    r.snr_db = parse_double(f[5]);
    r.rate_total = parse_double(f[6]);
    r.rate_diamond = parse_double(f[7]);
    r.rate_spade_cond = parse_double(f[8]);
    r.ub_logdet = parse_double(f[9]);
    r.ub_scalar = parse_double(f[10]);
    r.ser = parse_double(f[11]);
    r.se_bits_s_hz = parse_double(f[12]);
    r.aux_memory = std::stoi(f[13]);
    r.n_symbols = std::stoull(f[14]);
    r.seed = std::stoull(f[15]);
    r.mc_half_width = parse_double(f[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_metadata(const ExperimentConfig& cfg, const std::string& csv_path) {
  json j;
  j["version"] = "dd-rates 0.1.0";
  j["scenario"] = scenario_name(cfg.scenario);
  j["constellation"] = cfg.constellation;
  if (!cfg.constellation_file.empty()) j["constellation_file"] = cfg.constellation_file;
  j["pulse"] = pulse_kind_name(cfg.pulse.kind);
  j["rolloff"] = cfg.pulse.alpha;
  j["baud"] = 1.0 / cfg.pulse.symbol_period;
  j["span"] = cfg.span_symbols;
  j["length_km"] = cfg.fiber.length_m / 1000.0;
  j["beta2"] = cfg.fiber.beta2;
  j["atten_db_km"] = cfg.fiber.attenuation_db_per_km;
  j["snr_db"] = cfg.snr_grid_db;
  j["symbols"] = cfg.n_symbols;
  j["aux_memory"] = cfg.aux_memory;
  j["seeds"] = cfg.seeds;
  j["train_symbols"] = cfg.train_symbols;
  j["rate_decomposition"] = cfg.rate_decomposition;
  j["bounds"] = cfg.with_bounds;
  j["cov_window"] = cfg.cov_window;
  j["cov_trials"] = cfg.cov_trials;
  j["trials"] = cfg.ser_trials;
  j["decision"] = cfg.decision == DecisionMode::Hard ? "hard" : "joint";
  j["wdm_spacing"] = cfg.wdm_spacing_hz;
  j["ici"] = cfg.ici;
  j["trunc_energy"] = cfg.trunc_energy;
  j["max_memory"] = cfg.max_memory;
  j["force"] = cfg.force;
  j["log_domain"] = cfg.log_domain;
  j["out"] = cfg.out_path;

  std::ofstream out(csv_path + ".meta.json");
  if (!out) throw std::runtime_error("cannot write metadata next to " + csv_path);
  out << j.dump(2) << '\n';
}

int run_oracle_suite(size_t max_symbols, std::ostream& log) {
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    log << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) log << " (" << detail << ")";
    log << "\n";
    if (!ok) ++failures;
  };

  size_t n = std::min<size_t>(max_symbols, 10);
  Constellation pam2 = Constellation::named("2-PAM");
  AuxiliaryChannel aux;
  aux.mem = 2;
  aux.psi_prime = {cplx(0.15, 0.05), cplx(-0.4, 0.1), cplx(1.0, 0.0), cplx(0.35, -0.2),
                   cplx(0.1, 0.0)};
  aux.mu1 = 0.02;
  aux.mu2 = -0.05;
  aux.var1 = 1.0;
  aux.var2 = 1.3;
  Trellis trellis(aux, pam2, 2.0);

  double worst_rate = 0, worst_app = 0;
  for (uint64_t trial = 0; trial < 20; ++trial) {
    StepSequence steps = oracle::sample_model_sequence(aux, pam2, 2.0, n, 1000 + trial);
    ForwardResult fw = forward_log_output_density(trellis, aux, steps);
    double exact = oracle::exhaustive_log2_py(aux, pam2, 2.0, steps, false);
    worst_rate = std::max(worst_rate, std::abs(fw.log2_py - exact) / std::abs(exact));

    AppTable apps = forward_backward(trellis, aux, steps, TerminalMode::Uniform);
    Eigen::MatrixXd exact_post = oracle::exhaustive_posteriors(aux, pam2, 2.0, steps);
    for (size_t k = 0; k < n; ++k)
      for (int a = 0; a < 2; ++a)
        worst_app = std::max(worst_app,
                             std::abs(apps.app(k, a) - exact_post(static_cast<Eigen::Index>(k), a)));
  }
  report("forward recursion vs exhaustive marginalization", worst_rate < 1e-9,
         "max rel err " + format_double(worst_rate));
  report("forward-backward APPs vs exhaustive posteriors", worst_app < 1e-9,
         "max abs err " + format_double(worst_app));

  // Matrix-form check on the physical simulation chain (sinc keeps the
  // receive filter transparent, so Eq.-form and streaming form coincide).
  PulseSpec spec{PulseKind::Sinc, 0.0, 1.0 / 35e9};
  SampledFilter pulse = transmit_pulse_taps(spec, 4, 4);
  double worst_mat = 0;
  for (double length_km : {0.0, 30.0}) {
    FiberParams fiber;
    fiber.length_m = length_km * 1000.0;
    DiscreteChannel ch = build_discrete_channel(pulse, spec, fiber);
    Constellation qpsk = Constellation::named("QPSK");
    LinkConfig lc;
    lc.channel = &ch;
    lc.constellation = &qpsk;
    lc.snr_db = 6;
    lc.n_symbols = std::min<size_t>(max_symbols, 16);
    lc.seed = 11 + static_cast<uint64_t>(length_km);
    LinkRealization real = simulate(lc);
    std::vector<int> preamble(real.tx_indices.begin() + (real.guard - ch.memory_symbols),
                              real.tx_indices.begin() + real.guard);
    std::vector<int> data(real.tx_indices.begin() + real.guard,
                          real.tx_indices.begin() + real.guard + static_cast<long>(real.n_data));
    std::vector<double> expect = oracle::toeplitz_sld_output(ch.psi2, ch.memory_symbols, qpsk,
                                                             real.gain, preamble, data);
    std::vector<double> got = real.data_samples(false);
    double scale = 0;
    for (double v : expect) scale = std::max(scale, std::abs(v));
    for (size_t i = 0; i < expect.size(); ++i)
      worst_mat = std::max(worst_mat, std::abs(expect[i] - got[i]) / scale);
  }
  report("streaming simulation vs Toeplitz matrix form", worst_mat < 1e-10,
         "max rel err " + format_double(worst_mat));
  return failures;
}

}  // namespace ddr
