#include "ddr/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ddr::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2_gauss(double x, double mu, double var) {
  double d = x - mu;
  return -0.5 * std::log2(2.0 * std::numbers::pi * var) -
         std::numbers::log2e * d * d / (2.0 * var);
}

double log2_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

// log2 of the joint density of the observations and one hypothesized input
// string, walking the state window directly on the tap vector.
double string_log2_joint(const AuxiliaryChannel& aux, const Constellation& c, double gain,
                         const StepSequence& steps, const std::vector<int>& inputs,
                         bool diamond_only) {
  const int mem = aux.mem;
  std::vector<int> win(steps.context.begin(), steps.context.begin() + mem);
  const double log2_q = std::log2(static_cast<double>(c.q()));
  auto tap = [&](int off) { return aux.psi_prime[static_cast<size_t>(off + mem)]; };

  double acc = 0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    cplx zd = 0, zsp = 0;
    for (int j = 0; j < mem; ++j) {
      cplx x = gain * c.point(win[static_cast<size_t>(j)]);
      zd += x * tap(mem - 1 - 2 * j);
      zsp += x * tap(mem - 2 * j);
    }
    zsp += gain * c.point(inputs[k]) * tap(-mem);
    acc += log2_gauss(steps.diamond[k], std::norm(zd) + aux.mu1, aux.var1);
    if (!diamond_only) acc += log2_gauss(steps.spade[k], std::norm(zsp) + aux.mu2, aux.var2);
    if (steps.known[k] == 0) acc -= log2_q;  // uniform input prior
    win.erase(win.begin());
    win.push_back(inputs[k]);
  }
  return acc;
}

// Odometer over all strings consistent with the known-input mask.
template <typename Fn>
void enumerate_strings(const StepSequence& steps, int q, Fn&& fn) {
  const size_t n = steps.steps();
  std::vector<int> inputs(n, 0);
  std::vector<size_t> free_pos;
  for (size_t k = 0; k < n; ++k) {
    if (steps.known[k])
      inputs[k] = steps.input_at(k + 1);
    else
      free_pos.push_back(k);
  }
  while (true) {
    fn(inputs);
    size_t i = 0;
    for (; i < free_pos.size(); ++i) {
      if (++inputs[free_pos[i]] < q) break;
      inputs[free_pos[i]] = 0;
    }
    if (i == free_pos.size()) break;
  }
}

}  // namespace

std::vector<double> toeplitz_sld_output(const std::vector<cplx>& psi2, int mem,
                                        const Constellation& c, double gain,
                                        const std::vector<int>& preamble,
                                        const std::vector<int>& data) {
  if (static_cast<int>(psi2.size()) != 2 * mem + 1)
    throw std::invalid_argument("tap count does not match memory");
  if (static_cast<int>(preamble.size()) != mem)
    throw std::invalid_argument("preamble must hold exactly mem symbols");
  const int n = 2 * static_cast<int>(data.size());
  const int m_taps = 2 * mem + 1;
  const int cols = n + 2 * mem;

  Eigen::VectorXcd tilde = Eigen::VectorXcd::Zero(cols);
  for (int r = 0; r < mem + static_cast<int>(data.size()); ++r) {
    int global = 1 - mem + r;
    int idx = global <= 0 ? preamble[static_cast<size_t>(r)] : data[static_cast<size_t>(global - 1)];
    tilde(2 * r + 1) = gain * c.point(idx);
  }

  Eigen::MatrixXcd big = Eigen::MatrixXcd::Zero(n, cols);
  for (int row = 0; row < n; ++row)
    for (int j = 0; j < m_taps && row + j < cols; ++j)
      big(row, row + j) = psi2[static_cast<size_t>(2 * mem - j)];  // time-reversed taps

  Eigen::VectorXcd field = big * tilde;
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = std::norm(field(i));
  return out;
}

double exhaustive_log2_py(const AuxiliaryChannel& aux, const Constellation& c, double gain,
                          const StepSequence& steps, bool diamond_only) {
  double acc = kNegInf;
  enumerate_strings(steps, c.q(), [&](const std::vector<int>& inputs) {
    acc = log2_add(acc, string_log2_joint(aux, c, gain, steps, inputs, diamond_only));
  });
  return acc;
}

StepSequence sample_model_sequence(const AuxiliaryChannel& aux, const Constellation& c, double gain,
                                   size_t n_steps, uint64_t seed, double noise_sigma) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, c.q() - 1);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  const int mem = aux.mem;

  StepSequence seq;
  seq.mem = mem;
  seq.n_rate_steps = n_steps;
  seq.context.resize(n_steps + static_cast<size_t>(mem));
  for (auto& v : seq.context) v = pick(rng);
  seq.diamond.resize(n_steps);
  seq.spade.resize(n_steps);
  seq.known.assign(n_steps, 0);
  auto tap = [&](int off) { return aux.psi_prime[static_cast<size_t>(off + mem)]; };
  for (size_t k = 0; k < n_steps; ++k) {
    const int* win = seq.context.data() + k;
    cplx zd = 0, zs = 0;
    for (int j = 0; j < mem; ++j) {
      cplx x = gain * c.point(win[j]);
      zd += x * tap(mem - 1 - 2 * j);
      zs += x * tap(mem - 2 * j);
    }
    zs += gain * c.point(win[mem]) * tap(-mem);
    seq.diamond[k] = std::norm(zd) + aux.mu1 + noise(rng);
    seq.spade[k] = std::norm(zs) + aux.mu2 + noise(rng);
  }
  return seq;
}

Eigen::MatrixXd exhaustive_posteriors(const AuxiliaryChannel& aux, const Constellation& c,
                                      double gain, const StepSequence& steps) {
  const int q = c.q();
  const size_t n = steps.steps();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), q, kNegInf);
  enumerate_strings(steps, q, [&](const std::vector<int>& inputs) {
    double lp = string_log2_joint(aux, c, gain, steps, inputs, false);
    for (size_t k = 0; k < n; ++k) {
      double& cell = acc(static_cast<Eigen::Index>(k), inputs[k]);
      cell = log2_add(cell, lp);
    }
  });
  Eigen::MatrixXd post(static_cast<Eigen::Index>(n), q);
  for (size_t k = 0; k < n; ++k) {
    double norm = kNegInf;
    for (int a = 0; a < q; ++a) norm = log2_add(norm, acc(static_cast<Eigen::Index>(k), a));
    for (int a = 0; a < q; ++a)
      post(static_cast<Eigen::Index>(k), a) = std::exp2(acc(static_cast<Eigen::Index>(k), a) - norm);
  }
  return post;
}

}  // namespace ddr::oracle
