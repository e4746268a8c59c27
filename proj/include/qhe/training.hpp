#pragma once

// Forward evaluation, loss, parameter-shift gradients, and Adam updates for
// the convolutional ansatz.  The network output is f = (1 - <Z>)/2 on the
// readout qubit, i.e. its probability of reading 1.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qhe/ansatz.hpp"
#include "qhe/rng.hpp"
#include "qhe/statevector.hpp"

namespace qhe {

// Exact expectation, or an empirical estimate from k sampled shots.
struct EvalMode {
  static EvalMode exact() { return {}; }
  static EvalMode shots(std::size_t k, Rng& rng) {
    if (k == 0) throw std::invalid_argument("EvalMode: shots must be > 0");
    EvalMode m;
    m.k = k;
    m.rng = &rng;
    return m;
  }

  bool is_exact() const { return rng == nullptr; }

  std::size_t k = 0;
  Rng* rng = nullptr;
};

inline double forward(const StateVector& state_in, const AnsatzSpec& spec,
                      const Weights& theta, EvalMode mode) {
  if (state_in.n_qubits() != spec.n_qubits)
    throw std::invalid_argument("forward: state width does not match ansatz");
  StateVector st = state_in;
  st.apply(bind_ansatz(spec, theta));
  if (mode.is_exact()) return st.prob_one(spec.readout_qubit);
  std::size_t ones = 0;
  for (std::uint64_t idx : st.sample_indices(mode.k, *mode.rng))
    ones += (idx >> spec.readout_qubit) & 1u;
  return static_cast<double>(ones) / static_cast<double>(mode.k);
}

constexpr double kLossClip = 1e-7;  // keeps log() finite at f = 0 or 1

inline double clip_prob(double f) {
  return std::min(1.0 - kLossClip, std::max(kLossClip, f));
}

inline double cross_entropy(double f, int y) {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("cross_entropy: f outside [0, 1]");
  const double p = clip_prob(f);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

inline int predict(double f) {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("predict: f outside [0, 1]");
  return f > 0.5 ? 1 : 0;
}

// d f / d theta_i, summed over the gate occurrences sharing theta_i, each
// occurrence shifted on its own.  Plain rotations use the two-point rule at
// +-pi/2; controlled rotations use the four-point rule at +-pi/2 and
// +-3pi/2.  Evaluation order is fixed (occurrence-major, positive shift
// first) so shots-mode sampling is reproducible under a seeded rng.
inline Weights grad_parameter_shift(const StateVector& state_in,
                                    const AnsatzSpec& spec,
                                    const Weights& theta, EvalMode mode) {
  const auto gates = ansatz_gates(spec);
  Weights grad(static_cast<std::size_t>(spec.n_params()), 0.0);

  auto f_at = [&](int occurrence, double delta) {
    StateVector st = state_in;
    st.apply(bind_shifted(spec, theta, occurrence, delta));
    if (mode.is_exact()) return st.prob_one(spec.readout_qubit);
    std::size_t ones = 0;
    for (std::uint64_t idx : st.sample_indices(mode.k, *mode.rng))
      ones += (idx >> spec.readout_qubit) & 1u;
    return static_cast<double>(ones) / static_cast<double>(mode.k);
  };

  constexpr double kPi = std::numbers::pi;
  const double c1 = (std::sqrt(2.0) + 1.0) / (4.0 * std::sqrt(2.0));
  const double c2 = (std::sqrt(2.0) - 1.0) / (4.0 * std::sqrt(2.0));

  int ordinal = 0;
  for (const AnsatzGate& ag : gates) {
    if (ag.param < 0) continue;
    const int o = ordinal++;
    double d;
    if (ag.kind == GateKind::RY) {
      d = 0.5 * (f_at(o, kPi / 2) - f_at(o, -kPi / 2));
    } else {
      d = c1 * (f_at(o, kPi / 2) - f_at(o, -kPi / 2)) -
          c2 * (f_at(o, 3 * kPi / 2) - f_at(o, -3 * kPi / 2));
    }
    grad[static_cast<std::size_t>(ag.param)] += d;
  }
  return grad;
}

struct AdamState {
  std::vector<double> m, v;  // first/second moment estimates
  long t = 0;
  double alpha = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;

  explicit AdamState(std::size_t dim, double alpha_ = 0.01)
      : m(dim, 0.0), v(dim, 0.0), alpha(alpha_) {}
};

inline void adam_step(AdamState& state, const Weights& grad, Weights& theta) {
  if (grad.size() != theta.size() || grad.size() != state.m.size())
    throw std::invalid_argument("adam_step: dimension mismatch");
  for (double g : grad)
    if (!std::isfinite(g))
      throw std::invalid_argument("adam_step: non-finite gradient");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= state.alpha * mhat / (std::sqrt(vhat) + state.eps_adam);
  }
}

}  // namespace qhe
