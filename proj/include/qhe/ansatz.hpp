#pragma once

// Convolutional ansatz over a power-of-two register.  Each layer applies
// two-qubit conv subunits around a cyclic chain of the currently effective
// qubits (all sharing that layer's 6 parameters), then pooling subunits on
// consecutive non-overlapping pairs (sharing 2 parameters); the control of
// each pooling pair drops out of the effective set, halving it.  After
// log2(n) layers a single readout qubit survives.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qhe/gate.hpp"

namespace qhe {

using Weights = std::vector<double>;

struct AnsatzLayer {
  int conv_param_base = 0;  // 6 shared conv parameters start here
  int pool_param_base = 0;  // 2 shared pool parameters start here
};

struct AnsatzSpec {
  int n_qubits = 0;
  std::vector<AnsatzLayer> layers;
  int readout_qubit = 0;

  int n_params() const { return 8 * static_cast<int>(layers.size()); }
};

// One gate slot of the ansatz template: `param` indexes the shared weight
// vector, -1 for the parameter-free CNOTs.  q0 is the control of two-qubit
// kinds, q1 the target.
struct AnsatzGate {
  GateKind kind;
  int q0 = 0;
  int q1 = -1;
  int param = -1;
};

inline AnsatzSpec build_ansatz(int n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("build_ansatz: n must be a power of two >= 2");
  AnsatzSpec spec;
  spec.n_qubits = n;
  int base = 0;
  for (int eff = n; eff >= 2; eff /= 2) {
    spec.layers.push_back({base, base + 6});
    base += 8;
  }
  // Pooling keeps the second (target) qubit of each pair; iterating the
  // halving from qubit 0 leaves the highest index as the survivor.
  spec.readout_qubit = n - 1;
  return spec;
}

// Deterministic gate enumeration: layer by layer, conv subunits around the
// cyclic chain first, then pooling pairs; fixed intra-subunit order.
inline std::vector<AnsatzGate> ansatz_gates(const AnsatzSpec& spec) {
  std::vector<AnsatzGate> out;
  std::vector<int> eff(static_cast<std::size_t>(spec.n_qubits));
  for (int q = 0; q < spec.n_qubits; ++q) eff[static_cast<std::size_t>(q)] = q;

  for (const AnsatzLayer& layer : spec.layers) {
    const int m = static_cast<int>(eff.size());
    const int cb = layer.conv_param_base, pb = layer.pool_param_base;
    const int n_conv = m == 2 ? 1 : m;
    for (int i = 0; i < n_conv; ++i) {
      const int a = eff[static_cast<std::size_t>(i)];
      const int b = eff[static_cast<std::size_t>((i + 1) % m)];
      out.push_back({GateKind::RY, a, -1, cb + 0});
      out.push_back({GateKind::RY, b, -1, cb + 1});
      out.push_back({GateKind::CNOT, a, b, -1});
      out.push_back({GateKind::RY, a, -1, cb + 2});
      out.push_back({GateKind::RY, b, -1, cb + 3});
      out.push_back({GateKind::CNOT, a, b, -1});
      out.push_back({GateKind::RY, a, -1, cb + 4});
      out.push_back({GateKind::RY, b, -1, cb + 5});
    }
    std::vector<int> survivors;
    for (int i = 0; i + 1 < m; i += 2) {
      const int c = eff[static_cast<std::size_t>(i)];
      const int t = eff[static_cast<std::size_t>(i + 1)];
      out.push_back({GateKind::CRZ, c, t, pb + 0});
      out.push_back({GateKind::ACRX, c, t, pb + 1});
      survivors.push_back(t);
    }
    eff = std::move(survivors);
  }
  return out;
}

// Binds weights into a concrete circuit; `occurrence` >= 0 additionally
// shifts that single parameterized-gate occurrence by `delta` (the
// parameter-shift rule shifts one occurrence of a shared weight at a time).
inline Circuit bind_shifted(const AnsatzSpec& spec, const Weights& theta,
                            int occurrence, double delta) {
  if (static_cast<int>(theta.size()) != spec.n_params())
    throw std::invalid_argument("bind: expected " +
                                std::to_string(spec.n_params()) +
                                " weights, got " +
                                std::to_string(theta.size()));
  for (double v : theta)
    if (!std::isfinite(v))
      throw std::invalid_argument("bind: non-finite weight");

  Circuit c(spec.n_qubits);
  int ordinal = 0;
  for (const AnsatzGate& ag : ansatz_gates(spec)) {
    if (ag.param < 0) {
      c.append(Gate::cnot(ag.q0, ag.q1));
      continue;
    }
    double angle = theta[static_cast<std::size_t>(ag.param)];
    if (ordinal++ == occurrence) angle += delta;
    switch (ag.kind) {
      case GateKind::RY: c.append(Gate::ry(ag.q0, angle)); break;
      case GateKind::CRZ: c.append(Gate::crz(ag.q0, ag.q1, angle)); break;
      case GateKind::ACRX: c.append(Gate::acrx(ag.q0, ag.q1, angle)); break;
      default:
        throw std::logic_error("bind: unexpected template kind");
    }
  }
  return c;
}

inline Circuit bind_ansatz(const AnsatzSpec& spec, const Weights& theta) {
  return bind_shifted(spec, theta, -1, 0.0);
}

}  // namespace qhe
