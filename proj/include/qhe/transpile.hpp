#pragma once

// Clifford+T transpilation: rewrite every rotation into R_Z form, expand
// controlled rotations over CNOTs, then synthesize each R_Z within a uniform
// share of a total error budget.  Gates that synthesize exactly (angles on
// the pi/4 grid) consume none of the budget, so it is split across the
// approximately-synthesized rotations only; by the triangle inequality the
// composite stays within the total budget of the input circuit.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qhe/gate.hpp"
#include "qhe/rz_synth.hpp"

namespace qhe {

struct TranspileReport {
  std::size_t r_z_count = 0;    // rotations present after the R_Z rewrite
  std::size_t t_count = 0;      // T gates in the emitted circuit
  double per_gate_epsilon = 0;  // budget share of each approximate rotation
  double total_budget = 0;
  std::vector<std::size_t> per_rotation_t;  // per-R_Z word T-counts, in order
};

namespace transpile_detail {

// Controlled-R_Z via CNOT conjugation: X R_Z(t) X = R_Z(-t), so the target
// sees R_Z(t) exactly when the control is |1>, with no stray phase.
inline void append_crz(Circuit& out, int c, int t, double theta) {
  out.append(Gate::cnot(c, t));
  out.append(Gate::rz(t, -theta / 2));
  out.append(Gate::cnot(c, t));
  out.append(Gate::rz(t, theta / 2));
}

// Anti-controlled R_X: X on the control flips the control sense, H on the
// target turns R_Z into R_X.
inline void append_acrx(Circuit& out, int c, int t, double theta) {
  out.append(Gate::x(c));
  out.append(Gate::h(t));
  append_crz(out, c, t, theta);
  out.append(Gate::h(t));
  out.append(Gate::x(c));
}

}  // namespace transpile_detail

// The pooling pair -- CRZ(theta1) then ACRX(theta2) on (control, target) --
// expanded to single-qubit rotations and CNOTs.  Exactly 4 R_Z gates.
inline Circuit decompose_controlled(int n_qubits, int control, int target,
                                    double theta1, double theta2) {
  if (control == target)
    throw std::invalid_argument("decompose_controlled: control == target");
  Circuit out(n_qubits);
  transpile_detail::append_crz(out, control, target, theta1);
  transpile_detail::append_acrx(out, control, target, theta2);
  return out;
}

// Lower a circuit to {X, Z, H, S, T, CNOT} plus bare R_Z rotations.
// R_X(t) = H R_Z(t) H and R_Y(t) = S H R_Z(t) H S Z (right-to-left), so each
// one-qubit rotation contributes exactly one R_Z.
inline Circuit rewrite_rotations(const Circuit& c) {
  Circuit out(c.n_qubits);
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case GateKind::X:
      case GateKind::Z:
      case GateKind::H:
      case GateKind::S:
      case GateKind::T:
      case GateKind::CNOT:
      case GateKind::RZ:
        out.append(g);
        break;
      case GateKind::Sdg:
        out.append(Gate::z(g.q0));
        out.append(Gate::s(g.q0));
        break;
      case GateKind::Tdg:
        out.append(Gate::z(g.q0));
        out.append(Gate::s(g.q0));
        out.append(Gate::t(g.q0));
        break;
      case GateKind::SWAP:
        out.append(Gate::cnot(g.q0, g.q1));
        out.append(Gate::cnot(g.q1, g.q0));
        out.append(Gate::cnot(g.q0, g.q1));
        break;
      case GateKind::RX:
        out.append(Gate::h(g.q0));
        out.append(Gate::rz(g.q0, g.angle));
        out.append(Gate::h(g.q0));
        break;
      case GateKind::RY:
        out.append(Gate::z(g.q0));
        out.append(Gate::s(g.q0));
        out.append(Gate::h(g.q0));
        out.append(Gate::rz(g.q0, g.angle));
        out.append(Gate::h(g.q0));
        out.append(Gate::s(g.q0));
        break;
      case GateKind::CRZ:
        transpile_detail::append_crz(out, g.q0, g.q1, g.angle);
        break;
      case GateKind::ACRX:
        transpile_detail::append_acrx(out, g.q0, g.q1, g.angle);
        break;
      default:
        throw std::invalid_argument("rewrite_rotations: unknown gate kind");
    }
  }
  return out;
}

// Closed-form rotation count of the n-qubit ansatz: R_C conv units on
// 2n - 3 placements plus R_P pooling units on n - 1.
inline std::size_t predicted_rz_count(int n, int r_c = 6, int r_p = 4) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument(
        "predicted_rz_count: n must be a power of two >= 2");
  return static_cast<std::size_t>(r_c) * (2 * n - 3) +
         static_cast<std::size_t>(r_p) * (n - 1);
}

inline std::pair<Circuit, TranspileReport> transpile(const Circuit& circuit,
                                                     double total_budget,
                                                     SynthConfig cfg = {}) {
  if (!(total_budget > 0.0) || !std::isfinite(total_budget))
    throw std::invalid_argument("transpile: total_budget must be > 0");
  const Circuit flat = rewrite_rotations(circuit);

  TranspileReport rep;
  rep.total_budget = total_budget;
  std::size_t approx = 0;
  for (const Gate& g : flat.gates)
    if (g.kind == GateKind::RZ) {
      ++rep.r_z_count;
      if (!synth_detail::snaps_dyadic(g.angle)) ++approx;
    }
  rep.per_gate_epsilon =
      approx ? std::min(0.5, total_budget / static_cast<double>(approx)) : 0.0;

  Circuit out(flat.n_qubits);
  for (const Gate& g : flat.gates) {
    if (g.kind != GateKind::RZ) {
      out.append(g);
      continue;
    }
    SynthConfig gate_cfg = cfg;
    gate_cfg.epsilon = synth_detail::snaps_dyadic(g.angle)
                           ? 0.5
                           : rep.per_gate_epsilon;
    const SynthResult r = synthesize_rz(g.angle, gate_cfg);
    rep.per_rotation_t.push_back(r.t_count);
    for (const GateKind k : r.word) out.append({k, g.q0});
  }
  rep.t_count = out.t_count();
  return {std::move(out), rep};
}

// What a decrypting client can reconstruct from the key-update program: the
// full gate sequence except standalone Pauli X and Z gates.
inline Circuit strip_paulis(const Circuit& c) {
  Circuit out(c.n_qubits);
  for (const Gate& g : c.gates)
    if (g.kind != GateKind::X && g.kind != GateKind::Z) out.append(g);
  return out;
}

}  // namespace qhe
