#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qhe/circuit_io.hpp"
#include "qhe/pauli_key.hpp"
#include "qhe/statevector.hpp"

namespace qhe {

// Quantum one-time pad: X^{x_i} Z^{z_i} on every qubit.  Involutive up to
// global phase, so the same call encrypts and decrypts.
inline void qotp_apply(StateVector& state, const PauliKey& key) {
  if (key.n() != state.n_qubits())
    throw std::invalid_argument("qotp_apply: key size != register size");
  for (int i = 0; i < key.n(); ++i) {
    if (key.z[i]) state.apply(Gate::z(i));
    if (key.x[i]) state.apply(Gate::x(i));
  }
}

inline StateVector qotp_apply(StateVector state, const PauliKey& key, int) =
    delete;  // use the mutating form

// Client-side key ledger.  The server hands it every emitted program step
// (classical messages in the protocol) and may query current x-bits only
// through x_bit(), which is the one place key material crosses the
// role boundary: it feeds the S^a correction inside the T gadget.
class ClientKeyTracker {
 public:
  explicit ClientKeyTracker(PauliKey initial)
      : initial_(initial), key_(std::move(initial)) {}

  int x_bit(int i) const { return key_.x.at(static_cast<std::size_t>(i)); }

  void observe_clifford(const KeyUpdateStep& step) {
    key_ = key_update_clifford(std::move(key_), step);
  }

  void observe_t(int i, int r_a, int r_b) {
    key_ = key_update_t(std::move(key_), i, r_a, r_b);
  }

  const PauliKey& key() const { return key_; }
  const PauliKey& initial_key() const { return initial_; }

 private:
  PauliKey initial_;
  PauliKey key_;
};

// T-gate teleportation gadget on the physical register.  `data_wire` and
// `anc0` are passed by reference because the SWAP between the data qubit
// and the first ancilla qubit is realized as wire relabeling.  `a` is the
// client's current x-key bit for the logical qubit.  Returns (r_a, r_b)
// and leaves both ancilla wires reset to |0>.
inline std::pair<int, int> t_gadget_wires(StateVector& st, int& data_wire,
                                          int& anc0, int anc1, int a,
                                          Rng& rng) {
  st.apply(Gate::t(data_wire));
  st.apply(Gate::h(anc0));
  st.apply(Gate::cnot(anc0, anc1));
  std::swap(data_wire, anc0);
  if (a) st.apply(Gate::s(anc0));
  st.apply(Gate::cnot(anc0, anc1));
  st.apply(Gate::h(anc0));
  int r_b = st.measure(anc0, rng);
  int r_a = st.measure(anc1, rng);
  if (r_b) st.apply(Gate::x(anc0));
  if (r_a) st.apply(Gate::x(anc1));
  return {r_a, r_b};
}

// Standalone gadget contract: ancilla must arrive in |00>.
inline std::pair<int, int> t_gadget(StateVector& st, int& data_wire, int& anc0,
                                    int anc1, int a, Rng& rng) {
  if (st.prob_one(anc0) > 1e-12 || st.prob_one(anc1) > 1e-12)
    throw std::logic_error("t_gadget: ancilla not reset to |00>");
  return t_gadget_wires(st, data_wire, anc0, anc1, a, rng);
}

struct EvalResult {
  StateVector enc_final;      // n+2 physical wires, ancilla reset to |00>
  KeyUpdateProgram program;
  BellOutcomes bell;
  std::vector<int> wire;      // logical qubit -> physical wire
};

// Homomorphic evaluation of a Clifford+T circuit on an encrypted register.
// The register is widened by a fixed reusable 2-qubit Bell workspace.
inline EvalResult server_evaluate(const Circuit& circuit,
                                  const StateVector& enc_state,
                                  ClientKeyTracker& client, Rng& rng) {
  const int n = circuit.n_qubits;
  if (enc_state.n_qubits() != n)
    throw std::invalid_argument("server_evaluate: state/circuit width mismatch");
  for (std::size_t g = 0; g < circuit.gates.size(); ++g)
    if (!is_clifford_t(circuit.gates[g].kind))
      throw std::invalid_argument(
          "server_evaluate: gates[" + std::to_string(g) + "] kind " +
          kind_name(circuit.gates[g].kind) + " is not in {X,Z,H,S,T,CNOT}");

  std::vector<cplx> amps(std::size_t{1} << (n + 2), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < enc_state.dim(); ++i)
    amps[i] = enc_state.amp(i);
  StateVector reg = StateVector::from_amplitudes(std::move(amps));

  std::vector<int> wire(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) wire[static_cast<std::size_t>(i)] = i;
  int anc0 = n, anc1 = n + 1;

  KeyUpdateProgram program;
  program.n = n;
  BellOutcomes bell;
  int m = 0;

  for (const Gate& g : circuit.gates) {
    const int w0 = wire[static_cast<std::size_t>(g.q0)];
    switch (g.kind) {
      case GateKind::X:
      case GateKind::Z:
        reg.apply({g.kind, w0});
        break;
      case GateKind::H:
      case GateKind::S: {
        reg.apply({g.kind, w0});
        KeyUpdateStep step{g.kind == GateKind::H ? KeyUpdateStep::Op::H
                                                 : KeyUpdateStep::Op::S,
                           g.q0};
        program.steps.push_back(step);
        client.observe_clifford(step);
        break;
      }
      case GateKind::CNOT: {
        reg.apply(Gate::cnot(w0, wire[static_cast<std::size_t>(g.q1)]));
        KeyUpdateStep step{KeyUpdateStep::Op::CNOT, g.q0, g.q1};
        program.steps.push_back(step);
        client.observe_clifford(step);
        break;
      }
      case GateKind::T: {
        const int a = client.x_bit(g.q0);
        auto [r_a, r_b] = t_gadget_wires(
            reg, wire[static_cast<std::size_t>(g.q0)], anc0, anc1, a, rng);
        KeyUpdateStep step{KeyUpdateStep::Op::T, g.q0, -1, ++m};
        program.steps.push_back(step);
        bell.pairs.emplace_back(r_a, r_b);
        client.observe_t(g.q0, r_a, r_b);
        break;
      }
      default:
        throw std::logic_error("server_evaluate: unreachable gate kind");
    }
  }
  return {std::move(reg), std::move(program), std::move(bell),
          std::move(wire)};
}

// Collapses the physical register back to logical qubit order and drops the
// ancilla wires (which must hold |00> exactly).
inline StateVector extract_logical_state(const StateVector& reg,
                                         const std::vector<int>& wire,
                                         int n_main) {
  std::vector<cplx> out(std::size_t{1} << n_main, cplx(0.0, 0.0));
  double captured = 0.0;
  for (std::size_t l = 0; l < out.size(); ++l) {
    std::size_t p = 0;
    for (int q = 0; q < n_main; ++q)
      if (l & (std::size_t{1} << q))
        p |= std::size_t{1} << wire[static_cast<std::size_t>(q)];
    out[l] = reg.amp(p);
    captured += std::norm(out[l]);
  }
  if (std::abs(captured - 1.0) > 1e-9)
    throw std::logic_error("extract_logical_state: ancilla not in |00>");
  return StateVector::from_amplitudes(std::move(out));
}

struct ShotGroup {
  PauliKey initial_key;
  BellOutcomes bell;
  PauliKey final_key;
  std::vector<std::string> encrypted;  // raw readout, qubit order = readout set
  std::vector<std::string> decrypted;
};

struct ProtocolTranscript {
  int n = 0;
  std::vector<int> readout;
  KeyUpdateProgram program;
  std::vector<ShotGroup> groups;

  std::size_t total_shots() const {
    std::size_t s = 0;
    for (const auto& g : groups) s += g.encrypted.size();
    return s;
  }
};

// Full protocol: keygen, encrypt, evaluate homomorphically, sample the
// encrypted register, replay the key-update program, decrypt.  Keys are
// refreshed every `shots_per_key` shots; 1 = fresh key per shot.
inline ProtocolTranscript run_protocol_grouped(const Circuit& circuit,
                                               const StateVector& plain_init,
                                               const std::vector<int>& readout,
                                               std::size_t shots,
                                               std::size_t shots_per_key,
                                               Rng& rng) {
  if (shots == 0 || shots_per_key == 0)
    throw std::invalid_argument("run_protocol: shots and shots_per_key must be > 0");
  for (int q : readout)
    if (q < 0 || q >= circuit.n_qubits)
      throw std::out_of_range("run_protocol: readout qubit out of range");

  ProtocolTranscript tr;
  tr.n = circuit.n_qubits;
  tr.readout = readout;

  std::size_t done = 0;
  while (done < shots) {
    const std::size_t take = std::min(shots_per_key, shots - done);
    PauliKey key = keygen(circuit.n_qubits, rng);
    StateVector enc = plain_init;
    qotp_apply(enc, key);
    ClientKeyTracker client(key);
    EvalResult res = server_evaluate(circuit, enc, client, rng);
    if (tr.groups.empty()) tr.program = res.program;

    ShotGroup grp;
    grp.initial_key = key;
    grp.bell = res.bell;
    grp.final_key = client.key();

    for (std::uint64_t idx : res.enc_final.sample_indices(take, rng)) {
      std::string enc_bits, dec_bits;
      for (int q : readout) {
        const int w = res.wire[static_cast<std::size_t>(q)];
        const int bit = static_cast<int>((idx >> w) & 1u);
        enc_bits += bit ? '1' : '0';
        dec_bits += (bit ^ grp.final_key.x[static_cast<std::size_t>(q)]) ? '1' : '0';
      }
      grp.encrypted.push_back(std::move(enc_bits));
      grp.decrypted.push_back(std::move(dec_bits));
    }
    tr.groups.push_back(std::move(grp));
    done += take;
  }
  return tr;
}

inline ProtocolTranscript run_protocol(const Circuit& circuit,
                                       const StateVector& plain_init,
                                       const std::vector<int>& readout,
                                       std::size_t shots,
                                       bool fresh_key_per_shot, Rng& rng) {
  return run_protocol_grouped(circuit, plain_init, readout, shots,
                              fresh_key_per_shot ? 1 : shots, rng);
}

inline nlohmann::json transcript_to_json(const ProtocolTranscript& tr) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : tr.groups) {
    nlohmann::json bell = nlohmann::json::array();
    for (const auto& [ra, rb] : g.bell.pairs) bell.push_back({ra, rb});
    groups.push_back({{"initial_key", key_to_json(g.initial_key)},
                      {"final_key", key_to_json(g.final_key)},
                      {"bell", std::move(bell)},
                      {"encrypted", g.encrypted},
                      {"decrypted", g.decrypted}});
  }
  return {{"n", tr.n},
          {"readout", tr.readout},
          {"program", program_to_json(tr.program)},
          {"groups", std::move(groups)}};
}

}  // namespace qhe
