#pragma once

// Private inference on a server-held model, encrypted state-image sampling,
// and the circuit-privacy audit: what a client can reconstruct from the
// key-update program is the Pauli-stripped circuit, and stripping measurably
// hurts accuracy.

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhe/dataset.hpp"
#include "qhe/federated.hpp"
#include "qhe/model.hpp"
#include "qhe/protocol.hpp"
#include "qhe/transpile.hpp"

namespace qhe {

struct InferenceResult {
  double encrypted_prob = 0.0;  // 1-readout fraction before decryption
  double decrypted_prob = 0.0;
  int predicted_label = 0;
  int true_label = -1;  // -1 = unknown
};

struct InferOptions {
  double epsilon_budget = 0.1;
  std::size_t shots = 1024;
  std::size_t shots_per_key = 1;  // 1 = fresh key per shot
};

// Core protocol round on an already-transpiled circuit: encrypt, evaluate
// homomorphically, read the readout qubit per shot; decrypt by XOR with the
// tracked final x-bit.
inline InferenceResult private_infer(const StateVector& plain_state,
                                     const Circuit& circuit, int readout,
                                     std::size_t shots,
                                     std::size_t shots_per_key, Rng& rng,
                                     int true_label = -1) {
  if (!circuit.clifford_t_only())
    throw std::invalid_argument(
        "private_infer: circuit must be Clifford+T; transpile it first");
  const ProtocolTranscript tr = run_protocol_grouped(
      circuit, plain_state, {readout}, shots, shots_per_key, rng);
  std::size_t enc_ones = 0, dec_ones = 0, total = 0;
  for (const auto& g : tr.groups) {
    for (const auto& b : g.encrypted) enc_ones += b == "1";
    for (const auto& b : g.decrypted) dec_ones += b == "1";
    total += g.encrypted.size();
  }
  InferenceResult res;
  res.encrypted_prob = static_cast<double>(enc_ones) / static_cast<double>(total);
  res.decrypted_prob = static_cast<double>(dec_ones) / static_cast<double>(total);
  res.predicted_label = predict(res.decrypted_prob);
  res.true_label = true_label;
  return res;
}

inline InferenceResult private_infer(const std::vector<double>& features,
                                     const Model& model,
                                     const InferOptions& opt, Rng& rng,
                                     int true_label = -1) {
  const AnsatzSpec spec = build_ansatz(model.n_qubits);
  const StateVector st =
      fed_detail::encoded_state(features, spec, model.encoding);
  const Circuit bound = bind_ansatz(spec, model.theta);
  const Circuit evaluated = transpile(bound, opt.epsilon_budget).first;
  return private_infer(st, evaluated, model.readout, opt.shots,
                       opt.shots_per_key, rng, true_label);
}

// Histogram over all 2^n outcomes of the amplitude-encoded state.
// Unencrypted sampling reproduces |x_i|^2 / ||x||^2; encrypted sampling uses
// a fresh QOTP key per shot and mixes every bin to uniform.
inline std::vector<std::uint64_t> sample_state_image(
    const std::vector<double>& features, int n, std::size_t shots,
    bool encrypted, Rng& rng) {
  if (shots == 0)
    throw std::invalid_argument("sample_state_image: shots must be > 0");
  const StateVector st = encode_amplitude(features, n);
  std::vector<std::uint64_t> hist(st.dim(), 0);
  if (!encrypted) {
    for (std::uint64_t idx : st.sample_indices(shots, rng)) ++hist[idx];
    return hist;
  }
  for (std::size_t s = 0; s < shots; ++s) {
    const PauliKey key = keygen(n, rng);
    StateVector enc = st;
    qotp_apply(enc, key);
    ++hist[enc.sample_indices(1, rng)[0]];
  }
  return hist;
}

// What the client learns from the key-update program alone: one gate per
// recorded step.  Pauli gates never emit steps, so this is exactly the
// Pauli-stripped server circuit.
inline Circuit reconstruct_client_view(const KeyUpdateProgram& program) {
  if (program.n < 1)
    throw std::invalid_argument("reconstruct_client_view: empty program width");
  Circuit c;
  c.n_qubits = program.n;
  int next_bell = 1;
  for (const KeyUpdateStep& s : program.steps) {
    switch (s.op) {
      case KeyUpdateStep::Op::H:
        c.append(Gate::h(s.i));
        break;
      case KeyUpdateStep::Op::S:
        c.append(Gate::s(s.i));
        break;
      case KeyUpdateStep::Op::CNOT:
        c.append(Gate::cnot(s.i, s.j));
        break;
      case KeyUpdateStep::Op::T:
        if (s.m != next_bell++)
          throw std::invalid_argument(
              "reconstruct_client_view: bell ordinals out of order");
        c.append(Gate::t(s.i));
        break;
    }
  }
  return c;
}

// Exact plaintext accuracy of a circuit used as a binary classifier via the
// readout qubit.
inline double dataset_accuracy(const Circuit& circuit, int readout,
                               const Dataset& ds,
                               const std::string& encoding) {
  if (ds.size() == 0)
    throw std::invalid_argument("dataset_accuracy: empty dataset");
  AnsatzSpec shape;  // only n_qubits is consulted by the encoder
  shape.n_qubits = circuit.n_qubits;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    StateVector st =
        fed_detail::encoded_state(ds.features[i], shape, encoding);
    st.apply(circuit);
    correct += predict(st.prob_one(readout)) == ds.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct PrivacyRecord {
  int instance = 0;
  double server_acc = 0.0;
  double non_pauli_acc = 0.0;
  double distance = 0.0;  // |non_pauli_acc - 0.5|
  bool selected = false;  // retrain-and-select pick: maximal accuracy drop
  bool failed = false;    // training threw; accuracies are NaN
};

struct AuditConfig {
  int n_qubits = 8;
  int iterations = 150;
  int batch = 2;
  double alpha = 0.01;
  double epsilon_budget = 0.1;
  std::uint64_t seed = 0;
};

// Train n_instances fresh models (plain simulator, independent seeded
// inits), then compare test accuracy of each transpiled circuit against its
// Pauli-stripped version.  A training failure is recorded and the audit
// continues.
inline std::vector<PrivacyRecord> privacy_audit(int n_instances,
                                                const std::string& encoding,
                                                const Dataset& train,
                                                const Dataset& test,
                                                const AuditConfig& cfg) {
  if (n_instances < 1)
    throw std::invalid_argument("privacy_audit: need at least one instance");
  const AnsatzSpec spec = build_ansatz(cfg.n_qubits);
  const ClientDataset pool = client_from_dataset(train, "audit_pool");

  std::vector<PrivacyRecord> records;
  for (int i = 0; i < n_instances; ++i) {
    PrivacyRecord rec;
    rec.instance = i;
    try {
      TrainConfig tc;
      tc.iterations = cfg.iterations;
      tc.batch_per_client = cfg.batch;
      tc.alpha = cfg.alpha;
      tc.epsilon_budget = cfg.epsilon_budget;
      tc.encoding = encoding;
      tc.exact = true;
      tc.seed = Rng(cfg.seed).child(static_cast<std::uint64_t>(i) + 1).seed();
      const auto [theta, log] = run_reverse_training(spec, {pool}, tc);

      const Circuit bound = bind_ansatz(spec, theta);
      const Circuit evaluated = transpile(bound, cfg.epsilon_budget).first;
      const Circuit stripped = strip_paulis(evaluated);
      rec.server_acc =
          dataset_accuracy(evaluated, spec.readout_qubit, test, encoding);
      rec.non_pauli_acc =
          dataset_accuracy(stripped, spec.readout_qubit, test, encoding);
      rec.distance = std::abs(rec.non_pauli_acc - 0.5);
    } catch (const std::exception&) {
      rec.failed = true;
      rec.server_acc = std::numeric_limits<double>::quiet_NaN();
      rec.non_pauli_acc = std::numeric_limits<double>::quiet_NaN();
      rec.distance = std::numeric_limits<double>::quiet_NaN();
    }
    records.push_back(rec);
  }

  int best = -1;
  double best_drop = -1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].failed) continue;
    const double drop =
        std::abs(records[i].server_acc - records[i].non_pauli_acc);
    if (drop > best_drop) {
      best_drop = drop;
      best = static_cast<int>(i);
    }
  }
  if (best >= 0) records[static_cast<std::size_t>(best)].selected = true;
  return records;
}

inline std::string audit_to_csv(const std::vector<PrivacyRecord>& records) {
  std::ostringstream out;
  out.precision(17);
  out << "index,server_acc,non_pauli_acc,abs_distance\n";
  for (const auto& r : records)
    out << r.instance << "," << r.server_acc << "," << r.non_pauli_acc << ","
        << r.distance << "\n";
  return out.str();
}

}  // namespace qhe
