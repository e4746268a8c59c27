#pragma once

// JSON form of a trained model: register width, which encoder the features
// expect, the weight vector, and the readout qubit.  Round-trips bit-exactly
// (doubles serialize in shortest round-trip form).

#include <cmath>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qhe/ansatz.hpp"

namespace qhe {

struct Model {
  int n_qubits = 0;
  std::string encoding;  // "qubit" | "amplitude"
  Weights theta;
  int readout = 0;
};

inline nlohmann::json model_to_json(const Model& m) {
  return {{"n_qubits", m.n_qubits},
          {"encoding", m.encoding},
          {"theta", m.theta},
          {"readout", m.readout}};
}

inline Model model_from_json(const nlohmann::json& j) {
  Model m;
  m.n_qubits = j.at("n_qubits").get<int>();
  m.encoding = j.at("encoding").get<std::string>();
  m.theta = j.at("theta").get<Weights>();
  m.readout = j.at("readout").get<int>();
  if (m.n_qubits < 2 || (m.n_qubits & (m.n_qubits - 1)) != 0)
    throw std::invalid_argument("model: n_qubits must be a power of two >= 2");
  if (m.encoding != "qubit" && m.encoding != "amplitude")
    throw std::invalid_argument("model: encoding must be qubit or amplitude");
  const AnsatzSpec spec = build_ansatz(m.n_qubits);
  if (static_cast<int>(m.theta.size()) != spec.n_params())
    throw std::invalid_argument("model: expected " +
                                std::to_string(spec.n_params()) + " weights");
  for (double v : m.theta)
    if (!std::isfinite(v)) throw std::invalid_argument("model: non-finite weight");
  if (m.readout < 0 || m.readout >= m.n_qubits)
    throw std::invalid_argument("model: readout out of range");
  return m;
}

}  // namespace qhe
