#pragma once

#include <string>

#include <json.hpp>

#include "qhe/gate.hpp"

namespace qhe {

inline nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const Gate& g : c.gates) {
    nlohmann::json jg;
    jg["kind"] = kind_name(g.kind);
    if (is_two_qubit(g.kind)) jg["q"] = {g.q0, g.q1};
    else jg["q"] = {g.q0};
    if (is_rotation(g.kind)) jg["angle"] = g.angle;
    gates.push_back(std::move(jg));
  }
  return {{"n_qubits", c.n_qubits}, {"gates", std::move(gates)}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  if (!j.contains("n_qubits") || !j.contains("gates"))
    throw std::invalid_argument("circuit JSON: need n_qubits and gates");
  Circuit c(j.at("n_qubits").get<int>());
  std::size_t pos = 0;
  for (const auto& jg : j.at("gates")) {
    const std::string at = "gates[" + std::to_string(pos) + "]: ";
    GateKind k;
    try {
      k = kind_from_name(jg.at("kind").get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(at + e.what());
    }
    auto q = jg.at("q").get<std::vector<int>>();
    const std::size_t want = is_two_qubit(k) ? 2 : 1;
    if (q.size() != want)
      throw std::invalid_argument(at + "expected " + std::to_string(want) +
                                  " qubit indices");
    Gate g;
    g.kind = k;
    g.q0 = q[0];
    g.q1 = want == 2 ? q[1] : -1;
    if (is_rotation(k)) {
      if (!jg.contains("angle"))
        throw std::invalid_argument(at + "rotation gate needs angle");
      g.angle = jg.at("angle").get<double>();
    } else if (jg.contains("angle")) {
      throw std::invalid_argument(at + "non-rotation gate carries angle");
    }
    try {
      c.append(g);
    } catch (const std::exception& e) {
      throw std::invalid_argument(at + e.what());
    }
    ++pos;
  }
  return c;
}

}  // namespace qhe
