#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhe/unitary.hpp"

namespace qhe {

// ACRX is the anti-controlled X-rotation used by the pooling layer:
// it applies RX(angle) to the target when the control is |0>.
enum class GateKind {
  X, Z, H, S, Sdg, T, Tdg,
  CNOT, SWAP,
  RX, RY, RZ,
  CRZ, ACRX,
};

inline bool is_two_qubit(GateKind k) {
  switch (k) {
    case GateKind::CNOT:
    case GateKind::SWAP:
    case GateKind::CRZ:
    case GateKind::ACRX:
      return true;
    default:
      return false;
  }
}

inline bool is_rotation(GateKind k) {
  switch (k) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CRZ:
    case GateKind::ACRX:
      return true;
    default:
      return false;
  }
}

inline bool is_clifford_t(GateKind k) {
  switch (k) {
    case GateKind::X:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::S:
    case GateKind::T:
    case GateKind::CNOT:
      return true;
    default:
      return false;
  }
}

inline const char* kind_name(GateKind k) {
  switch (k) {
    case GateKind::X: return "X";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "Sdg";
    case GateKind::T: return "T";
    case GateKind::Tdg: return "Tdg";
    case GateKind::CNOT: return "CNOT";
    case GateKind::SWAP: return "SWAP";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CRZ: return "CRZ";
    case GateKind::ACRX: return "ACRX";
  }
  return "?";
}

inline GateKind kind_from_name(const std::string& s) {
  if (s == "X") return GateKind::X;
  if (s == "Z") return GateKind::Z;
  if (s == "H") return GateKind::H;
  if (s == "S") return GateKind::S;
  if (s == "Sdg") return GateKind::Sdg;
  if (s == "T") return GateKind::T;
  if (s == "Tdg") return GateKind::Tdg;
  if (s == "CNOT") return GateKind::CNOT;
  if (s == "SWAP") return GateKind::SWAP;
  if (s == "RX") return GateKind::RX;
  if (s == "RY") return GateKind::RY;
  if (s == "RZ") return GateKind::RZ;
  if (s == "CRZ") return GateKind::CRZ;
  if (s == "ACRX") return GateKind::ACRX;
  throw std::invalid_argument("unknown gate kind '" + s + "'");
}

struct Gate {
  GateKind kind;
  int q0 = 0;       // target; control for two-qubit kinds is q0, target q1
  int q1 = -1;
  double angle = 0.0;

  static Gate x(int q) { return {GateKind::X, q}; }
  static Gate z(int q) { return {GateKind::Z, q}; }
  static Gate h(int q) { return {GateKind::H, q}; }
  static Gate s(int q) { return {GateKind::S, q}; }
  static Gate sdg(int q) { return {GateKind::Sdg, q}; }
  static Gate t(int q) { return {GateKind::T, q}; }
  static Gate tdg(int q) { return {GateKind::Tdg, q}; }
  static Gate cnot(int c, int t) { return {GateKind::CNOT, c, t}; }
  static Gate swap(int a, int b) { return {GateKind::SWAP, a, b}; }
  static Gate rx(int q, double a) { return {GateKind::RX, q, -1, a}; }
  static Gate ry(int q, double a) { return {GateKind::RY, q, -1, a}; }
  static Gate rz(int q, double a) { return {GateKind::RZ, q, -1, a}; }
  static Gate crz(int c, int t, double a) { return {GateKind::CRZ, c, t, a}; }
  static Gate acrx(int c, int t, double a) { return {GateKind::ACRX, c, t, a}; }
};

// Single-qubit matrix of a gate kind.  RZ(t) = diag(e^{-it/2}, e^{it/2}),
// T = diag(1, e^{i pi/4}); the two differ by global phase only.
inline Mat2 mat2_of(GateKind k, double angle = 0.0) {
  const double r = std::numbers::sqrt2 / 2.0;
  const cplx i(0.0, 1.0);
  switch (k) {
    case GateKind::X: return {0, 1, 1, 0};
    case GateKind::Z: return {1, 0, 0, -1};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::S: return {1, 0, 0, i};
    case GateKind::Sdg: return {1, 0, 0, -i};
    case GateKind::T: return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
    case GateKind::Tdg: return {1, 0, 0, std::polar(1.0, -std::numbers::pi / 4)};
    case GateKind::RX: {
      double h = angle / 2.0;
      return {std::cos(h), -i * std::sin(h), -i * std::sin(h), std::cos(h)};
    }
    case GateKind::RY: {
      double h = angle / 2.0;
      return {std::cos(h), -std::sin(h), std::sin(h), std::cos(h)};
    }
    case GateKind::RZ: {
      double h = angle / 2.0;
      return {std::polar(1.0, -h), 0, 0, std::polar(1.0, h)};
    }
    default:
      throw std::invalid_argument(std::string("mat2_of: not single-qubit: ") +
                                  kind_name(k));
  }
}

inline Gate inverse_of(const Gate& g) {
  switch (g.kind) {
    case GateKind::S: return Gate::sdg(g.q0);
    case GateKind::Sdg: return Gate::s(g.q0);
    case GateKind::T: return Gate::tdg(g.q0);
    case GateKind::Tdg: return Gate::t(g.q0);
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CRZ:
    case GateKind::ACRX: {
      Gate r = g;
      r.angle = -g.angle;
      return r;
    }
    default:
      return g;  // X, Z, H, CNOT, SWAP are involutions
  }
}

struct Circuit {
  int n_qubits = 0;
  std::vector<Gate> gates;

  Circuit() = default;
  explicit Circuit(int n) : n_qubits(n) {
    if (n < 1) throw std::invalid_argument("Circuit: n_qubits must be >= 1");
  }

  void append(const Gate& g) {
    check(g.q0);
    if (is_two_qubit(g.kind)) {
      check(g.q1);
      if (g.q0 == g.q1)
        throw std::invalid_argument("Circuit: two-qubit gate needs distinct qubits");
    }
    gates.push_back(g);
  }

  void append(const Circuit& other) {
    if (other.n_qubits > n_qubits)
      throw std::invalid_argument("Circuit: append from wider circuit");
    for (const Gate& g : other.gates) append(g);
  }

  bool clifford_t_only() const {
    for (const Gate& g : gates)
      if (!is_clifford_t(g.kind)) return false;
    return true;
  }

  std::size_t t_count() const {
    std::size_t c = 0;
    for (const Gate& g : gates)
      if (g.kind == GateKind::T || g.kind == GateKind::Tdg) ++c;
    return c;
  }

  Circuit inverse() const {
    Circuit r(n_qubits);
    for (auto it = gates.rbegin(); it != gates.rend(); ++it)
      r.append(inverse_of(*it));
    return r;
  }

 private:
  void check(int q) const {
    if (q < 0 || q >= n_qubits)
      throw std::out_of_range("Circuit: qubit index " + std::to_string(q) +
                              " out of range for n=" + std::to_string(n_qubits));
  }
};

}  // namespace qhe
