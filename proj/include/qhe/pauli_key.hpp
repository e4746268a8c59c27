#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhe/rng.hpp"

namespace qhe {

// Quantum one-time-pad key: per-qubit X and Z bits.
struct PauliKey {
  std::vector<int> x, z;

  explicit PauliKey(int n = 0) : x(n, 0), z(n, 0) {}
  int n() const { return static_cast<int>(x.size()); }
};

inline PauliKey keygen(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("keygen: n must be >= 1");
  PauliKey k(n);
  for (int i = 0; i < n; ++i) {
    k.x[i] = rng.bit();
    k.z[i] = rng.bit();
  }
  return k;
}

struct KeyUpdateStep {
  enum class Op { H, S, CNOT, T };
  Op op;
  int i = 0;       // qubit (control for CNOT)
  int j = -1;      // CNOT target
  int m = 0;       // 1-based Bell-register ordinal, T steps only
};

struct BellOutcomes {
  std::vector<std::pair<int, int>> pairs;  // (r_a, r_b), indexed by m-1

  std::size_t size() const { return pairs.size(); }
};

struct KeyUpdateProgram {
  int n = 0;
  std::vector<KeyUpdateStep> steps;

  std::size_t t_count() const {
    std::size_t c = 0;
    for (const auto& s : steps)
      if (s.op == KeyUpdateStep::Op::T) ++c;
    return c;
  }
};

// Table-driven Clifford key updates:
//   H(i):      (x_i, z_i) -> (z_i, x_i)
//   S(i):      (x_i, z_i) -> (x_i, x_i ^ z_i)
//   CNOT(i,j): ((x_i, z_i), (x_j, z_j)) -> ((x_i, z_i ^ z_j), (x_i ^ x_j, z_j))
inline PauliKey key_update_clifford(PauliKey key, const KeyUpdateStep& step) {
  auto check = [&](int q) {
    if (q < 0 || q >= key.n())
      throw std::out_of_range("key_update_clifford: qubit out of range");
  };
  switch (step.op) {
    case KeyUpdateStep::Op::H:
      check(step.i);
      std::swap(key.x[step.i], key.z[step.i]);
      return key;
    case KeyUpdateStep::Op::S:
      check(step.i);
      key.z[step.i] ^= key.x[step.i];
      return key;
    case KeyUpdateStep::Op::CNOT:
      check(step.i);
      check(step.j);
      key.z[step.i] ^= key.z[step.j];
      key.x[step.j] ^= key.x[step.i];
      return key;
    case KeyUpdateStep::Op::T:
      throw std::invalid_argument("key_update_clifford: T step needs bell bits");
  }
  throw std::invalid_argument("key_update_clifford: bad step");
}

// T-gadget key update: (x_i, z_i) -> (x_i ^ r_a, x_i ^ z_i ^ r_b).
inline PauliKey key_update_t(PauliKey key, int i, int r_a, int r_b) {
  if (i < 0 || i >= key.n())
    throw std::out_of_range("key_update_t: qubit out of range");
  int x = key.x[i];
  key.x[i] = x ^ r_a;
  key.z[i] = x ^ key.z[i] ^ r_b;
  return key;
}

inline PauliKey replay_key(const KeyUpdateProgram& program, PauliKey key,
                           const BellOutcomes& bell) {
  if (bell.size() != program.t_count())
    throw std::invalid_argument("replay_key: bell length != t_count");
  if (key.n() != program.n)
    throw std::invalid_argument("replay_key: key size != program n");
  for (const auto& s : program.steps) {
    if (s.op == KeyUpdateStep::Op::T) {
      const auto& [ra, rb] = bell.pairs.at(static_cast<std::size_t>(s.m - 1));
      key = key_update_t(std::move(key), s.i, ra, rb);
    } else {
      key = key_update_clifford(std::move(key), s);
    }
  }
  return key;
}

// Computational-basis decryption: XOR with the final x-key.  z-bits only
// rotate phases and never affect basis readout, so they are ignored here.
inline std::string decrypt_bits(const std::string& bits,
                                const std::vector<int>& x) {
  if (bits.size() != x.size())
    throw std::invalid_argument("decrypt_bits: length mismatch");
  std::string out = bits;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (x[i]) out[i] = out[i] == '0' ? '1' : '0';
  return out;
}

inline std::string bits_to_string(const std::vector<int>& v) {
  std::string s;
  for (int b : v) s += b ? '1' : '0';
  return s;
}

inline std::vector<int> string_to_bits(const std::string& s) {
  std::vector<int> v;
  for (char c : s) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("bad bitstring character");
    v.push_back(c == '1');
  }
  return v;
}

inline nlohmann::json key_to_json(const PauliKey& k) {
  return {{"x", bits_to_string(k.x)}, {"z", bits_to_string(k.z)}};
}

inline PauliKey key_from_json(const nlohmann::json& j) {
  PauliKey k;
  k.x = string_to_bits(j.at("x").get<std::string>());
  k.z = string_to_bits(j.at("z").get<std::string>());
  if (k.x.size() != k.z.size())
    throw std::invalid_argument("key JSON: x/z length mismatch");
  return k;
}

inline nlohmann::json program_to_json(const KeyUpdateProgram& p) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : p.steps) {
    switch (s.op) {
      case KeyUpdateStep::Op::H:
        steps.push_back({{"op", "H"}, {"q", s.i}});
        break;
      case KeyUpdateStep::Op::S:
        steps.push_back({{"op", "S"}, {"q", s.i}});
        break;
      case KeyUpdateStep::Op::CNOT:
        steps.push_back({{"op", "CNOT"}, {"c", s.i}, {"t", s.j}});
        break;
      case KeyUpdateStep::Op::T:
        steps.push_back({{"op", "T"}, {"q", s.i}, {"bell", s.m}});
        break;
    }
  }
  return {{"n", p.n}, {"steps", std::move(steps)}};
}

inline KeyUpdateProgram program_from_json(const nlohmann::json& j) {
  KeyUpdateProgram p;
  p.n = j.at("n").get<int>();
  int next_m = 1;
  for (const auto& js : j.at("steps")) {
    const std::string op = js.at("op").get<std::string>();
    KeyUpdateStep s;
    if (op == "H" || op == "S") {
      s.op = op == "H" ? KeyUpdateStep::Op::H : KeyUpdateStep::Op::S;
      s.i = js.at("q").get<int>();
    } else if (op == "CNOT") {
      s.op = KeyUpdateStep::Op::CNOT;
      s.i = js.at("c").get<int>();
      s.j = js.at("t").get<int>();
    } else if (op == "T") {
      s.op = KeyUpdateStep::Op::T;
      s.i = js.at("q").get<int>();
      s.m = js.at("bell").get<int>();
      if (s.m != next_m++)
        throw std::invalid_argument("program JSON: bell ordinals must be 1..M in order");
    } else {
      throw std::invalid_argument("program JSON: unknown op '" + op + "'");
    }
    p.steps.push_back(s);
  }
  return p;
}

}  // namespace qhe
