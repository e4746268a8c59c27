#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qhe/gate.hpp"
#include "qhe/rng.hpp"
#include "qhe/unitary.hpp"

namespace qhe {

// Dense statevector over n qubits, qubit 0 = least significant bit of the
// amplitude index.  Bitstrings are rendered qubit-0-first.
class StateVector {
 public:
  explicit StateVector(int n) : n_(n) {
    if (n < 1 || n > 24)
      throw std::invalid_argument("StateVector: n_qubits must be in [1, 24]");
    a_.assign(std::size_t{1} << n, cplx(0.0, 0.0));
    a_[0] = 1.0;
  }

  static StateVector from_amplitudes(std::vector<cplx> amps) {
    int n = 0;
    while ((std::size_t{1} << n) < amps.size()) ++n;
    if ((std::size_t{1} << n) != amps.size() || amps.empty())
      throw std::invalid_argument("from_amplitudes: length must be a power of two");
    double s = 0.0;
    for (const cplx& v : amps) s += std::norm(v);
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("from_amplitudes: vector not normalized");
    StateVector st(std::max(n, 1));
    st.a_ = std::move(amps);
    return st;
  }

  int n_qubits() const { return n_; }
  std::size_t dim() const { return a_.size(); }
  const std::vector<cplx>& amplitudes() const { return a_; }
  cplx amp(std::size_t i) const { return a_.at(i); }

  void apply_mat2(int q, const Mat2& m) {
    check(q);
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i & mask) continue;
      cplx v0 = a_[i], v1 = a_[i | mask];
      a_[i] = m.a * v0 + m.b * v1;
      a_[i | mask] = m.c * v0 + m.d * v1;
    }
  }

  // Diagonal single-qubit gate diag(p0, p1).
  void apply_phase(int q, cplx p0, cplx p1) {
    check(q);
    const std::size_t mask = std::size_t{1} << q;
    const bool trivial0 = p0 == cplx(1.0, 0.0);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i & mask) a_[i] *= p1;
      else if (!trivial0) a_[i] *= p0;
    }
  }

  void apply(const Gate& g) {
    switch (g.kind) {
      case GateKind::X: {
        const std::size_t m = std::size_t{1} << check(g.q0);
        for (std::size_t i = 0; i < a_.size(); ++i)
          if (!(i & m)) std::swap(a_[i], a_[i | m]);
        return;
      }
      case GateKind::Z: return apply_phase(g.q0, 1.0, -1.0);
      case GateKind::S: return apply_phase(g.q0, 1.0, cplx(0.0, 1.0));
      case GateKind::Sdg: return apply_phase(g.q0, 1.0, cplx(0.0, -1.0));
      case GateKind::T:
        return apply_phase(g.q0, 1.0, std::polar(1.0, std::numbers::pi / 4));
      case GateKind::Tdg:
        return apply_phase(g.q0, 1.0, std::polar(1.0, -std::numbers::pi / 4));
      case GateKind::RZ:
        return apply_phase(g.q0, std::polar(1.0, -g.angle / 2),
                           std::polar(1.0, g.angle / 2));
      case GateKind::H:
      case GateKind::RX:
      case GateKind::RY:
        return apply_mat2(g.q0, mat2_of(g.kind, g.angle));
      case GateKind::CNOT: {
        const std::size_t cm = std::size_t{1} << check(g.q0);
        const std::size_t tm = std::size_t{1} << check(g.q1);
        for (std::size_t i = 0; i < a_.size(); ++i)
          if ((i & cm) && !(i & tm)) std::swap(a_[i], a_[i | tm]);
        return;
      }
      case GateKind::SWAP: {
        const std::size_t m0 = std::size_t{1} << check(g.q0);
        const std::size_t m1 = std::size_t{1} << check(g.q1);
        for (std::size_t i = 0; i < a_.size(); ++i)
          if ((i & m0) && !(i & m1)) std::swap(a_[i], a_[(i ^ m0) | m1]);
        return;
      }
      case GateKind::CRZ: {
        const std::size_t cm = std::size_t{1} << check(g.q0);
        const std::size_t tm = std::size_t{1} << check(g.q1);
        const cplx p0 = std::polar(1.0, -g.angle / 2);
        const cplx p1 = std::polar(1.0, g.angle / 2);
        for (std::size_t i = 0; i < a_.size(); ++i)
          if (i & cm) a_[i] *= (i & tm) ? p1 : p0;
        return;
      }
      case GateKind::ACRX: {
        const std::size_t cm = std::size_t{1} << check(g.q0);
        const std::size_t tm = std::size_t{1} << check(g.q1);
        const Mat2 m = mat2_of(GateKind::RX, g.angle);
        for (std::size_t i = 0; i < a_.size(); ++i) {
          if ((i & cm) || (i & tm)) continue;
          cplx v0 = a_[i], v1 = a_[i | tm];
          a_[i] = m.a * v0 + m.b * v1;
          a_[i | tm] = m.c * v0 + m.d * v1;
        }
        return;
      }
    }
    throw std::invalid_argument("apply: unhandled gate kind");
  }

  void apply(const Circuit& c) {
    if (c.n_qubits > n_)
      throw std::invalid_argument("apply: circuit wider than state");
    for (const Gate& g : c.gates) apply(g);
  }

  double prob_one(int q) const {
    const std::size_t mask = std::size_t{1} << check(q);
    double p = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (i & mask) p += std::norm(a_[i]);
    return p;
  }

  double expectation_z(int q) const { return 1.0 - 2.0 * prob_one(q); }

  double norm() const {
    double s = 0.0;
    for (const cplx& v : a_) s += std::norm(v);
    return s;
  }

  double fidelity(const StateVector& other) const {
    if (other.dim() != dim())
      throw std::invalid_argument("fidelity: dimension mismatch");
    cplx ip = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
      ip += std::conj(a_[i]) * other.a_[i];
    return std::abs(ip);
  }

  // Projective measurement of one qubit; collapses and renormalizes.
  int measure(int q, Rng& rng) {
    double p1 = prob_one(q);
    int outcome = rng.real() < p1 ? 1 : 0;
    collapse(q, outcome);
    return outcome;
  }

  // Forces qubit q to `bit`.  Throws if that branch has (near) zero norm.
  void collapse(int q, int bit) {
    const std::size_t mask = std::size_t{1} << check(q);
    double p = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (((i & mask) != 0) == (bit != 0)) p += std::norm(a_[i]);
    if (p < 1e-15)
      throw std::logic_error("collapse: branch has zero norm");
    const double inv = 1.0 / std::sqrt(p);
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (((i & mask) != 0) == (bit != 0)) a_[i] *= inv;
      else a_[i] = 0.0;
    }
  }

  std::vector<std::uint64_t> sample_indices(std::size_t shots, Rng& rng) const {
    std::vector<double> cdf(a_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      acc += std::norm(a_[i]);
      cdf[i] = acc;
    }
    std::vector<std::uint64_t> out;
    out.reserve(shots);
    for (std::size_t s = 0; s < shots; ++s) {
      double u = rng.real() * acc;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      out.push_back(static_cast<std::uint64_t>(
          std::min<std::ptrdiff_t>(it - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1)));
    }
    return out;
  }

  std::map<std::string, std::uint64_t> sample_counts(std::size_t shots,
                                                     Rng& rng) const {
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t idx : sample_indices(shots, rng))
      ++counts[bitstring(idx, n_)];
    return counts;
  }

  // Qubit-0-first rendering of a basis index.
  static std::string bitstring(std::uint64_t idx, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int k = 0; k < n; ++k)
      if (idx & (std::uint64_t{1} << k)) s[static_cast<std::size_t>(k)] = '1';
    return s;
  }

 private:
  int check(int q) const {
    if (q < 0 || q >= n_)
      throw std::out_of_range("StateVector: qubit index " + std::to_string(q) +
                              " out of range for n=" + std::to_string(n_));
    return q;
  }

  int n_;
  std::vector<cplx> a_;
};

}  // namespace qhe
