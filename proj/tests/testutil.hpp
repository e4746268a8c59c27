#pragma once

// Shared helpers for the test suites.  The dense-matrix reference simulator
// here is deliberately written against full 2^n x 2^n unitaries built from
// Kronecker products, independent of the pair-loop implementation under test.

#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qhe/gate.hpp"
#include "qhe/rng.hpp"
#include "qhe/statevector.hpp"

namespace qhe::test {

using CMat = std::vector<std::vector<cplx>>;
using CVec = std::vector<cplx>;

inline CMat cmat_identity(std::size_t d) {
  CMat m(d, CVec(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) m[i][i] = 1.0;
  return m;
}

inline CMat kron(const CMat& a, const CMat& b) {
  const std::size_t ra = a.size(), ca = a[0].size();
  const std::size_t rb = b.size(), cb = b[0].size();
  CMat m(ra * rb, CVec(ca * cb, 0.0));
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < ca; ++j)
      for (std::size_t k = 0; k < rb; ++k)
        for (std::size_t l = 0; l < cb; ++l)
          m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
  return m;
}

inline CMat matmul(const CMat& a, const CMat& b) {
  const std::size_t r = a.size(), m = b.size(), c = b[0].size();
  CMat out(r, CVec(c, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const cplx aik = a[i][k];
      if (aik == cplx(0.0, 0.0)) continue;
      for (std::size_t j = 0; j < c; ++j) out[i][j] += aik * b[k][j];
    }
  return out;
}

inline CVec matvec(const CMat& a, const CVec& v) {
  CVec out(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += a[i][j] * v[j];
  return out;
}

inline CMat mat2_to_cmat(const Mat2& u) {
  return {{u.a, u.b}, {u.c, u.d}};
}

// Embeds a single-qubit matrix at qubit q (qubit 0 = LSB):
// I_{high} (x) U (x) I_{low}.
inline CMat embed_1q(const CMat& u, int q, int n) {
  CMat low = cmat_identity(std::size_t{1} << q);
  CMat high = cmat_identity(std::size_t{1} << (n - q - 1));
  return kron(high, kron(u, low));
}

// Projector |b><b| at qubit q.
inline CMat embed_proj(int q, int n, int b) {
  CMat p(2, CVec(2, 0.0));
  p[b][b] = 1.0;
  return embed_1q(p, q, n);
}

inline CMat add(const CMat& a, const CMat& b) {
  CMat m = a;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) m[i][j] += b[i][j];
  return m;
}

inline CMat full_unitary(const Gate& g, int n) {
  switch (g.kind) {
    case GateKind::CNOT: {
      CMat x = embed_1q(mat2_to_cmat(mat2_of(GateKind::X)), g.q1, n);
      return add(embed_proj(g.q0, n, 0),
                 matmul(embed_proj(g.q0, n, 1), x));
    }
    case GateKind::SWAP: {
      const std::size_t d = std::size_t{1} << n;
      CMat m(d, CVec(d, 0.0));
      const std::size_t m0 = std::size_t{1} << g.q0;
      const std::size_t m1 = std::size_t{1} << g.q1;
      for (std::size_t i = 0; i < d; ++i) {
        const bool b0 = i & m0, b1 = i & m1;
        std::size_t j = i;
        if (b0 != b1) j = (i ^ m0) ^ m1;
        m[j][i] = 1.0;
      }
      return m;
    }
    case GateKind::CRZ: {
      CMat rz = embed_1q(mat2_to_cmat(mat2_of(GateKind::RZ, g.angle)), g.q1, n);
      return add(embed_proj(g.q0, n, 0),
                 matmul(embed_proj(g.q0, n, 1), rz));
    }
    case GateKind::ACRX: {
      CMat rx = embed_1q(mat2_to_cmat(mat2_of(GateKind::RX, g.angle)), g.q1, n);
      return add(matmul(embed_proj(g.q0, n, 0), rx),
                 embed_proj(g.q0, n, 1));
    }
    default:
      return embed_1q(mat2_to_cmat(mat2_of(g.kind, g.angle)), g.q0, n);
  }
}

inline CVec ref_apply(const Circuit& c, CVec v) {
  for (const Gate& g : c.gates) v = matvec(full_unitary(g, c.n_qubits), v);
  return v;
}

inline double fidelity(const CVec& a, const CVec& b) {
  cplx ip = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ip += std::conj(a[i]) * b[i];
  return std::abs(ip);
}

inline CVec amps_of(const StateVector& st) { return st.amplitudes(); }

inline StateVector random_state(int n, Rng& rng) {
  CVec v(std::size_t{1} << n);
  double s = 0.0;
  for (auto& a : v) {
    a = cplx(rng.normal(), rng.normal());
    s += std::norm(a);
  }
  const double inv = 1.0 / std::sqrt(s);
  for (auto& a : v) a *= inv;
  return StateVector::from_amplitudes(std::move(v));
}

// Random Clifford+T circuit over {X,Z,H,S,T,CNOT}.
inline Circuit random_clifford_t(int n, int n_gates, int max_t, Rng& rng) {
  Circuit c(n);
  int t_used = 0;
  while (static_cast<int>(c.gates.size()) < n_gates) {
    int pick = static_cast<int>(rng.index(6));
    if (pick == 4 && t_used >= max_t) pick = 2;
    int q = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    switch (pick) {
      case 0: c.append(Gate::x(q)); break;
      case 1: c.append(Gate::z(q)); break;
      case 2: c.append(Gate::h(q)); break;
      case 3: c.append(Gate::s(q)); break;
      case 4:
        c.append(Gate::t(q));
        ++t_used;
        break;
      case 5: {
        if (n < 2) { c.append(Gate::h(q)); break; }
        int t = static_cast<int>(rng.index(static_cast<std::uint64_t>(n - 1)));
        if (t >= q) ++t;
        c.append(Gate::cnot(q, t));
        break;
      }
    }
  }
  return c;
}

// Random circuit over the full gate alphabet (for transpiler tests).
inline Circuit random_general(int n, int n_gates, Rng& rng) {
  Circuit c(n);
  while (static_cast<int>(c.gates.size()) < n_gates) {
    int pick = static_cast<int>(rng.index(10));
    int q = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    double a = rng.uniform(-3.0, 3.0);
    auto other = [&] {
      int t = static_cast<int>(rng.index(static_cast<std::uint64_t>(n - 1)));
      return t >= q ? t + 1 : t;
    };
    switch (pick) {
      case 0: c.append(Gate::h(q)); break;
      case 1: c.append(Gate::s(q)); break;
      case 2: c.append(Gate::t(q)); break;
      case 3: c.append(Gate::rx(q, a)); break;
      case 4: c.append(Gate::ry(q, a)); break;
      case 5: c.append(Gate::rz(q, a)); break;
      case 6: c.append(Gate::sdg(q)); break;
      case 7: c.append(Gate::tdg(q)); break;
      case 8:
        if (n >= 2) c.append(Gate::cnot(q, other()));
        else c.append(Gate::x(q));
        break;
      case 9:
        if (n >= 2) {
          int t = other();
          c.append(Gate::crz(q, t, a));
          c.append(Gate::acrx(q, t, rng.uniform(-3.0, 3.0)));
        } else {
          c.append(Gate::z(q));
        }
        break;
    }
  }
  return c;
}

inline void expect_state_near(const StateVector& got, const CVec& want,
                              double tol, const char* what = "") {
  ASSERT_EQ(got.dim(), want.size()) << what;
  double f = fidelity(amps_of(got), want);
  EXPECT_GE(f, 1.0 - tol) << what << " fidelity " << f;
}

}  // namespace qhe::test
