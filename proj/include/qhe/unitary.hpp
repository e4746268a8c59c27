#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace qhe {

using cplx = std::complex<double>;

// Row-major 2x2 complex matrix.
struct Mat2 {
  cplx a, b, c, d;  // [[a, b], [c, d]]
};

inline Mat2 mat2_identity() { return {1.0, 0.0, 0.0, 1.0}; }

inline Mat2 mul(const Mat2& u, const Mat2& v) {
  return {u.a * v.a + u.b * v.c, u.a * v.b + u.b * v.d,
          u.c * v.a + u.d * v.c, u.c * v.b + u.d * v.d};
}

inline Mat2 dagger(const Mat2& u) {
  return {std::conj(u.a), std::conj(u.c), std::conj(u.b), std::conj(u.d)};
}

inline cplx trace_adj_mul(const Mat2& u, const Mat2& v) {  // tr(u^dag v)
  return std::conj(u.a) * v.a + std::conj(u.c) * v.c + std::conj(u.b) * v.b +
         std::conj(u.d) * v.d;
}

// Global-phase-invariant distance d(U,V) = sqrt(1 - |tr(U^dag V)|/2) for
// single-qubit unitaries.  Evaluated as ||U - e^{i phi*} V||_F / 2 with the
// optimal phase phi* = -arg tr(U^dag V), which is algebraically identical
// but keeps full precision near d = 0 (the direct form bottoms out around
// 1e-8 from cancellation in 1 - |tr|/2).
inline double phase_dist(const Mat2& u, const Mat2& v) {
  cplx t = trace_adj_mul(u, v);
  cplx ph = std::abs(t) < 1e-300 ? cplx(1.0, 0.0) : std::conj(t) / std::abs(t);
  double s = std::norm(u.a - ph * v.a) + std::norm(u.b - ph * v.b) +
             std::norm(u.c - ph * v.c) + std::norm(u.d - ph * v.d);
  return std::sqrt(s) / 2.0;
}

// Unit quaternion of U modulo global phase.  U is scaled into SU(2)
// as [[alpha, beta], [-conj(beta), conj(alpha)]] and mapped to
// q = (Re a, Im a, Re b, Im b); then |q . q'| = |tr(U^dag V)| / 2, so
// phase_dist(U,V)^2 = 1 - |q . q'|.  Sign is canonical: first component
// with |value| > 1e-9 is made positive.
struct Quat {
  double w, x, y, z;
};

inline double dot(const Quat& p, const Quat& q) {
  return p.w * q.w + p.x * q.x + p.y * q.y + p.z * q.z;
}

inline Quat canonical_sign(Quat q) {
  const double tol = 1e-9;
  double lead = 0.0;
  if (std::abs(q.w) > tol) lead = q.w;
  else if (std::abs(q.x) > tol) lead = q.x;
  else if (std::abs(q.y) > tol) lead = q.y;
  else lead = q.z;
  if (lead < 0.0) return {-q.w, -q.x, -q.y, -q.z};
  return q;
}

inline Quat to_quat(const Mat2& u) {
  cplx det = u.a * u.d - u.b * u.c;
  cplx s = 1.0 / std::sqrt(det);
  cplx alpha = s * u.a;
  cplx beta = s * u.b;
  return canonical_sign({alpha.real(), alpha.imag(), beta.real(), beta.imag()});
}

// Best-fit RZ angle for a 2x2 unitary, and the residual distance.
// With RZ(t) = diag(e^{-it/2}, e^{it/2}), the optimum of d(U, RZ(t)) is
// t* = arg(u.d) - arg(u.a), where |tr(RZ(t*)^dag U)| = |u.a| + |u.d|.
struct RzFit {
  double angle;
  double dist;
};

inline Mat2 rz_mat(double t) {
  return {std::polar(1.0, -t / 2), 0.0, 0.0, std::polar(1.0, t / 2)};
}

inline RzFit best_rz_fit(const Mat2& u) {
  double t = std::arg(u.d) - std::arg(u.a);
  return {t, phase_dist(u, rz_mat(t))};
}

}  // namespace qhe
