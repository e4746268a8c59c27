#pragma once

// Classical-to-quantum data encodings.  Qubit encoding turns an n-vector of
// angles into one R_Y per qubit; amplitude encoding loads a normalized copy
// of the feature vector directly into the state amplitudes (the client
// prepares this state before encryption, so it never needs a circuit form).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qhe/gate.hpp"
#include "qhe/statevector.hpp"

namespace qhe {

inline Circuit encode_qubit(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("encode_qubit: empty feature vector");
  Circuit c(static_cast<int>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || x[i] > std::numbers::pi + 1e-12)
      throw std::invalid_argument("encode_qubit: feature " + std::to_string(i) +
                                  " outside [0, pi]");
    c.append(Gate::ry(static_cast<int>(i), x[i]));
  }
  return c;
}

inline StateVector encode_amplitude(const std::vector<double>& x, int n) {
  const std::size_t dim = std::size_t{1} << n;
  if (x.empty() || x.size() > dim)
    throw std::invalid_argument("encode_amplitude: need 1 <= features <= 2^n");
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (!(norm2 > 0.0) || !std::isfinite(norm2))
    throw std::invalid_argument("encode_amplitude: feature vector must have positive norm");
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<cplx> amps(dim, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) amps[i] = x[i] * inv;
  return StateVector::from_amplitudes(std::move(amps));
}

}  // namespace qhe
