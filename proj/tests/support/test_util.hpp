#pragma once

// Shared helpers for the test suites: canonical states, Pauli matrices,
// deterministic random generators, and a brute-force unitary evolver used as
// an independent oracle for the dynamics code.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "triqnet/qmath.hpp"

namespace testutil {

using triqnet::qmath::cplx;
using triqnet::qmath::ComplexMatrix;
using triqnet::qmath::DensityMatrix;
using triqnet::qmath::PureState;

inline ComplexMatrix pauli_i() { return ComplexMatrix::identity(2); }

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// (|0...0> + |1...1>)/sqrt(2)
inline PureState ghz(std::size_t n) {
  std::vector<std::size_t> dims(n, 2);
  std::vector<cplx> amps(std::size_t{1} << n);
  amps.front() = 1.0 / std::sqrt(2.0);
  amps.back() = 1.0 / std::sqrt(2.0);
  return PureState(std::move(dims), std::move(amps));
}

// (|eg> - |ge>)/sqrt(2)
inline PureState psi_minus() {
  std::vector<cplx> amps(4);
  amps[2] = 1.0 / std::sqrt(2.0);
  amps[1] = -1.0 / std::sqrt(2.0);
  return PureState({2, 2}, std::move(amps));
}

// Dephased GHZ-3 family produced by the entangle-and-measure attack:
// 0.5*(|ggg><ggg| + |eee><eee|) + 0.5*cos(theta)*(|ggg><eee| + h.c.)
inline DensityMatrix dephased_ghz3(double theta) {
  ComplexMatrix m(8, 8);
  m(0, 0) = 0.5;
  m(7, 7) = 0.5;
  m(0, 7) = 0.5 * std::cos(theta);
  m(7, 0) = 0.5 * std::cos(theta);
  return DensityMatrix({2, 2, 2}, std::move(m));
}

inline ComplexMatrix random_complex(std::mt19937_64& gen, std::size_t r, std::size_t c) {
  std::normal_distribution<double> dist(0.0, 1.0);
  ComplexMatrix m(r, c);
  for (auto& v : m.data) v = cplx(dist(gen), dist(gen));
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& gen, std::size_t n) {
  ComplexMatrix a = random_complex(gen, n, n);
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return h;
}

inline DensityMatrix random_density(std::mt19937_64& gen, std::vector<std::size_t> dims) {
  const std::size_t d = triqnet::qmath::product_dim(dims);
  ComplexMatrix a = random_complex(gen, d, d);
  ComplexMatrix rho = a * a.adjoint();
  const double tr = rho.trace().real();
  rho *= cplx(1.0 / tr);
  return DensityMatrix(std::move(dims), std::move(rho));
}

inline PureState random_pure(std::mt19937_64& gen, std::vector<std::size_t> dims) {
  const std::size_t d = triqnet::qmath::product_dim(dims);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<cplx> amps(d);
  for (auto& v : amps) v = cplx(dist(gen), dist(gen));
  PureState psi(std::move(dims), std::move(amps));
  psi.normalize();
  return psi;
}

// exp(-i H t) |psi>, computed through the eigendecomposition of H. Used as the
// independent oracle for the time-stepping integrators.
inline std::vector<cplx> evolve_exact(const ComplexMatrix& h, const std::vector<cplx>& psi,
                                      double t) {
  const auto spec = triqnet::qmath::hermitian_eig(h);
  const std::size_t d = h.rows;
  std::vector<cplx> coeff(d), out(d);
  for (std::size_t k = 0; k < d; ++k) {
    cplx c = 0.0;
    for (std::size_t i = 0; i < d; ++i) c += std::conj(spec.eigenvectors(i, k)) * psi[i];
    coeff[k] = c * std::exp(cplx(0.0, -spec.eigenvalues[k] * t));
  }
  for (std::size_t i = 0; i < d; ++i) {
    cplx v = 0.0;
    for (std::size_t k = 0; k < d; ++k) v += spec.eigenvectors(i, k) * coeff[k];
    out[i] = v;
  }
  return out;
}

}  // namespace testutil
