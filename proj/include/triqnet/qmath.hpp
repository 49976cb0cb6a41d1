#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "triqnet/errors.hpp"

// Dense complex linear algebra and quantum-information primitives for
// Hilbert-space dimensions up to 256. Subsystem index 0 is always the leftmost
// tensor factor (most significant digit of the basis index).
namespace triqnet::qmath {

using cplx = std::complex<double>;

inline constexpr std::size_t kMaxDim = 256;

//==========================================================================
// ComplexMatrix
//==========================================================================

struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<cplx> data;  // row-major

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  cplx& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool square() const { return rows == cols; }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : data) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_finite() const {
    for (const cplx& v : data)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  // max_ij |a_ij - conj(a_ji)|
  double hermiticity_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = i; j < cols; ++j)
        m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (cplx& v : data) v *= s;
    return *this;
  }
};

inline ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
inline ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
inline ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) throw UsageError("matrix product: inner dimensions differ");
  ComplexMatrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{}) continue;
      const cplx* brow = &b.data[k * b.cols];
      cplx* orow = &out.data[i * out.cols];
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Kronecker product, standard ordering: the left factor is the slow index.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows; ++k)
        for (std::size_t l = 0; l < b.cols; ++l)
          out(i * b.rows + k, j * b.cols + l) = aij * b(k, l);
    }
  return out;
}

//==========================================================================
// States
//==========================================================================

inline std::size_t product_dim(const std::vector<std::size_t>& dims) {
  std::size_t d = 1;
  for (std::size_t k : dims) {
    if (k == 0) throw UsageError("subsystem dimension must be positive");
    d *= k;
  }
  if (d == 0 || d > kMaxDim) throw UsageError("total dimension out of supported range");
  return d;
}

struct PureState {
  std::vector<std::size_t> dims;
  std::vector<cplx> amplitudes;

  PureState() = default;
  PureState(std::vector<std::size_t> d, std::vector<cplx> a)
      : dims(std::move(d)), amplitudes(std::move(a)) {}

  std::size_t dim() const { return amplitudes.size(); }

  static PureState basis(std::vector<std::size_t> dims, std::size_t index) {
    const std::size_t d = product_dim(dims);
    if (index >= d) throw UsageError("basis index out of range");
    std::vector<cplx> a(d);
    a[index] = 1.0;
    return PureState(std::move(dims), std::move(a));
  }

  double norm2() const {
    double s = 0.0;
    for (const cplx& v : amplitudes) s += std::norm(v);
    return s;
  }

  void validate() const {
    if (product_dim(dims) != amplitudes.size())
      throw UsageError("PureState: dims do not match amplitude count");
    if (std::abs(norm2() - 1.0) > 1e-10) throw UsageError("PureState: not normalized");
  }

  void normalize() {
    const double n = std::sqrt(norm2());
    if (n == 0.0) throw UsageError("PureState: cannot normalize zero vector");
    for (cplx& v : amplitudes) v /= n;
  }
};

struct DensityMatrix {
  std::vector<std::size_t> dims;
  ComplexMatrix matrix;

  DensityMatrix() = default;
  DensityMatrix(std::vector<std::size_t> d, ComplexMatrix m)
      : dims(std::move(d)), matrix(std::move(m)) {}

  std::size_t dim() const { return matrix.rows; }

  static DensityMatrix from_pure(const PureState& psi) {
    const std::size_t d = psi.dim();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        m(i, j) = psi.amplitudes[i] * std::conj(psi.amplitudes[j]);
    return DensityMatrix(psi.dims, std::move(m));
  }

  static DensityMatrix maximally_mixed(std::vector<std::size_t> dims) {
    const std::size_t d = product_dim(dims);
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0 / static_cast<double>(d);
    return DensityMatrix(std::move(dims), std::move(m));
  }

  // Hermitian within 1e-10, unit trace within 1e-10. The PSD check is left to
  // callers that already paid for an eigendecomposition.
  void validate() const {
    if (!matrix.square() || product_dim(dims) != matrix.rows)
      throw UsageError("DensityMatrix: dims do not match matrix size");
    if (!matrix.is_finite()) throw UsageError("DensityMatrix: non-finite entries");
    if (matrix.hermiticity_defect() > 1e-10) throw UsageError("DensityMatrix: not Hermitian");
    if (std::abs(matrix.trace() - cplx{1.0}) > 1e-10) throw UsageError("DensityMatrix: trace != 1");
  }
};

//==========================================================================
// Partial trace
//==========================================================================

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::vector<std::size_t> keep) {
  const std::size_t n = rho.dims.size();
  std::sort(keep.begin(), keep.end());
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end())
    throw UsageError("partial_trace: duplicate subsystem index");
  for (std::size_t k : keep)
    if (k >= n) throw UsageError("partial_trace: subsystem index out of range");

  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < n; ++k)
    if (!std::binary_search(keep.begin(), keep.end(), k)) traced.push_back(k);

  // Strides of each subsystem in the flattened basis index (subsystem 0 slowest).
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t k = n; k-- > 1;) stride[k - 1] = stride[k] * rho.dims[k];

  std::vector<std::size_t> kept_dims;
  std::size_t dk = 1, dt = 1;
  for (std::size_t k : keep) {
    kept_dims.push_back(rho.dims[k]);
    dk *= rho.dims[k];
  }
  for (std::size_t k : traced) dt *= rho.dims[k];

  // Map a flat kept/traced index to its offset in the original basis index.
  auto offsets = [&](const std::vector<std::size_t>& subs, std::size_t count) {
    std::vector<std::size_t> out(count);
    for (std::size_t flat = 0; flat < count; ++flat) {
      std::size_t rem = flat, off = 0;
      for (std::size_t k = subs.size(); k-- > 0;) {
        const std::size_t d = rho.dims[subs[k]];
        off += (rem % d) * stride[subs[k]];
        rem /= d;
      }
      out[flat] = off;
    }
    return out;
  };
  const std::vector<std::size_t> keep_off = offsets(keep, dk);
  const std::vector<std::size_t> trace_off = offsets(traced, dt);

  ComplexMatrix out(dk, dk);
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < dt; ++t)
        s += rho.matrix(keep_off[i] + trace_off[t], keep_off[j] + trace_off[t]);
      out(i, j) = s;
    }
  return DensityMatrix(std::move(kept_dims), std::move(out));
}

//==========================================================================
// Hermitian eigendecomposition (cyclic Jacobi)
//==========================================================================

struct Spectrum {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // columns, orthonormal
};

// Cyclic Jacobi rotations; off-diagonal Frobenius tolerance 1e-12 (relative to
// the matrix Frobenius norm), at most 100 sweeps.
inline Spectrum hermitian_eig(const ComplexMatrix& h) {
  if (!h.square()) throw UsageError("hermitian_eig: matrix not square");
  if (h.hermiticity_defect() > 1e-9) throw UsageError("hermitian_eig: matrix not Hermitian");

  const std::size_t n = h.rows;
  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));
  ComplexMatrix v = ComplexMatrix::identity(n);

  double fro = 0.0;
  for (const cplx& x : a.data) fro += std::norm(x);
  fro = std::sqrt(fro);
  const double tol = 1e-12 * std::max(1.0, fro);

  for (int sweep = 0; sweep < 100 && n > 1; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
    if (std::sqrt(off) <= tol) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= tol / static_cast<double>(n)) continue;
        const cplx phase = apq / r;  // a_pq = r * phase
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Rotation angle zeroing the (p,q) element: t^2 + 2*tau*t - 1 = 0.
        const double tau = (app - aqq) / (2.0 * r);
        double t;
        if (tau >= 0.0)
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        else
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        // Columns of G: u_p = (c, s*conj(phase)), u_q = (-s*phase, c).
        const cplx sp = s * std::conj(phase);   // goes with row q in column p
        const cplx msq = -s * phase;            // goes with row p in column q

        // A <- G^dagger A G : combine columns p,q then rows p,q.
        for (std::size_t i = 0; i < n; ++i) {
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * c + aiq * sp;
          a(i, q) = aip * msq + aiq * c;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const cplx apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj + std::conj(sp) * aqj;
          a(q, j) = std::conj(msq) * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = cplx(a(p, p).real(), 0.0);
        a(q, q) = cplx(a(q, q).real(), 0.0);

        for (std::size_t i = 0; i < n; ++i) {
          const cplx vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * c + viq * sp;
          v(i, q) = vip * msq + viq * c;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

  Spectrum out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

//==========================================================================
// Entropies, norms, fidelity
//==========================================================================

// Eigenvalues below this are treated as exact zeros in entropy sums.
inline constexpr double kEntropyEigenvalueFloor = 1e-12;

// Von Neumann entropy in bits.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const Spectrum s = hermitian_eig(rho.matrix);
  double ent = 0.0;
  for (double lam : s.eigenvalues) {
    if (lam < kEntropyEigenvalueFloor) continue;
    ent -= lam * std::log2(lam);
  }
  return ent;
}

// 1 - tr(rho^2)
inline double linear_entropy(const DensityMatrix& rho) {
  double purity = 0.0;
  const std::size_t d = rho.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) purity += std::norm(rho.matrix(i, j));
  return 1.0 - purity;
}

// Sum of |eigenvalue| over the spectrum of a Hermitian matrix.
inline double trace_norm(const ComplexMatrix& a) {
  if (!a.square()) throw UsageError("trace_norm: matrix not square");
  if (a.hermiticity_defect() > 1e-9) throw UsageError("trace_norm: matrix not Hermitian");
  const Spectrum s = hermitian_eig(a);
  double t = 0.0;
  for (double lam : s.eigenvalues) t += std::abs(lam);
  return t;
}

// <psi| rho |psi>
inline double fidelity_pure(const DensityMatrix& rho, const PureState& psi) {
  if (rho.dims != psi.dims || rho.dim() != psi.dim())
    throw UsageError("fidelity_pure: dimension mismatch");
  cplx f = 0.0;
  const std::size_t d = rho.dim();
  for (std::size_t i = 0; i < d; ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += rho.matrix(i, j) * psi.amplitudes[j];
    f += std::conj(psi.amplitudes[i]) * row;
  }
  return f.real();
}

// tr(rho * op), op given as one single-site operator per subsystem (identity
// elsewhere is expressed by passing identity). All subsystems must be qubits.
inline cplx expectation(const DensityMatrix& rho, const std::vector<ComplexMatrix>& site_ops) {
  const std::size_t n = rho.dims.size();
  if (site_ops.size() != n) throw UsageError("expectation: one operator per subsystem required");
  const std::size_t d = rho.dim();
  cplx out = 0.0;
  // P = kron(site_ops...): row i has entries P[i][j] = prod_k op[bit_k(i)][bit_k(j)].
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      cplx val = 1.0;
      std::size_t ri = i, rj = j;
      for (std::size_t k = n; k-- > 0;) {
        const std::size_t dk = rho.dims[k];
        val *= site_ops[k](ri % dk, rj % dk);
        if (val == cplx{}) break;
        ri /= dk;
        rj /= dk;
      }
      if (val != cplx{}) out += val * rho.matrix(j, i);  // tr(rho P) = sum_ij rho_ji P_ij
    }
  }
  return out;
}

}  // namespace triqnet::qmath
