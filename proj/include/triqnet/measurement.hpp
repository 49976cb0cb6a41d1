#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "triqnet/circuits.hpp"
#include "triqnet/errors.hpp"
#include "triqnet/qmath.hpp"
#include "triqnet/rng.hpp"

// Projective measurement sampling with readout assignment errors, the
// inverse-F readout correction, and full state tomography over the
// pre-rotation set {I, X/2, Y/2} with a physical (PSD, unit-trace)
// reconstruction.
//
// Axis bookkeeping: a Z measurement after the pre-rotation estimates
//   I   -> +Z        X/2 -> +Y        Y/2 -> -X
// of the input state (P0 - P1 maps to the signed expectation value).
namespace triqnet::measurement {

using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;

//==========================================================================
// Readout model and correction (assignment matrix F per qubit)
//==========================================================================

struct ReadoutModel {
  // Per-qubit (F_g, F_e): probability of reading the prepared state correctly.
  std::vector<std::pair<double, double>> fidelities;

  static ReadoutModel ideal(std::size_t n_qubits) {
    ReadoutModel m;
    m.fidelities.assign(n_qubits, {1.0, 1.0});
    return m;
  }

  std::size_t size() const { return fidelities.size(); }

  void validate() const {
    for (const auto& [fg, fe] : fidelities)
      if (fg <= 0.5 || fg > 1.0 || fe <= 0.5 || fe > 1.0)
        throw UsageError("ReadoutModel: fidelities must be in (0.5, 1]");
  }
};

// P = F^-1 Ptilde, applied qubit by qubit (the tensored correction).
inline std::vector<double> readout_correct(const std::vector<double>& p_measured,
                                           const ReadoutModel& readout) {
  const std::size_t n = readout.size();
  const std::size_t d = std::size_t{1} << n;
  if (p_measured.size() != d) throw UsageError("readout_correct: size mismatch");
  double total = 0.0;
  for (double v : p_measured) total += v;
  if (std::abs(total - 1.0) > 1e-9)
    throw UsageError("readout_correct: probabilities must sum to 1");

  std::vector<double> p = p_measured;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [fg, fe] = readout.fidelities[k];
    const double det = fg + fe - 1.0;
    if (std::abs(det) < 1e-12) throw UsageError("readout_correct: singular F matrix");
    const std::size_t bit = std::size_t{1} << (n - 1 - k);
    for (std::size_t i = 0; i < d; ++i) {
      if (i & bit) continue;
      const double p0 = p[i], p1 = p[i | bit];
      p[i] = (fe * p0 - (1.0 - fe) * p1) / det;
      p[i | bit] = (fg * p1 - (1.0 - fg) * p0) / det;
    }
  }
  return p;
}

//==========================================================================
// Sampling
//==========================================================================

// Computational-basis samples from diag(rho), pushed through the per-qubit
// assignment channel. Returns counts per outcome index.
inline std::vector<std::uint64_t> sample_z(const DensityMatrix& rho, std::uint64_t shots,
                                           const ReadoutModel& readout, Rng& rng) {
  const std::size_t n = rho.dims.size();
  const std::size_t d = rho.dim();
  if (shots < 1) throw UsageError("sample_z: need at least one shot");
  if (readout.size() != n) throw UsageError("sample_z: readout model size mismatch");
  std::vector<double> probs(d);
  for (std::size_t i = 0; i < d; ++i) probs[i] = std::max(0.0, rho.matrix(i, i).real());

  std::vector<std::uint64_t> counts(d, 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    std::size_t out = rng.pick(probs);
    for (std::size_t k = 0; k < n; ++k) {
      const auto [fg, fe] = readout.fidelities[k];
      if (fg >= 1.0 && fe >= 1.0) continue;
      const std::size_t bit = std::size_t{1} << (n - 1 - k);
      const double keep = (out & bit) ? fe : fg;
      if (!rng.bernoulli(keep)) out ^= bit;
    }
    ++counts[out];
  }
  return counts;
}

//==========================================================================
// Tomography
//==========================================================================

// Per-qubit pre-rotation: 0 = I, 1 = X/2, 2 = Y/2.
struct TomographySetting {
  std::vector<int> rotations;

  static TomographySetting from_index(std::size_t index, std::size_t n_qubits) {
    TomographySetting s;
    s.rotations.resize(n_qubits);
    for (std::size_t k = n_qubits; k-- > 0;) {
      s.rotations[k] = static_cast<int>(index % 3);
      index /= 3;
    }
    return s;
  }

  std::string name() const {
    std::string out;
    for (int r : rotations) {
      if (r < 0 || r > 2) throw UsageError("TomographySetting: rotation must be 0, 1, or 2");
      out += "IXY"[r];
    }
    return out;
  }
};

struct CountTable {
  std::size_t n_qubits = 0;
  std::uint64_t shots = 0;
  std::vector<std::vector<std::uint64_t>> counts;  // [setting 0..3^n) [outcome 0..2^n)

  std::size_t n_settings() const {
    std::size_t s = 1;
    for (std::size_t k = 0; k < n_qubits; ++k) s *= 3;
    return s;
  }

  void validate() const {
    if (counts.size() != n_settings()) throw UsageError("CountTable: incomplete setting coverage");
    for (const auto& row : counts) {
      if (row.size() != (std::size_t{1} << n_qubits))
        throw UsageError("CountTable: wrong outcome count");
      std::uint64_t total = 0;
      for (std::uint64_t c : row) total += c;
      if (total != shots) throw UsageError("CountTable: counts do not sum to shots");
    }
  }
};

inline DensityMatrix apply_pre_rotations(const DensityMatrix& rho,
                                         const TomographySetting& setting) {
  DensityMatrix out = rho;
  for (std::size_t k = 0; k < setting.rotations.size(); ++k) {
    if (setting.rotations[k] == 1)
      circuits::apply_unitary_1q(out, circuits::detail::u_xhalf(), k);
    else if (setting.rotations[k] == 2)
      circuits::apply_unitary_1q(out, circuits::detail::u_yhalf(1.0), k);
  }
  return out;
}

// All 3^n settings; one independent random substream per setting.
inline CountTable tomography_measure(const DensityMatrix& rho, std::uint64_t shots,
                                     const ReadoutModel& readout, std::uint64_t seed,
                                     std::uint64_t stream = Rng::stream_id("tomo")) {
  CountTable table;
  table.n_qubits = rho.dims.size();
  table.shots = shots;
  const std::size_t n_settings = table.n_settings();
  table.counts.resize(n_settings);
  for (std::size_t s = 0; s < n_settings; ++s) {
    const auto setting = TomographySetting::from_index(s, table.n_qubits);
    const DensityMatrix rotated = apply_pre_rotations(rho, setting);
    Rng rng(seed, stream, s);
    table.counts[s] = sample_z(rotated, shots, readout, rng);
  }
  return table;
}

//==========================================================================
// Physical projection and linear-inversion reconstruction
//==========================================================================

// Frobenius-nearest unit-trace PSD matrix: eigenvalues projected onto the
// probability simplex (zero the negatives, spread the deficit uniformly over
// the rest, iterate), eigenvectors kept.
inline DensityMatrix project_to_physical(const ComplexMatrix& rho_lin,
                                         std::vector<std::size_t> dims) {
  ComplexMatrix herm(rho_lin.rows, rho_lin.cols);
  for (std::size_t i = 0; i < rho_lin.rows; ++i)
    for (std::size_t j = 0; j < rho_lin.cols; ++j)
      herm(i, j) = 0.5 * (rho_lin(i, j) + std::conj(rho_lin(j, i)));
  const qmath::Spectrum spec = qmath::hermitian_eig(herm);
  std::vector<double> lam = spec.eigenvalues;

  double trace = 0.0;
  for (double v : lam) trace += v;
  const double correction = (1.0 - trace) / static_cast<double>(lam.size());
  for (double& v : lam) v += correction;
  for (int pass = 0; pass < static_cast<int>(lam.size()) + 1; ++pass) {
    double deficit = 0.0;
    std::size_t positive = 0;
    for (double v : lam) {
      if (v < 0.0)
        deficit += v;
      else if (v > 0.0)
        ++positive;
    }
    if (deficit == 0.0) break;
    const double share = deficit / static_cast<double>(positive);
    for (double& v : lam) {
      if (v < 0.0)
        v = 0.0;
      else if (v > 0.0)
        v += share;
    }
  }
  double total = 0.0;
  for (double v : lam) total += v;
  ComplexMatrix out(rho_lin.rows, rho_lin.cols);
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) {
      cplx v = 0.0;
      for (std::size_t k = 0; k < lam.size(); ++k)
        if (lam[k] > 0.0)
          v += (lam[k] / total) * spec.eigenvectors(i, k) * std::conj(spec.eigenvectors(j, k));
      out(i, j) = v;
    }
  return DensityMatrix(std::move(dims), std::move(out));
}

namespace detail {

// Measured Pauli per pre-rotation, as (pauli index 1=X,2=Y,3=Z, sign).
inline std::pair<int, double> measured_pauli(int rotation) {
  if (rotation == 0) return {3, 1.0};
  if (rotation == 1) return {2, 1.0};
  return {1, -1.0};
}

inline ComplexMatrix pauli_matrix(int which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 0: return ComplexMatrix::identity(2);
    case 1:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      return m;
    case 2:
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      return m;
    default:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      return m;
  }
}

}  // namespace detail

// Readout-corrects every setting, averages the compatible settings into Pauli
// expectation estimates, linearly inverts, and projects to a physical state.
inline DensityMatrix reconstruct(const CountTable& table, const ReadoutModel& readout) {
  table.validate();
  readout.validate();
  const std::size_t n = table.n_qubits;
  const std::size_t d = std::size_t{1} << n;
  if (readout.size() != n) throw UsageError("reconstruct: readout model size mismatch");

  std::size_t n_pauli = 1;
  for (std::size_t k = 0; k < n; ++k) n_pauli *= 4;
  std::vector<double> acc(n_pauli, 0.0);
  std::vector<std::uint32_t> hits(n_pauli, 0);

  const std::size_t n_settings = table.n_settings();
  for (std::size_t s = 0; s < n_settings; ++s) {
    const auto setting = TomographySetting::from_index(s, n);
    std::vector<double> p(d);
    for (std::size_t out = 0; out < d; ++out)
      p[out] = static_cast<double>(table.counts[s][out]) / static_cast<double>(table.shots);
    // Negative corrected entries pass through unclipped; clipping would bias
    // the linear inversion.
    p = readout_correct(p, readout);

    for (std::size_t mask = 1; mask < d; ++mask) {
      double corr = 0.0;
      for (std::size_t out = 0; out < d; ++out)
        corr += (__builtin_popcountll(out & mask) % 2 == 0) ? p[out] : -p[out];
      std::size_t code = 0;
      double sign = 1.0;
      for (std::size_t k = 0; k < n; ++k) {
        code *= 4;
        if (mask & (std::size_t{1} << (n - 1 - k))) {
          const auto [pauli, psign] = detail::measured_pauli(setting.rotations[k]);
          code += static_cast<std::size_t>(pauli);
          sign *= psign;
        }
      }
      acc[code] += sign * corr;
      ++hits[code];
    }
  }

  ComplexMatrix rho_lin(d, d);
  for (std::size_t i = 0; i < d; ++i) rho_lin(i, i) = 1.0 / static_cast<double>(d);
  for (std::size_t code = 1; code < n_pauli; ++code) {
    if (hits[code] == 0) continue;
    const double expectation = acc[code] / static_cast<double>(hits[code]);
    ComplexMatrix p = ComplexMatrix::identity(1);
    std::size_t c = code;
    std::vector<int> digits(n);
    for (std::size_t k = n; k-- > 0;) {
      digits[k] = static_cast<int>(c % 4);
      c /= 4;
    }
    for (std::size_t k = 0; k < n; ++k) p = qmath::kron(p, detail::pauli_matrix(digits[k]));
    p *= cplx(expectation / static_cast<double>(d));
    rho_lin += p;
  }

  return project_to_physical(rho_lin, std::vector<std::size_t>(n, 2));
}

//==========================================================================
// CSV serialization: columns setting, outcome, count
//==========================================================================

inline void write_csv(const CountTable& table, std::ostream& out) {
  table.validate();
  out << "setting,outcome,count\n";
  const std::size_t d = std::size_t{1} << table.n_qubits;
  for (std::size_t s = 0; s < table.counts.size(); ++s) {
    const std::string name = TomographySetting::from_index(s, table.n_qubits).name();
    for (std::size_t o = 0; o < d; ++o) {
      std::string bits;
      for (std::size_t k = 0; k < table.n_qubits; ++k)
        bits += (o >> (table.n_qubits - 1 - k)) & 1 ? '1' : '0';
      out << name << ',' << bits << ',' << table.counts[s][o] << '\n';
    }
  }
}

inline CountTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "setting,outcome,count")
    throw UsageError("count table CSV: bad header");
  CountTable table;
  bool sized = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw UsageError("count table CSV: bad row " + line);
    const std::string setting = line.substr(0, c1);
    const std::string outcome = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string count = line.substr(c2 + 1);
    if (!sized) {
      table.n_qubits = setting.size();
      table.counts.assign(table.n_settings(), std::vector<std::uint64_t>(
                                                  std::size_t{1} << table.n_qubits, 0));
      sized = true;
    }
    if (setting.size() != table.n_qubits || outcome.size() != table.n_qubits)
      throw UsageError("count table CSV: inconsistent qubit count");
    std::size_t s = 0, o = 0;
    for (char ch : setting) {
      const char* found = std::strchr("IXY", ch);
      if (!found) throw UsageError("count table CSV: bad setting " + setting);
      s = s * 3 + static_cast<std::size_t>(found - "IXY");
    }
    for (char ch : outcome) {
      if (ch != '0' && ch != '1') throw UsageError("count table CSV: bad outcome " + outcome);
      o = o * 2 + static_cast<std::size_t>(ch - '0');
    }
    std::uint64_t v = 0;
    const auto res = std::from_chars(count.data(), count.data() + count.size(), v);
    if (res.ec != std::errc{}) throw UsageError("count table CSV: bad count " + count);
    table.counts[s][o] = v;
  }
  if (!sized) throw UsageError("count table CSV: empty table");
  std::uint64_t total = 0;
  for (std::uint64_t c : table.counts[0]) total += c;
  table.shots = total;
  table.validate();
  return table;
}

}  // namespace triqnet::measurement
