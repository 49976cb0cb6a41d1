#pragma once

#include <optional>
#include <vector>

#include "triqnet/errors.hpp"
#include "triqnet/qmath.hpp"

// Information-theoretic metrics behind the eavesdropping analysis: Holevo
// quantities, quantum mutual information, the guaranteed-privacy bound
// S(rho_BC) - S(rho_ABC), the Devetak-Winter style bound I(X:BC) - S(rho_ABC),
// and the classical-quantum states obtained by measuring Alice's qubit.
// All entropies in bits.
namespace triqnet::privacy {

using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;

struct Ensemble {
  std::vector<std::pair<double, DensityMatrix>> items;

  void validate() const {
    if (items.empty()) throw UsageError("Ensemble: empty");
    double total = 0.0;
    for (const auto& [p, rho] : items) {
      if (p < -1e-12) throw UsageError("Ensemble: negative probability");
      if (rho.dims != items.front().second.dims)
        throw UsageError("Ensemble: mixed dimensions");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-10) throw UsageError("Ensemble: probabilities must sum to 1");
  }

  DensityMatrix average() const {
    DensityMatrix avg = items.front().second;
    for (auto& v : avg.matrix.data) v = 0.0;
    for (const auto& [p, rho] : items)
      for (std::size_t i = 0; i < avg.matrix.data.size(); ++i)
        avg.matrix.data[i] += p * rho.matrix.data[i];
    return avg;
  }
};

// chi = S(sum_i p_i rho_i) - sum_i p_i S(rho_i)
inline double holevo(const Ensemble& e) {
  e.validate();
  double chi = qmath::von_neumann_entropy(e.average());
  for (const auto& [p, rho] : e.items)
    if (p > 0.0) chi -= p * qmath::von_neumann_entropy(rho);
  return chi;
}

// I(A:B) = S(rho_A) + S(rho_B) - S(rho_AB) across the cut after the first
// `cut` subsystems.
inline double mutual_information(const DensityMatrix& rho_ab, std::size_t cut) {
  const std::size_t n = rho_ab.dims.size();
  if (cut == 0 || cut >= n) throw UsageError("mutual_information: invalid bipartition");
  std::vector<std::size_t> left, right;
  for (std::size_t k = 0; k < n; ++k) (k < cut ? left : right).push_back(k);
  const double sa = qmath::von_neumann_entropy(qmath::partial_trace(rho_ab, left));
  const double sb = qmath::von_neumann_entropy(qmath::partial_trace(rho_ab, right));
  return sa + sb - qmath::von_neumann_entropy(rho_ab);
}

// Guaranteed-privacy lower bound S(rho_BC) - S(rho_ABC); may be negative, in
// which case no key is guaranteed.
inline double privacy_bound(const DensityMatrix& rho_abc) {
  if (rho_abc.dims != std::vector<std::size_t>{2, 2, 2})
    throw UsageError("privacy_bound: expected a three-qubit state");
  const DensityMatrix rho_bc = qmath::partial_trace(rho_abc, {1, 2});
  return qmath::von_neumann_entropy(rho_bc) - qmath::von_neumann_entropy(rho_abc);
}

//==========================================================================
// cq states from measuring Alice
//==========================================================================

enum class MeasureBasis { X, Y };

struct CqEntry {
  double probability = 0.0;
  std::optional<DensityMatrix> conditional;  // omitted when probability ~ 0
};

struct CqState {
  MeasureBasis basis = MeasureBasis::X;
  std::array<CqEntry, 2> entries;  // Alice's outcome 0 (+ eigenstate) and 1

  void validate() const {
    double total = 0.0;
    for (const auto& e : entries) {
      if (e.probability < -1e-12) throw UsageError("CqState: negative probability");
      total += e.probability;
    }
    if (std::abs(total - 1.0) > 1e-10) throw UsageError("CqState: probabilities must sum to 1");
  }

  // sum_x P(x) |x><x| (x) rho_BC|x as a density matrix with dims {2, 2, 2}.
  DensityMatrix assemble() const {
    ComplexMatrix m(8, 8);
    for (int x = 0; x < 2; ++x) {
      if (!entries[x].conditional) continue;
      const ComplexMatrix& c = entries[x].conditional->matrix;
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          m((x << 2) | i, (x << 2) | j) = entries[x].probability * c(i, j);
    }
    return DensityMatrix({2, 2, 2}, std::move(m));
  }
};

// Projective +-X or +-Y measurement of qubit A (index 0); outcome 0 is the +1
// eigenstate. Conditionals with probability below 1e-12 are omitted.
inline CqState cq_from_measurement(const DensityMatrix& rho_abc, MeasureBasis basis) {
  if (rho_abc.dims != std::vector<std::size_t>{2, 2, 2})
    throw UsageError("cq_from_measurement: expected a three-qubit state");
  CqState cq;
  cq.basis = basis;
  // |pm> = (|g> + s |e>)/sqrt(2) with s = +-1 (X) or +-i (Y).
  for (int x = 0; x < 2; ++x) {
    const cplx s = basis == MeasureBasis::X ? cplx(x == 0 ? 1.0 : -1.0, 0.0)
                                            : cplx(0.0, x == 0 ? 1.0 : -1.0);
    ComplexMatrix block(4, 4);
    double p = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j)
        block(i, j) = 0.5 * (rho_abc.matrix(i, j) + std::conj(s) * rho_abc.matrix(4 + i, j) +
                             s * rho_abc.matrix(i, 4 + j) +
                             std::conj(s) * s * rho_abc.matrix(4 + i, 4 + j));
      p += block(i, i).real();
    }
    cq.entries[x].probability = p;
    if (p >= 1e-12) {
      for (auto& v : block.data) v /= p;
      cq.entries[x].conditional = DensityMatrix({2, 2}, std::move(block));
    }
  }
  return cq;
}

// Devetak-Winter style key bound K >= I(X:BC) - S(rho_ABC), with the mutual
// information evaluated on the assembled cq state. May be negative (vacuous).
inline double dw_bound(const CqState& cq, const DensityMatrix& rho_abc) {
  cq.validate();
  return mutual_information(cq.assemble(), 1) - qmath::von_neumann_entropy(rho_abc);
}

inline bool bound_is_vacuous(double bound_bits) { return bound_bits <= 0.0; }

//==========================================================================
// Holevo = accessible-information consistency check
//==========================================================================

// Ensemble of pure bipartite (B x E) states with classical label x. Computes
// chi_B on the reduced-B ensemble and I(X:B) on the assembled cq state; the
// two are equal analytically, so the residual |I - chi| is a self-check.
struct PureBipartiteEnsemble {
  std::vector<std::pair<double, qmath::PureState>> items;  // dims = {dB, dE}

  void validate() const {
    if (items.empty()) throw UsageError("PureBipartiteEnsemble: empty");
    double total = 0.0;
    for (const auto& [p, psi] : items) {
      if (psi.dims.size() != 2) throw UsageError("PureBipartiteEnsemble: states must be bipartite");
      if (psi.dims != items.front().second.dims)
        throw UsageError("PureBipartiteEnsemble: mixed dimensions");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-10)
      throw UsageError("PureBipartiteEnsemble: probabilities must sum to 1");
  }
};

inline double holevo_equals_mutual_info_check(const PureBipartiteEnsemble& e) {
  e.validate();
  const std::size_t n_items = e.items.size();
  const std::size_t db = e.items.front().second.dims[0];

  Ensemble reduced;
  for (const auto& [p, psi] : e.items)
    reduced.items.push_back(
        {p, qmath::partial_trace(DensityMatrix::from_pure(psi), {0})});
  const double chi = holevo(reduced);

  // cq state: classical register of dimension n_items tensored with B.
  ComplexMatrix m(n_items * db, n_items * db);
  for (std::size_t x = 0; x < n_items; ++x) {
    const auto& [p, rho_b] = reduced.items[x];
    for (std::size_t i = 0; i < db; ++i)
      for (std::size_t j = 0; j < db; ++j)
        m(x * db + i, x * db + j) = p * rho_b.matrix(i, j);
  }
  const DensityMatrix cq({n_items, db}, std::move(m));
  const double mi = mutual_information(cq, 1);
  return std::abs(mi - chi);
}

}  // namespace triqnet::privacy
