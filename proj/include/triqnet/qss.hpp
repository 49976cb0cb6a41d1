#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "triqnet/circuits.hpp"
#include "triqnet/errors.hpp"
#include "triqnet/measurement.hpp"
#include "triqnet/parallel.hpp"
#include "triqnet/protocols.hpp"
#include "triqnet/qmath.hpp"
#include "triqnet/rng.hpp"

// The GHZ-based quantum-secret-sharing engine. Parties are Alice (A2),
// Bob (B2) and Charlie (C1); the shared state is ordered [A2, C1, B2].
// Basis-to-rotation map: x-basis applies R_{phi=pi/2}(pi/2) (outcome 0 reads
// |x+>), y-basis applies R_{phi=0}(pi/2) (outcome 0 reads |y->). A round is
// sifted iff the number of y-basis parties is even; Bob and Charlie decode
// Alice's bit as b xor c for the all-x combination and b xor c xor 1 when two
// parties measured y, per the GHZ stabilizer signs.
namespace triqnet::qss {

using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;

enum class Basis : std::uint8_t { X = 0, Y = 1 };

// Party order in records: [Alice, Bob, Charlie].
struct RoundRecord {
  std::uint64_t index = 0;
  std::array<Basis, 3> basis{};
  std::array<std::uint8_t, 3> bit{};
  bool kept = false;
};

struct KeyReport {
  std::uint64_t rounds_total = 0;
  std::uint64_t rounds_sifted = 0;
  std::uint64_t errors_sifted = 0;
  double qber = 0.0;                 // errors / sifted rounds
  double raw_error_fraction = 0.0;   // errors / total rounds
  std::array<double, 8> allx_probs{};  // outcome table (a,b,c bits) of the all-X subset
  std::uint64_t allx_rounds = 0;
  bool estimation_valid = false;     // false iff no rounds were sifted
  double threshold = 0.25;
  bool alarm = false;
};

struct AttackConfig {
  double theta_e = 0.0;
  bool enabled = false;

  void validate() const {
    if (theta_e < 0.0 || theta_e > M_PI)
      throw UsageError("AttackConfig: theta_E must be in [0, pi]");
  }
};

// Source of the per-round three-qubit state.
struct StateSource {
  DensityMatrix rho;  // [A2, C1, B2]

  static StateSource ideal_ghz() {
    std::vector<cplx> amps(8);
    amps[0] = 1.0 / std::sqrt(2.0);
    amps[7] = 1.0 / std::sqrt(2.0);
    return {DensityMatrix::from_pure(qmath::PureState({2, 2, 2}, std::move(amps)))};
  }

  static StateSource attack(double theta_e) {
    AttackConfig cfg{theta_e, true};
    cfg.validate();
    return {circuits::attack_rho_abc(theta_e)};
  }

  static StateSource circuit_noisy(const circuits::TierConfig& cfg = [] {
    circuits::TierConfig c;
    c.tier = circuits::Tier::NoisyCircuit;
    return c;
  }()) {
    return {circuits::run_ghz3(cfg)};
  }

  static StateSource explicit_state(DensityMatrix rho) {
    if (rho.dims != std::vector<std::size_t>{2, 2, 2})
      throw UsageError("StateSource: expected a three-qubit state");
    return {std::move(rho)};
  }
};

namespace detail {

// State qubit index per party: Alice = 0, Bob = 2, Charlie = 1.
inline constexpr std::size_t kPartyQubit[3] = {0, 2, 1};

inline double rotation_phi(Basis b) { return b == Basis::X ? M_PI / 2.0 : 0.0; }

// Z-basis outcome distribution after the per-party basis rotations. Outcome
// index is the state bit order [A2, C1, B2].
inline std::array<double, 8> combo_distribution(const DensityMatrix& rho,
                                                const std::array<Basis, 3>& basis) {
  DensityMatrix rotated = rho;
  for (int party = 0; party < 3; ++party)
    circuits::apply_unitary_1q(rotated,
                               circuits::detail::u_rphi_half(rotation_phi(basis[party])),
                               kPartyQubit[party]);
  std::array<double, 8> p{};
  for (std::size_t i = 0; i < 8; ++i) p[i] = std::max(0.0, rotated.matrix(i, i).real());
  return p;
}

inline bool is_kept(const std::array<Basis, 3>& basis) {
  const int ys = (basis[0] == Basis::Y) + (basis[1] == Basis::Y) + (basis[2] == Basis::Y);
  return ys % 2 == 0;
}

// Alice's decoded bit from Bob and Charlie: parity for XXX, flipped parity for
// the two-Y combinations.
inline std::uint8_t decode(const std::array<Basis, 3>& basis, std::uint8_t b, std::uint8_t c) {
  const bool all_x = basis[0] == Basis::X && basis[1] == Basis::X && basis[2] == Basis::X;
  return static_cast<std::uint8_t>((b ^ c ^ (all_x ? 0 : 1)) & 1);
}

inline double error_probability(const std::array<double, 8>& dist,
                                const std::array<Basis, 3>& basis) {
  double err = 0.0, total = 0.0;
  for (std::size_t out = 0; out < 8; ++out) {
    const std::uint8_t a = (out >> 2) & 1;  // qubit 0 = Alice
    const std::uint8_t c = (out >> 1) & 1;  // qubit 1 = Charlie
    const std::uint8_t b = out & 1;         // qubit 2 = Bob
    total += dist[out];
    if (decode(basis, b, c) != a) err += dist[out];
  }
  return total > 0.0 ? err / total : 0.0;
}

}  // namespace detail

//==========================================================================
// Round generation and decoding
//==========================================================================

// Samples n rounds. Substream index = round index, so results are independent
// of worker count and batch boundaries.
inline std::vector<RoundRecord> run_rounds(std::uint64_t n, const StateSource& source,
                                           const measurement::ReadoutModel& readout,
                                           std::uint64_t seed,
                                           std::uint64_t stream = Rng::stream_id("qss"),
                                           int max_workers = 0) {
  if (n < 1) throw UsageError("run_rounds: need at least one round");
  if (readout.size() != 3) throw UsageError("run_rounds: readout model must cover three qubits");
  source.rho.validate();

  // Outcome distributions for the eight basis combinations, precomputed.
  std::array<std::array<double, 8>, 8> dist;
  std::array<std::array<Basis, 3>, 8> combos;
  for (int code = 0; code < 8; ++code) {
    combos[code] = {static_cast<Basis>((code >> 2) & 1), static_cast<Basis>((code >> 1) & 1),
                    static_cast<Basis>(code & 1)};
    dist[code] = detail::combo_distribution(source.rho, combos[code]);
  }

  std::vector<RoundRecord> records(n);
  parallel::parallel_for(n, max_workers, [&](std::uint64_t r) {
    Rng rng(seed, stream, r);
    const int code = static_cast<int>(rng.next_u32() & 7);
    const auto& basis = combos[code];
    std::vector<double> weights(dist[code].begin(), dist[code].end());
    std::size_t out = rng.pick(weights);
    // Readout assignment errors, applied per state qubit in fixed order.
    for (std::size_t k = 0; k < 3; ++k) {
      const auto [fg, fe] = readout.fidelities[k];
      if (fg >= 1.0 && fe >= 1.0) continue;
      const std::size_t bit = std::size_t{1} << (2 - k);
      const double keep = (out & bit) ? fe : fg;
      if (!rng.bernoulli(keep)) out ^= bit;
    }
    RoundRecord rec;
    rec.index = r;
    rec.basis = basis;
    rec.bit = {static_cast<std::uint8_t>((out >> 2) & 1), static_cast<std::uint8_t>(out & 1),
               static_cast<std::uint8_t>((out >> 1) & 1)};  // [Alice, Bob, Charlie]
    rec.kept = detail::is_kept(basis);
    records[r] = rec;
  });
  return records;
}

inline KeyReport sift_and_decode(const std::vector<RoundRecord>& records, double threshold = 0.25) {
  if (records.empty()) throw UsageError("sift_and_decode: no records");
  KeyReport report;
  report.threshold = threshold;
  report.rounds_total = records.size();
  std::array<std::uint64_t, 8> allx_counts{};
  for (const RoundRecord& r : records) {
    if (r.basis[0] == Basis::X && r.basis[1] == Basis::X && r.basis[2] == Basis::X) {
      ++report.allx_rounds;
      ++allx_counts[(r.bit[0] << 2) | (r.bit[1] << 1) | r.bit[2]];
    }
    if (!r.kept) continue;
    ++report.rounds_sifted;
    if (detail::decode(r.basis, r.bit[1], r.bit[2]) != r.bit[0]) ++report.errors_sifted;
  }
  if (report.rounds_sifted > 0) {
    report.estimation_valid = true;
    report.qber = static_cast<double>(report.errors_sifted) /
                  static_cast<double>(report.rounds_sifted);
  }
  report.raw_error_fraction = static_cast<double>(report.errors_sifted) /
                              static_cast<double>(report.rounds_total);
  for (std::size_t o = 0; o < 8; ++o)
    report.allx_probs[o] = report.allx_rounds
                               ? static_cast<double>(allx_counts[o]) /
                                     static_cast<double>(report.allx_rounds)
                               : 0.0;
  report.alarm = report.estimation_valid && report.qber > threshold;
  return report;
}

inline bool detect(const KeyReport& report) { return report.qber > report.threshold; }

// Exact error rates computed from the density matrix (the sampling oracle):
// sifted QBER averaged over the four kept combinations and the raw per-round
// error fraction (kept errors / all rounds).
struct AnalyticRates {
  double qber_sifted = 0.0;
  double raw_error_fraction = 0.0;
};

inline AnalyticRates analytic_error_rates(const DensityMatrix& rho_abc) {
  AnalyticRates rates;
  int kept = 0;
  for (int code = 0; code < 8; ++code) {
    const std::array<Basis, 3> basis = {static_cast<Basis>((code >> 2) & 1),
                                        static_cast<Basis>((code >> 1) & 1),
                                        static_cast<Basis>(code & 1)};
    if (!detail::is_kept(basis)) continue;
    ++kept;
    rates.qber_sifted += detail::error_probability(detail::combo_distribution(rho_abc, basis),
                                                   basis);
  }
  rates.qber_sifted /= kept;
  rates.raw_error_fraction = rates.qber_sifted * kept / 8.0;
  return rates;
}

//==========================================================================
// phi_A sweep (Fig. 3e / 4b-c)
//==========================================================================

struct PhiSweepPoint {
  double phi_a = 0.0;
  double blue_sum = 0.0;  // P(000)+P(011)+P(101)+P(110)
  double red_sum = 0.0;
};

// Bob and Charlie fixed to the x basis, Alice rotated by phi_A; per point the
// blue/red outcome sums are estimated from `rounds` samples.
inline std::vector<PhiSweepPoint> phi_sweep(const std::vector<double>& phi_grid,
                                            const StateSource& source, std::uint64_t rounds,
                                            std::uint64_t seed,
                                            std::uint64_t stream = Rng::stream_id("qss-phi"),
                                            int max_workers = 0) {
  if (phi_grid.empty()) throw UsageError("phi_sweep: empty grid");
  if (rounds < 1) throw UsageError("phi_sweep: need at least one round per point");
  source.rho.validate();
  std::vector<PhiSweepPoint> table(phi_grid.size());
  parallel::parallel_for(phi_grid.size(), max_workers, [&](std::uint64_t pi) {
    DensityMatrix rotated = source.rho;
    circuits::apply_unitary_1q(rotated, circuits::detail::u_rphi_half(phi_grid[pi]), 0);
    circuits::apply_unitary_1q(rotated, circuits::detail::u_rphi_half(M_PI / 2.0), 1);
    circuits::apply_unitary_1q(rotated, circuits::detail::u_rphi_half(M_PI / 2.0), 2);
    std::vector<double> probs(8);
    for (std::size_t i = 0; i < 8; ++i) probs[i] = std::max(0.0, rotated.matrix(i, i).real());
    Rng rng(seed, stream, pi);
    std::uint64_t blue = 0;
    for (std::uint64_t r = 0; r < rounds; ++r) {
      const std::size_t out = rng.pick(probs);
      if (__builtin_popcountll(out) % 2 == 0) ++blue;
    }
    table[pi].phi_a = phi_grid[pi];
    table[pi].blue_sum = static_cast<double>(blue) / static_cast<double>(rounds);
    table[pi].red_sum = 1.0 - table[pi].blue_sum;
  });
  return table;
}

//==========================================================================
// Cheater analysis and the Mermin witness
//==========================================================================

enum class Cheater { Bob, Charlie };

// Optimal probability that the cheating receiver alone guesses Alice's x-basis
// bit: 1/2 + 1/2 || p0 rho0 - p1 rho1 ||_tr over the cheater's conditionals.
inline double guessing_probability(const DensityMatrix& rho_abc, Cheater who) {
  if (rho_abc.dims != std::vector<std::size_t>{2, 2, 2})
    throw UsageError("guessing_probability: expected a three-qubit state");
  // Project Alice (qubit 0) onto |x+->.
  std::array<ComplexMatrix, 2> cond;
  std::array<double, 2> prob{};
  for (int outcome = 0; outcome < 2; ++outcome) {
    const double sign = outcome == 0 ? 1.0 : -1.0;
    // <x_pm| rho |x_pm> block on qubits [C1, B2].
    ComplexMatrix m(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        m(i, j) = 0.5 * (rho_abc.matrix(i, j) + rho_abc.matrix(4 + i, 4 + j) +
                         sign * (rho_abc.matrix(i, 4 + j) + rho_abc.matrix(4 + i, j)));
    double p = 0.0;
    for (std::size_t i = 0; i < 4; ++i) p += m(i, i).real();
    prob[outcome] = p;
    // Trace out the honest receiver: Charlie is row-major bit 1, Bob bit 0.
    ComplexMatrix cheater(2, 2);
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        cplx v = 0.0;
        for (std::size_t h = 0; h < 2; ++h)
          v += who == Cheater::Bob ? m((h << 1) | a, (h << 1) | b)
                                   : m((a << 1) | h, (b << 1) | h);
        cheater(a, b) = v;
      }
    cond[outcome] = std::move(cheater);
  }
  ComplexMatrix diff = cond[0];
  diff -= cond[1];
  return 0.5 + 0.5 * qmath::trace_norm(diff);
}

//==========================================================================
// Serialization: JSON-lines round logs and a JSON key report
//==========================================================================

inline std::string basis_name(Basis b) { return b == Basis::X ? "x" : "y"; }

inline std::string round_to_json(const RoundRecord& r) {
  // Fixed field order; parties ordered [alice, bob, charlie].
  std::string out = "{\"round\":" + std::to_string(r.index) + ",\"basis\":[";
  for (int p = 0; p < 3; ++p) out += std::string(p ? "," : "") + "\"" + basis_name(r.basis[p]) + "\"";
  out += "],\"bits\":[";
  for (int p = 0; p < 3; ++p) out += std::string(p ? "," : "") + std::to_string(int(r.bit[p]));
  out += std::string("],\"kept\":") + (r.kept ? "true" : "false") + "}";
  return out;
}

inline std::string rounds_to_jsonl(const std::vector<RoundRecord>& records) {
  std::string out;
  for (const RoundRecord& r : records) {
    out += round_to_json(r);
    out += '\n';
  }
  return out;
}

// <XXX> - <XYY> - <YXY> - <YYX> with the X/Y pattern over parties
// (Alice, Bob, Charlie); state order is [A2(=Alice), C1(=Charlie), B2(=Bob)].
inline double mermin_value(const DensityMatrix& rho_abc) {
  if (rho_abc.dims != std::vector<std::size_t>{2, 2, 2})
    throw UsageError("mermin_value: expected a three-qubit state");
  ComplexMatrix x(2, 2), y(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  y(0, 1) = cplx(0.0, -1.0);
  y(1, 0) = cplx(0.0, 1.0);
  // Site operators listed in state order [Alice, Charlie, Bob].
  auto ev = [&](const ComplexMatrix& a, const ComplexMatrix& c, const ComplexMatrix& b) {
    return qmath::expectation(rho_abc, {a, c, b}).real();
  };
  return ev(x, x, x) - ev(x, y, y) - ev(y, y, x) - ev(y, x, y);
}

}  // namespace triqnet::qss
