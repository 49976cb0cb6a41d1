#include "triqnet/measurement.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support/test_util.hpp"
#include "triqnet/protocols.hpp"

using namespace triqnet;
using namespace triqnet::measurement;
using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;
using qmath::PureState;

namespace {

// Table S1 readout fidelities for [A2, C1, B2].
ReadoutModel table_readout() {
  ReadoutModel m;
  m.fidelities = {{0.97, 0.93}, {0.99, 0.94}, {0.98, 0.90}};
  return m;
}

DensityMatrix ghz3() { return DensityMatrix::from_pure(testutil::ghz(3)); }

}  // namespace

TEST(SampleZ, GroundStateIdealReadout) {
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2, 2}, 0));
  Rng rng(1, 2, 3);
  const auto counts = sample_z(rho, 1000, ReadoutModel::ideal(2), rng);
  EXPECT_EQ(counts[0], 1000u);
}

TEST(SampleZ, AssignmentErrorRate) {
  // |e> read as e with probability F_e = 0.93 (Table S1, qubit A1).
  ReadoutModel m;
  m.fidelities = {{0.98, 0.93}};
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2}, 1));
  Rng rng(7, 0, 0);
  const std::uint64_t shots = 1000000;
  const auto counts = sample_z(rho, shots, m, rng);
  EXPECT_NEAR(static_cast<double>(counts[1]) / shots, 0.93, 0.001);
}

TEST(SampleZ, MixedStateThroughChannel) {
  // Marginal distribution is the F-channel image of (1/2, 1/2).
  ReadoutModel m;
  m.fidelities = {{0.9, 0.8}};
  const DensityMatrix rho = DensityMatrix::maximally_mixed({2});
  Rng rng(11, 0, 0);
  const std::uint64_t shots = 400000;
  const auto counts = sample_z(rho, shots, m, rng);
  const double expected_zero = 0.5 * 0.9 + 0.5 * (1.0 - 0.8);
  EXPECT_NEAR(static_cast<double>(counts[0]) / shots, expected_zero, 0.003);
}

TEST(ReadoutCorrect, IdentityReadoutIsNoop) {
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  const auto q = readout_correct(p, ReadoutModel::ideal(2));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(q[i], p[i], 1e-15);
}

// Single qubit with Table S1 column C1 (F_g = 0.99, F_e = 0.94): a true
// P_e = 0.5 is measured as 0.475 and corrected back exactly.
TEST(ReadoutCorrect, InvertsChannelExactly) {
  ReadoutModel m;
  m.fidelities = {{0.99, 0.94}};
  const std::vector<double> truth = {0.5, 0.5};
  const std::vector<double> measured = {0.99 * 0.5 + 0.06 * 0.5, 0.01 * 0.5 + 0.94 * 0.5};
  EXPECT_NEAR(measured[1], 0.475, 1e-12);
  const auto corrected = readout_correct(measured, m);
  EXPECT_NEAR(corrected[0], 0.5, 1e-12);
  EXPECT_NEAR(corrected[1], 0.5, 1e-12);
}

TEST(ReadoutCorrect, TwoQubitsEqualsKronOfSingles) {
  const ReadoutModel two = [] {
    ReadoutModel m;
    m.fidelities = {{0.97, 0.93}, {0.99, 0.94}};
    return m;
  }();
  // Apply the forward channel F1 (x) F2 to an arbitrary distribution, then
  // correct; the composition must be the identity.
  const std::vector<double> truth = {0.05, 0.25, 0.3, 0.4};
  std::vector<double> measured(4, 0.0);
  auto f = [](double fg, double fe, int out, int in) {
    return in == 0 ? (out == 0 ? fg : 1.0 - fg) : (out == 1 ? fe : 1.0 - fe);
  };
  for (int o = 0; o < 4; ++o)
    for (int i = 0; i < 4; ++i)
      measured[o] += f(0.97, 0.93, o >> 1, i >> 1) * f(0.99, 0.94, o & 1, i & 1) * truth[i];
  const auto corrected = readout_correct(measured, two);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(corrected[i], truth[i], 1e-12);
}

TEST(ReadoutCorrect, SingularThrows) {
  ReadoutModel m;
  m.fidelities = {{0.6, 0.4}};  // F_g + F_e = 1
  EXPECT_THROW(readout_correct({0.5, 0.5}, m), UsageError);
}

TEST(Tomography, SettingEnumeration) {
  EXPECT_EQ(TomographySetting::from_index(0, 2).name(), "II");
  EXPECT_EQ(TomographySetting::from_index(5, 2).name(), "XY");
  CountTable t;
  t.n_qubits = 2;
  EXPECT_EQ(t.n_settings(), 9u);
}

TEST(Tomography, SingleQubitGroundState) {
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2}, 0));
  const CountTable table = tomography_measure(rho, 20000, ReadoutModel::ideal(1), 42);
  table.validate();
  // Setting I: all zeros. Setting X/2: roughly half/half.
  EXPECT_EQ(table.counts[0][0], 20000u);
  EXPECT_NEAR(static_cast<double>(table.counts[1][0]) / 20000.0, 0.5, 0.02);
}

// GHZ parity statistics under the all-(Y/2) setting: each qubit reads -X, so
// the parity estimator returns (-1)^3 <XXX> = -1, i.e. all outcomes have odd
// bit parity for the ideal GHZ state.
TEST(Tomography, GhzParityConsistentWithXXX) {
  const CountTable table = tomography_measure(ghz3(), 50000, ReadoutModel::ideal(3), 7);
  const std::size_t yyy = 26;  // setting "YYY": digits (2,2,2) in base 3
  double parity_sum = 0.0;
  for (std::size_t out = 0; out < 8; ++out) {
    const double frac = static_cast<double>(table.counts[yyy][out]) / 50000.0;
    parity_sum += (__builtin_popcountll(out) % 2 == 0 ? 1.0 : -1.0) * frac;
  }
  const double xxx = -parity_sum;  // sign flip per measured-Pauli table
  EXPECT_NEAR(xxx, 1.0, 1e-9);     // ideal sampling has zero variance here
}

TEST(Reconstruct, ExactProbabilitiesRecoverGhz) {
  // Infinite-shot limit emulated by writing exact probabilities as counts.
  const std::uint64_t shots = 1000000;
  CountTable table;
  table.n_qubits = 3;
  table.shots = shots;
  table.counts.resize(27);
  for (std::size_t s = 0; s < 27; ++s) {
    const auto setting = TomographySetting::from_index(s, 3);
    const DensityMatrix rotated = apply_pre_rotations(ghz3(), setting);
    table.counts[s].resize(8);
    std::uint64_t assigned = 0;
    for (std::size_t o = 0; o < 8; ++o) {
      const double p = std::max(0.0, rotated.matrix(o, o).real());
      table.counts[s][o] = static_cast<std::uint64_t>(std::llround(p * shots));
      assigned += table.counts[s][o];
    }
    table.counts[s][0] += shots - assigned;  // rounding dust
  }
  const DensityMatrix rho = reconstruct(table, ReadoutModel::ideal(3));
  EXPECT_GE(qmath::fidelity_pure(rho, testutil::ghz(3)), 0.9999);
}

TEST(Reconstruct, FiniteShotsWithReadoutErrors) {
  const CountTable table = tomography_measure(ghz3(), 10000, table_readout(), 2024);
  const DensityMatrix rho = reconstruct(table, table_readout());
  rho.validate();
  EXPECT_GE(qmath::fidelity_pure(rho, testutil::ghz(3)), 0.99);
}

TEST(Reconstruct, ErrorDecreasesWithShots) {
  // Median infidelity over 10 seeds must not increase with the shot budget.
  std::vector<double> medians;
  for (std::uint64_t shots : {100u, 1000u, 10000u}) {
    std::vector<double> infid;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const CountTable t = tomography_measure(ghz3(), shots, table_readout(), 100 + seed);
      infid.push_back(1.0 - qmath::fidelity_pure(reconstruct(t, table_readout()), testutil::ghz(3)));
    }
    std::sort(infid.begin(), infid.end());
    medians.push_back(0.5 * (infid[4] + infid[5]));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(Reconstruct, AdversarialExpectationsStayPhysical) {
  // All single-qubit <Z> = +1 while <ZZ> = -1 is not a quantum state; the
  // projection must still return a PSD unit-trace matrix.
  ComplexMatrix rho_lin(4, 4);
  const auto z = [](int b) { return b == 0 ? 1.0 : -1.0; };
  for (int i = 0; i < 4; ++i) {
    const int b0 = i >> 1, b1 = i & 1;
    rho_lin(i, i) = 0.25 * (1.0 + z(b0) + z(b1) - z(b0) * z(b1));
  }
  const DensityMatrix rho = project_to_physical(rho_lin, {2, 2});
  rho.validate();
  const auto spec = qmath::hermitian_eig(rho.matrix);
  for (double lam : spec.eigenvalues) EXPECT_GE(lam, -1e-12);
  EXPECT_NEAR(rho.matrix.trace().real(), 1.0, 1e-12);
}

TEST(Reconstruct, IncompleteCoverageThrows) {
  CountTable t;
  t.n_qubits = 2;
  t.shots = 10;
  t.counts.resize(5);
  EXPECT_THROW(reconstruct(t, ReadoutModel::ideal(2)), UsageError);
}

TEST(Csv, RoundTrip) {
  const CountTable table = tomography_measure(ghz3(), 500, table_readout(), 5);
  std::ostringstream out;
  write_csv(table, out);
  std::istringstream in(out.str());
  const CountTable back = read_csv(in);
  EXPECT_EQ(back.n_qubits, table.n_qubits);
  EXPECT_EQ(back.shots, table.shots);
  EXPECT_EQ(back.counts, table.counts);
}

TEST(Csv, RejectsBadHeader) {
  std::istringstream in("nope\n");
  EXPECT_THROW(read_csv(in), UsageError);
}

// Pauli expectations of a reconstructed state track the readout-corrected
// empirical expectations within statistical error.
TEST(Reconstruct, ExpectationsMatchEmpirical) {
  circuits::TierConfig cfg;
  cfg.tier = circuits::Tier::NoisyCircuit;
  const DensityMatrix truth = circuits::run_ghz3(cfg);
  const std::uint64_t shots = 20000;
  const CountTable table = tomography_measure(truth, shots, table_readout(), 31);
  const DensityMatrix rho = reconstruct(table, table_readout());
  const auto X = testutil::pauli_x(), Y = testutil::pauli_y(), Z = testutil::pauli_z(),
             I = testutil::pauli_i();
  int outliers = 0, total = 0;
  for (const auto& ops : std::vector<std::vector<ComplexMatrix>>{
           {Z, Z, I}, {Z, I, Z}, {X, X, X}, {X, Y, Y}, {Y, X, Y}, {Z, I, I}, {I, Z, I}}) {
    const double got = qmath::expectation(rho, ops).real();
    const double want = qmath::expectation(truth, ops).real();
    ++total;
    if (std::abs(got - want) > 3.0 / std::sqrt(static_cast<double>(shots)) * 2.0) ++outliers;
  }
  EXPECT_LE(outliers, total / 5);
}
