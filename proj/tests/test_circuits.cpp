#include "triqnet/circuits.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/test_util.hpp"
#include "triqnet/protocols.hpp"

using namespace triqnet;
using namespace triqnet::circuits;
using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;
using qmath::PureState;

namespace {

PureState make_state(std::vector<std::size_t> dims, std::vector<std::pair<std::size_t, cplx>> amps) {
  std::vector<cplx> a(qmath::product_dim(dims));
  for (const auto& [idx, v] : amps) a[idx] = v;
  PureState psi(std::move(dims), std::move(a));
  psi.normalize();
  return psi;
}

const double rt2 = std::sqrt(2.0);

// Eq. S3: 1/2 (|ggee> - |geeg> - |egge> + |eegg>) on [C1, C2, A2, B2].
PureState eq_s3() {
  return make_state({2, 2, 2, 2}, {{3, 0.5}, {6, -0.5}, {9, -0.5}, {12, 0.5}});
}

// Eq. S4: 1/2 (|ggee> - |geeg> - |eege> + |eggg>).
PureState eq_s4() {
  return make_state({2, 2, 2, 2}, {{3, 0.5}, {6, -0.5}, {13, -0.5}, {8, 0.5}});
}

// Eqs. S5-S8 conditional outputs on [A2, B2].
PureState psi_mn(int m, int n) {
  const cplx i{0.0, 1.0};
  if (m == 0 && n == 0) return make_state({2, 2}, {{0, 1.0 / rt2}, {3, -i / rt2}});
  if (m == 0 && n == 1) return make_state({2, 2}, {{1, 1.0 / rt2}, {2, -i / rt2}});
  if (m == 1 && n == 0) return make_state({2, 2}, {{0, 1.0 / rt2}, {3, i / rt2}});
  return make_state({2, 2}, {{1, 1.0 / rt2}, {2, i / rt2}});
}

double best_bell_fidelity(const DensityMatrix& rho) {
  double best = 0.0;
  const cplx one{1.0, 0.0};
  for (const auto& amps : std::vector<std::vector<std::pair<std::size_t, cplx>>>{
           {{0, one}, {3, one}}, {{0, one}, {3, -one}}, {{1, one}, {2, one}}, {{1, one}, {2, -one}}})
    best = std::max(best, qmath::fidelity_pure(rho, make_state({2, 2}, amps)));
  return best;
}

DensityMatrix ideal_ghz3_state() { return DensityMatrix::from_pure(testutil::ghz(3)); }

}  // namespace

TEST(Gates, PinnedConventions) {
  const std::vector<std::string> q = {"q"};
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2}, 0));
  // X |g> = |e>
  DensityMatrix after = apply_gate(rho, Gate{GateKind::X, {"q"}}, q);
  EXPECT_NEAR(after.matrix(1, 1).real(), 1.0, 1e-12);
  // X/2 |g> = (|g> - i|e>)/sqrt(2)
  after = apply_gate(rho, Gate{GateKind::XHalf, {"q"}}, q);
  EXPECT_NEAR(std::abs(after.matrix(0, 0) - cplx(0.5)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(after.matrix(1, 0) - cplx(0.0, -0.5)), 0.0, 1e-12);  // (-i/rt2)(1/rt2)*
  // Y/2 |g> = (|g> + |e>)/sqrt(2), -Y/2 |g> = (|g> - |e>)/sqrt(2)
  after = apply_gate(rho, Gate{GateKind::YHalf, {"q"}}, q);
  EXPECT_NEAR(after.matrix(1, 0).real(), 0.5, 1e-12);
  after = apply_gate(rho, Gate{GateKind::MinusYHalf, {"q"}}, q);
  EXPECT_NEAR(after.matrix(1, 0).real(), -0.5, 1e-12);
  // R_Y(theta)|g> = cos(theta/2)|g> - sin(theta/2)|e>
  after = apply_gate(rho, Gate{GateKind::RY, {"q"}, 1.1}, q);
  EXPECT_NEAR(after.matrix(1, 0).real(), -std::sin(0.55) * std::cos(0.55), 1e-12);
}

TEST(Gates, CzPhase) {
  const std::vector<std::string> q = {"a", "b"};
  DensityMatrix rho = DensityMatrix::from_pure(
      make_state({2, 2}, {{0, 1.0 / rt2}, {3, 1.0 / rt2}}));  // (|gg>+|ee>)/rt2
  apply_gate(rho, Gate{GateKind::CZ, {"a", "b"}}, q);
  // CZ flips the sign of |ee>: coherence <gg|rho|ee> becomes -1/2.
  EXPECT_NEAR(rho.matrix(0, 3).real(), -0.5, 1e-12);
}

TEST(Gates, RPhiReadsExpectedAxes) {
  const std::vector<std::string> q = {"q"};
  // phi = pi/2 maps |x+> to |g| (reads +X); phi = 0 maps |y-> to |g>.
  DensityMatrix xp = DensityMatrix::from_pure(make_state({2}, {{0, 1.0}, {1, 1.0}}));
  apply_gate(xp, Gate{GateKind::RPhiHalf, {"q"}, M_PI / 2.0}, q);
  EXPECT_NEAR(xp.matrix(0, 0).real(), 1.0, 1e-12);
  DensityMatrix ym = DensityMatrix::from_pure(make_state({2}, {{0, 1.0}, {1, cplx(0.0, -1.0)}}));
  apply_gate(ym, Gate{GateKind::RPhiHalf, {"q"}, 0.0}, q);
  EXPECT_NEAR(ym.matrix(0, 0).real(), 1.0, 1e-12);
}

TEST(Gates, InvalidTargetThrows) {
  DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2}, 0));
  EXPECT_THROW(apply_gate(rho, Gate{GateKind::X, {"nope"}}, {"q"}), UsageError);
}

TEST(Cnot, BasisAction) {
  const std::vector<std::string> q = {"c", "t"};
  for (std::size_t in : {0u, 1u, 2u, 3u}) {
    DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2, 2}, in));
    for (const Gate& g : cnot("c", "t")) apply_gate(rho, g, q);
    const std::size_t expected = (in & 2) ? (in ^ 1) : in;
    EXPECT_NEAR(rho.matrix(expected, expected).real(), 1.0, 1e-12) << "input " << in;
  }
}

TEST(Cnot, ReproducesEqS4FromEqS3) {
  const std::vector<std::string> q = {"C1", "C2", "A2", "B2"};
  DensityMatrix rho = DensityMatrix::from_pure(eq_s3());
  for (const Gate& g : cnot("C1", "C2")) apply_gate(rho, g, q);
  EXPECT_NEAR(qmath::fidelity_pure(rho, eq_s4()), 1.0, 1e-12);
}

TEST(Swap, IntermediateStatesMatchEqS3AndS4) {
  TierConfig cfg;
  const DensityMatrix prep = run_swap_stage(cfg, SwapVariant::XHalf, SwapStage::AfterPrep);
  EXPECT_NEAR(qmath::fidelity_pure(prep, eq_s3()), 1.0, 1e-9);
  const DensityMatrix mid = run_swap_stage(cfg, SwapVariant::XHalf, SwapStage::AfterCnot);
  EXPECT_NEAR(qmath::fidelity_pure(mid, eq_s4()), 1.0, 1e-9);
}

TEST(Swap, ConditionalOutputsMatchEqS5toS8) {
  const SwapOutcomes out = run_swap_protocol();
  ASSERT_EQ(out.size(), 4u);
  const char* names[4] = {"gg", "ge", "eg", "ee"};
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const auto& cond = out.at(names[m * 2 + n]);
      EXPECT_NEAR(cond.probability, 0.25, 1e-9);
      EXPECT_NEAR(qmath::fidelity_pure(cond.rho, psi_mn(m, n)), 1.0, 1e-9);
      // All four conditionals are maximally entangled: marginals I/2.
      for (std::size_t keep : {0u, 1u}) {
        const DensityMatrix marg = qmath::partial_trace(cond.rho, {keep});
        EXPECT_NEAR(marg.matrix(0, 0).real(), 0.5, 1e-9);
        EXPECT_LT(std::abs(marg.matrix(0, 1)), 1e-9);
      }
    }
}

TEST(Swap, YHalfVariantYieldsBellStates) {
  const SwapOutcomes out = run_swap_protocol({}, SwapVariant::YHalf);
  for (const auto& [name, cond] : out) {
    EXPECT_NEAR(cond.probability, 0.25, 1e-9);
    EXPECT_NEAR(best_bell_fidelity(cond.rho), 1.0, 1e-9) << name;
  }
}

TEST(Ghz, IdealGhz3) {
  const DensityMatrix rho = run_ghz3();
  EXPECT_NEAR(qmath::fidelity_pure(rho, testutil::ghz(3)), 1.0, 1e-9);
  // Noiseless circuits preserve purity.
  double purity = 0.0;
  for (const auto& v : rho.matrix.data) purity += std::norm(v);
  EXPECT_NEAR(purity, 1.0, 1e-9);
}

TEST(Ghz, IntermediateStateIsMinusPhaseGhz) {
  const DensityMatrix rho = run_ghz3_intermediate();
  const PureState target = make_state({2, 2, 2}, {{0, 1.0 / rt2}, {7, -1.0 / rt2}});
  EXPECT_NEAR(qmath::fidelity_pure(rho, target), 1.0, 1e-9);
}

TEST(Ghz, IdealGhz5) {
  const DensityMatrix rho = run_ghz5();
  EXPECT_NEAR(qmath::fidelity_pure(rho, testutil::ghz(5)), 1.0, 1e-9);
}

TEST(Ghz, RemovingDdPairsLeavesIdealOutputsUnchanged) {
  TierConfig with_dd, without_dd;
  without_dd.include_dd = false;
  EXPECT_LT(qmath::max_abs_diff(run_ghz3(with_dd).matrix, run_ghz3(without_dd).matrix), 1e-12);
  EXPECT_LT(qmath::max_abs_diff(run_ghz5(with_dd).matrix, run_ghz5(without_dd).matrix), 1e-12);
  const SwapOutcomes a = run_swap_protocol(with_dd);
  const SwapOutcomes b = run_swap_protocol(without_dd);
  for (const auto& [name, cond] : a)
    EXPECT_LT(qmath::max_abs_diff(cond.rho.matrix, b.at(name).rho.matrix), 1e-12);
}

TEST(Ghz, NoisyGhz3InExpectedBand) {
  TierConfig cfg;
  cfg.tier = Tier::NoisyCircuit;
  const DensityMatrix rho = run_ghz3(cfg);
  const double f = qmath::fidelity_pure(rho, testutil::ghz(3));
  EXPECT_GE(f, 0.75);
  EXPECT_LE(f, 0.95);
}

TEST(Ghz, NoisyGhz5BelowNoisyGhz3ButGenuinelyEntangled) {
  TierConfig cfg;
  cfg.tier = Tier::NoisyCircuit;
  const double f3 = qmath::fidelity_pure(run_ghz3(cfg), testutil::ghz(3));
  const double f5 = qmath::fidelity_pure(run_ghz5(cfg), testutil::ghz(5));
  EXPECT_LT(f5, f3);
  EXPECT_GT(f5, 0.5);  // above the genuine-multipartite-entanglement threshold
}

TEST(Attack, ZeroAngleIsInert) {
  const DensityMatrix rho4 = apply_attack(ideal_ghz3_state(), 0.0);
  const DensityMatrix eve = qmath::partial_trace(rho4, {3});
  EXPECT_NEAR(eve.matrix(0, 0).real(), 1.0, 1e-12);
  const DensityMatrix abc = qmath::partial_trace(rho4, {0, 1, 2});
  EXPECT_NEAR(qmath::fidelity_pure(abc, testutil::ghz(3)), 1.0, 1e-12);
}

TEST(Attack, TracingEveGivesDephasedGhz) {
  for (int k = 0; k < 8; ++k) {
    const double theta = k * M_PI / 7.0;
    const DensityMatrix abc = attack_rho_abc(theta);
    EXPECT_LT(qmath::max_abs_diff(abc.matrix, testutil::dephased_ghz3(theta).matrix), 1e-10)
        << "theta " << theta;
  }
}

TEST(Attack, HalfPiDestroysCoherence) {
  const DensityMatrix abc = attack_rho_abc(M_PI / 2.0);
  EXPECT_NEAR(qmath::fidelity_pure(abc, testutil::ghz(3)), 0.5, 1e-12);
}

TEST(Attack, EveMarginalEigenvalues) {
  for (double theta : {0.4, 1.1, 2.0}) {
    const DensityMatrix rho4 = apply_attack(ideal_ghz3_state(), theta);
    const DensityMatrix eve = qmath::partial_trace(rho4, {3});
    const auto spec = qmath::hermitian_eig(eve.matrix);
    const double c2 = std::cos(theta / 2.0) * std::cos(theta / 2.0);
    EXPECT_NEAR(spec.eigenvalues[0], std::max(c2, 1.0 - c2), 1e-12);
    EXPECT_NEAR(spec.eigenvalues[1], std::min(c2, 1.0 - c2), 1e-12);
  }
}

TEST(Noise, DepolarizingDrivesTowardMaximallyMixed) {
  DensityMatrix rho = DensityMatrix::from_pure(testutil::ghz(2));
  apply_depolarizing(rho, {0, 1}, 1.0);
  EXPECT_LT(qmath::max_abs_diff(rho.matrix, DensityMatrix::maximally_mixed({2, 2}).matrix), 1e-12);
}

TEST(Noise, AmplitudeDampingFixedPoint) {
  DensityMatrix rho = DensityMatrix::from_pure(PureState::basis({2}, 1));
  apply_amplitude_damping(rho, 0, 0.3);
  EXPECT_NEAR(rho.matrix(1, 1).real(), 0.7, 1e-12);
  apply_amplitude_damping(rho, 0, 1.0);
  EXPECT_NEAR(rho.matrix(0, 0).real(), 1.0, 1e-12);
}

TEST(Text, RoundTripPreservesSemantics) {
  TierConfig cfg;
  cfg.tier = Tier::NoisyCircuit;
  const Circuit c = ghz3_circuit(cfg);
  const std::string text = to_text(c);
  const Circuit back = from_text(text);
  EXPECT_EQ(to_text(back), text);
  const DensityMatrix a = run_circuit(c);
  const DensityMatrix b = run_circuit(back);
  EXPECT_LT(qmath::max_abs_diff(a.matrix, b.matrix), 1e-12);
}

TEST(Text, GoldenIdealGhz3Sequence) {
  TierConfig cfg;
  cfg.include_dd = false;
  const std::string expected =
      "QUBITS A2 C1 C2 B2\n"
      "X A2\n"
      "ST A2 C1 0.7853981633974483\n"
      "-Y/2 C2\n"
      "CZ C1 C2\n"
      "X A2\n"
      "Y/2 C2\n"
      "ST C2 B2 1.5707963267948966\n";
  EXPECT_EQ(to_text(ghz3_circuit(cfg)), expected);
}

// Device tier with a lossless single-mode channel must reproduce the ideal
// circuit results through the Lindblad engine and process extraction.
TEST(DeviceTier, LosslessSingleModeMatchesIdeal) {
  TierConfig cfg;
  cfg.tier = Tier::Device;
  cfg.device_decoherence = false;
  cfg.device_dt_ns = 0.25;
  for (auto& ch : cfg.channels) ch.modes = 1;
  const DensityMatrix ghz3 = run_ghz3(cfg);
  EXPECT_GT(qmath::fidelity_pure(ghz3, testutil::ghz(3)), 0.9999);
  const SwapOutcomes out = run_swap_protocol(cfg);
  for (int m = 0; m < 2; ++m)
    for (int n = 0; n < 2; ++n) {
      const auto& cond = out.at(std::string(m ? "e" : "g") + (n ? "e" : "g"));
      EXPECT_NEAR(cond.probability, 0.25, 1e-4);
      EXPECT_GT(qmath::fidelity_pure(cond.rho, psi_mn(m, n)), 0.9999);
    }
}

TEST(DeviceTier, DecoheredGhz3FidelityBelowIdeal) {
  TierConfig cfg;
  cfg.tier = Tier::Device;
  cfg.device_dt_ns = 0.25;
  for (auto& ch : cfg.channels) ch.modes = 1;
  const double f = qmath::fidelity_pure(run_ghz3(cfg), testutil::ghz(3));
  EXPECT_LT(f, 0.97);
  EXPECT_GT(f, 0.80);
}
