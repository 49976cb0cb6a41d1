#include "triqnet/qss.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/test_util.hpp"

using namespace triqnet;
using namespace triqnet::qss;
using qmath::DensityMatrix;

namespace {

measurement::ReadoutModel ideal3() { return measurement::ReadoutModel::ideal(3); }

KeyReport run_and_decode(const StateSource& src, std::uint64_t n, std::uint64_t seed) {
  return sift_and_decode(run_rounds(n, src, ideal3(), seed));
}

}  // namespace

TEST(RunRounds, AllXOutcomesConfinedToEvenParity) {
  const auto records = run_rounds(200000, StateSource::ideal_ghz(), ideal3(), 1);
  std::array<std::uint64_t, 8> counts{};
  std::uint64_t allx = 0;
  for (const auto& r : records) {
    if (r.basis[0] != Basis::X || r.basis[1] != Basis::X || r.basis[2] != Basis::X) continue;
    ++allx;
    ++counts[(r.bit[0] << 2) | (r.bit[1] << 1) | r.bit[2]];
  }
  ASSERT_GT(allx, 20000u);
  for (std::size_t o = 0; o < 8; ++o) {
    const double frac = static_cast<double>(counts[o]) / static_cast<double>(allx);
    if (__builtin_popcountll(o) % 2 == 0)
      EXPECT_NEAR(frac, 0.25, 0.01) << "outcome " << o;
    else
      EXPECT_EQ(counts[o], 0u) << "outcome " << o;
  }
}

TEST(RunRounds, HalfOfRoundsSiftedInExpectation) {
  const auto records = run_rounds(100000, StateSource::ideal_ghz(), ideal3(), 2);
  std::uint64_t kept = 0;
  for (const auto& r : records) kept += r.kept;
  EXPECT_NEAR(static_cast<double>(kept) / records.size(), 0.5, 0.01);
}

TEST(RunRounds, MaximallyMixedUniformOutcomes) {
  const StateSource src = StateSource::explicit_state(DensityMatrix::maximally_mixed({2, 2, 2}));
  const auto records = run_rounds(80000, src, ideal3(), 3);
  std::array<std::uint64_t, 8> counts{};
  for (const auto& r : records) ++counts[(r.bit[0] << 2) | (r.bit[1] << 1) | r.bit[2]];
  for (std::size_t o = 0; o < 8; ++o)
    EXPECT_NEAR(static_cast<double>(counts[o]) / records.size(), 0.125, 0.01);
}

TEST(RunRounds, DeterministicAcrossWorkerCounts) {
  const StateSource src = StateSource::attack(0.7);
  const auto a = run_rounds(5000, src, ideal3(), 99, Rng::stream_id("qss"), 1);
  const auto b = run_rounds(5000, src, ideal3(), 99, Rng::stream_id("qss"), 2);
  const auto c = run_rounds(5000, src, ideal3(), 99, Rng::stream_id("qss"), 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].basis, b[i].basis);
    EXPECT_EQ(a[i].bit, b[i].bit);
    EXPECT_EQ(a[i].bit, c[i].bit);
  }
}

TEST(SiftAndDecode, IdealGhzHasNoErrors) {
  const KeyReport report = run_and_decode(StateSource::ideal_ghz(), 100000, 4);
  EXPECT_TRUE(report.estimation_valid);
  EXPECT_LE(report.qber, 0.005);
  EXPECT_FALSE(report.alarm);
}

TEST(SiftAndDecode, FullAttackRates) {
  const KeyReport report = run_and_decode(StateSource::attack(M_PI / 2.0), 100000, 5);
  EXPECT_NEAR(report.qber, 0.50, 0.01);
  EXPECT_NEAR(report.raw_error_fraction, 0.25, 0.01);
  EXPECT_TRUE(report.alarm);
}

TEST(SiftAndDecode, MaximallyMixedIsCoinFlip) {
  const StateSource src = StateSource::explicit_state(DensityMatrix::maximally_mixed({2, 2, 2}));
  const KeyReport report = run_and_decode(src, 100000, 6);
  EXPECT_NEAR(report.qber, 0.5, 0.01);
}

TEST(SiftAndDecode, ZeroKeptRoundsFlagged) {
  std::vector<RoundRecord> records(10);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].index = i;
    records[i].basis = {Basis::Y, Basis::X, Basis::X};  // odd y count, discarded
    records[i].kept = false;
  }
  const KeyReport report = sift_and_decode(records);
  EXPECT_FALSE(report.estimation_valid);
  EXPECT_FALSE(report.alarm);
}

// The sampler and the density-matrix oracle must agree for every source.
TEST(SiftAndDecode, SamplerMatchesAnalyticRates) {
  const std::uint64_t n = 100000;
  int idx = 0;
  for (const StateSource& src :
       {StateSource::ideal_ghz(), StateSource::attack(M_PI / 4.0), StateSource::attack(2.0),
        StateSource::explicit_state(DensityMatrix::maximally_mixed({2, 2, 2}))}) {
    const AnalyticRates exact = analytic_error_rates(src.rho);
    const KeyReport sampled = sift_and_decode(run_rounds(n, src, ideal3(), 70 + idx));
    const double sigma =
        std::sqrt(std::max(exact.qber_sifted * (1.0 - exact.qber_sifted), 0.25e-4) / (n / 2.0));
    EXPECT_NEAR(sampled.qber, exact.qber_sifted, 3.0 * sigma + 1e-12) << "source " << idx;
    ++idx;
  }
}

TEST(SiftAndDecode, AnalyticAttackClosedForms) {
  for (double theta : {0.0, 0.5, M_PI / 4.0, M_PI / 3.0, M_PI / 2.0}) {
    const AnalyticRates rates = analytic_error_rates(circuits::attack_rho_abc(theta));
    EXPECT_NEAR(rates.qber_sifted, (1.0 - std::cos(theta)) / 2.0, 1e-9) << theta;
    EXPECT_NEAR(rates.raw_error_fraction, (1.0 - std::cos(theta)) / 4.0, 1e-9) << theta;
  }
}

TEST(SiftAndDecode, QberMonotoneInAttackAngle) {
  double prev = -1.0;
  for (int k = 0; k < 9; ++k) {
    const double theta = k * (M_PI / 2.0) / 8.0;
    const KeyReport r = run_and_decode(StateSource::attack(theta), 100000, 300 + k);
    const double sigma = std::sqrt(0.25 / (r.rounds_sifted + 1.0));
    EXPECT_GE(r.qber, prev - 3.0 * sigma) << "theta " << theta;
    prev = r.qber;
  }
}

// Every party's marginal bit is uniform whenever its reduced state is I/2,
// which holds for the ideal GHZ state and the whole attack family.
TEST(RunRounds, PartyMarginalsUniform) {
  for (const StateSource& src : {StateSource::ideal_ghz(), StateSource::attack(1.1)}) {
    const auto records = run_rounds(60000, src, ideal3(), 8);
    std::array<std::uint64_t, 3> ones{};
    for (const auto& r : records)
      for (int p = 0; p < 3; ++p) ones[p] += r.bit[p];
    for (int p = 0; p < 3; ++p) {
      const double frac = static_cast<double>(ones[p]) / records.size();
      EXPECT_NEAR(frac, 0.5, 3.0 * std::sqrt(0.25 / records.size()) + 0.001) << "party " << p;
    }
  }
}

TEST(PhiSweep, IdealEndpoints) {
  const auto table =
      phi_sweep({0.0, M_PI / 2.0}, StateSource::ideal_ghz(), 100000, 11);
  EXPECT_NEAR(table[0].blue_sum, 0.50, 0.01);
  EXPECT_GE(table[1].blue_sum, 0.99);
  EXPECT_NEAR(table[0].blue_sum + table[0].red_sum, 1.0, 1e-12);
}

TEST(PhiSweep, IdealFollowsSinusoid) {
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(-M_PI + k * M_PI / 4.0);
  const auto table = phi_sweep(grid, StateSource::ideal_ghz(), 50000, 12);
  for (const auto& pt : table)
    EXPECT_NEAR(pt.blue_sum, (1.0 + std::sin(pt.phi_a)) / 2.0, 0.012) << pt.phi_a;
}

// Under the attack the sweep visibility scales as cos(theta_E).
TEST(PhiSweep, AttackScalesVisibility) {
  const double theta = M_PI / 3.0;
  const auto table = phi_sweep({M_PI / 2.0, -M_PI / 2.0}, StateSource::attack(theta), 100000, 13);
  EXPECT_NEAR(table[0].blue_sum, (1.0 + std::cos(theta)) / 2.0, 0.01);
  EXPECT_NEAR(table[1].blue_sum, (1.0 - std::cos(theta)) / 2.0, 0.01);
}

TEST(GuessingProbability, IdealAndAttackAreBlind) {
  EXPECT_NEAR(guessing_probability(StateSource::ideal_ghz().rho, Cheater::Bob), 0.5, 1e-9);
  for (double theta : {0.3, M_PI / 4.0, 1.8, M_PI / 2.0}) {
    EXPECT_NEAR(guessing_probability(circuits::attack_rho_abc(theta), Cheater::Bob), 0.5, 1e-9);
    EXPECT_NEAR(guessing_probability(circuits::attack_rho_abc(theta), Cheater::Charlie), 0.5,
                1e-9);
  }
}

TEST(GuessingProbability, DeterministicAliceIsFullyGuessable) {
  // |x+> (x) |g> (x) |g>: Alice's x outcome is certain.
  std::vector<qmath::cplx> amps(8);
  amps[0] = 1.0 / std::sqrt(2.0);
  amps[4] = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::from_pure(qmath::PureState({2, 2, 2}, amps));
  EXPECT_NEAR(guessing_probability(rho, Cheater::Bob), 1.0, 1e-9);
}

TEST(Mermin, GhzAndAttackFamily) {
  EXPECT_NEAR(mermin_value(StateSource::ideal_ghz().rho), 4.0, 1e-9);
  for (int k = 0; k <= 8; ++k) {
    const double theta = k * M_PI / 8.0;
    EXPECT_NEAR(mermin_value(circuits::attack_rho_abc(theta)), 4.0 * std::cos(theta), 1e-9);
  }
  EXPECT_NEAR(mermin_value(DensityMatrix::maximally_mixed({2, 2, 2})), 0.0, 1e-12);
}

TEST(Mermin, SeparableDiagonalStatesRespectClassicalBound) {
  // Diagonal (hence fully separable) states cannot exceed 2.
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    qmath::ComplexMatrix m(8, 8);
    double total = 0.0;
    for (int i = 0; i < 8; ++i) {
      m(i, i) = dist(gen);
      total += m(i, i).real();
    }
    for (int i = 0; i < 8; ++i) m(i, i) /= total;
    const double value = mermin_value(DensityMatrix({2, 2, 2}, std::move(m)));
    EXPECT_LE(std::abs(value), 2.0 + 1e-12);
  }
}

TEST(Detect, ThresholdConvention) {
  KeyReport r;
  r.estimation_valid = true;
  r.threshold = 0.25;
  r.qber = 0.215;
  EXPECT_FALSE(detect(r));
  r.qber = 0.50;
  EXPECT_TRUE(detect(r));
  r.qber = 0.25;  // boundary: strict inequality, no alarm
  EXPECT_FALSE(detect(r));
}

TEST(Jsonl, RoundSerializationIsStable) {
  RoundRecord r;
  r.index = 17;
  r.basis = {Basis::X, Basis::Y, Basis::X};
  r.bit = {0, 1, 0};
  r.kept = false;
  EXPECT_EQ(round_to_json(r),
            "{\"round\":17,\"basis\":[\"x\",\"y\",\"x\"],\"bits\":[0,1,0],\"kept\":false}");
}

TEST(Attack, ConfigValidation) {
  AttackConfig bad{-0.1, true};
  EXPECT_THROW(bad.validate(), UsageError);
  EXPECT_THROW(StateSource::attack(4.0), UsageError);
}
