// triqnet: command-line runner for the triangular-network simulator.
//
// Subcommands: transfer, bell, swap, ghz3, ghz5, qss, sweep, tomo, privacy,
// check. Every run writes a manifest before any result file. Exit codes:
// 0 success, 2 usage error, 3 numerical failure, 4 self-check failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "triqnet/circuits.hpp"
#include "triqnet/config.hpp"
#include "triqnet/device.hpp"
#include "triqnet/measurement.hpp"
#include "triqnet/privacy.hpp"
#include "triqnet/protocols.hpp"
#include "triqnet/qss.hpp"
#include "triqnet/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace triqnet;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool ideal = false;
  std::string tier;  // device | circuit | ideal
};

struct RunContext {
  config::Config cfg;
  GlobalOptions opts;
  std::string command;
  fs::path out;

  std::uint64_t seed() const { return opts.seed_set ? opts.seed : cfg.simulation.seed; }

  std::string tier() const {
    if (opts.ideal) return "ideal";
    if (!opts.tier.empty()) return opts.tier;
    return cfg.simulation.tier;
  }
};

std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

// The manifest is committed before any result file appears.
void write_manifest(const RunContext& ctx, const std::vector<std::string>& outputs) {
  json m;
  m["command"] = ctx.command;
  m["config_hash"] = config::config_hash(ctx.cfg);
  m["seed"] = ctx.seed();
  m["tool_version"] = kVersion;
  m["timestamp_utc"] = iso_timestamp();
  m["outputs"] = outputs;
  fs::create_directories(ctx.out);
  write_file(ctx.out / "manifest.json", m.dump(2) + "\n");
}

std::string matrix_csv(const qmath::ComplexMatrix& m) {
  std::string out = "row,col,re,im\n";
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j)
      out += std::to_string(i) + "," + std::to_string(j) + "," + fmt_double(m(i, j).real()) +
             "," + fmt_double(m(i, j).imag()) + "\n";
  return out;
}

qmath::PureState ghz_state(std::size_t n) {
  std::vector<qmath::cplx> amps(std::size_t{1} << n);
  amps.front() = 1.0 / std::sqrt(2.0);
  amps.back() = 1.0 / std::sqrt(2.0);
  return qmath::PureState(std::vector<std::size_t>(n, 2), std::move(amps));
}

qmath::PureState psi_minus_state() {
  std::vector<qmath::cplx> amps(4);
  amps[2] = 1.0 / std::sqrt(2.0);
  amps[1] = -1.0 / std::sqrt(2.0);
  return qmath::PureState({2, 2}, std::move(amps));
}

std::string canonical_channel(const std::string& flag) {
  if (flag == "a2c1" || flag == "A2-C1") return "A2-C1";
  if (flag == "c2b2" || flag == "C2-B2") return "C2-B2";
  if (flag == "b1a1" || flag == "B1-A1") return "B1-A1";
  throw UsageError("unknown channel: " + flag + " (expected a2c1, c2b2, or b1a1)");
}

device::TransferSetup setup_for(const RunContext& ctx, const std::string& channel_label) {
  for (const auto& ch : ctx.cfg.channels)
    if (ch.label == channel_label) {
      const auto dash = ch.label.find('-');
      return device::TransferSetup{device::find_qubit(ctx.cfg.qubits, ch.label.substr(0, dash)),
                                   device::find_qubit(ctx.cfg.qubits, ch.label.substr(dash + 1)),
                                   ch};
    }
  throw UsageError("channel not in config: " + channel_label);
}

circuits::TierConfig tier_config(const RunContext& ctx) {
  circuits::TierConfig tc;
  tc.qubits = ctx.cfg.qubits;
  tc.channels = ctx.cfg.channels;
  tc.device_dt_ns = ctx.cfg.simulation.dt_ns;
  const std::string tier = ctx.tier();
  if (tier == "ideal")
    tc.tier = circuits::Tier::Ideal;
  else if (tier == "circuit")
    tc.tier = circuits::Tier::NoisyCircuit;
  else
    tc.tier = circuits::Tier::Device;
  return tc;
}

measurement::ReadoutModel readout_for(const RunContext& ctx,
                                      const std::vector<std::string>& labels, bool ideal) {
  if (ideal) return measurement::ReadoutModel::ideal(labels.size());
  measurement::ReadoutModel m;
  for (const auto& label : labels) {
    const auto& q = device::find_qubit(ctx.cfg.qubits, label);
    m.fidelities.push_back({q.f_g, q.f_e});
  }
  return m;
}

//==========================================================================
// Subcommands
//==========================================================================

void cmd_transfer(const RunContext& ctx, const std::string& channel_flag, bool chevron) {
  const std::string label = canonical_channel(channel_flag);
  const std::string stem = "transfer_" + channel_flag;
  std::vector<std::string> outputs = {stem + ".json"};
  if (chevron) outputs.push_back(stem + "_chevron.csv");
  write_manifest(ctx, outputs);

  const auto setup = setup_for(ctx, label);
  const device::EvolveOptions opt{ctx.cfg.simulation.dt_ns, !ctx.opts.ideal};
  const device::TransferResult st = device::run_transfer(setup, opt);
  const device::TransferResult st2 = device::run_half_transfer(setup, opt);

  json summary;
  summary["channel"] = label;
  summary["modes"] = setup.channel.modes;
  summary["decoherence"] = !ctx.opts.ideal;
  summary["eta_t"] = st.eta_t;
  summary["f_bell"] = *st2.f_bell;
  write_file(ctx.out / (stem + ".json"), summary.dump(2) + "\n");

  if (chevron) {
    std::vector<double> detunings, times;
    for (int k = -30; k <= 30; ++k) detunings.push_back(k * 5.0);
    for (int k = 0; k <= 120; ++k) times.push_back(k * 2.5);
    const auto map = device::rabi_chevron(setup.emitter, setup.channel, detunings, times);
    std::string csv = "detuning_mhz,time_ns,p_e\n";
    for (std::size_t d = 0; d < detunings.size(); ++d)
      for (std::size_t t = 0; t < times.size(); ++t)
        csv += fmt_double(detunings[d]) + "," + fmt_double(times[t]) + "," +
               fmt_double(map.p_e[d][t]) + "\n";
    write_file(ctx.out / (stem + "_chevron.csv"), csv);
  }
  std::printf("%s: eta_t = %.4f, F_Bell = %.4f\n", label.c_str(), st.eta_t, *st2.f_bell);
}

void cmd_bell(const RunContext& ctx, const std::string& channel_flag) {
  const std::string label = canonical_channel(channel_flag);
  const std::string stem = "bell_" + channel_flag;
  write_manifest(ctx, {stem + ".json", stem + "_rho.csv"});

  const auto setup = setup_for(ctx, label);
  const device::TransferResult st2 =
      device::run_half_transfer(setup, {ctx.cfg.simulation.dt_ns, !ctx.opts.ideal});
  json summary;
  summary["channel"] = label;
  summary["f_bell"] = *st2.f_bell;
  summary["eta_t"] = st2.eta_t;
  write_file(ctx.out / (stem + ".json"), summary.dump(2) + "\n");
  write_file(ctx.out / (stem + "_rho.csv"), matrix_csv(st2.rho_final.matrix));
  std::printf("%s: F_Bell = %.4f\n", label.c_str(), *st2.f_bell);
}

void cmd_swap(const RunContext& ctx, const std::string& variant_flag,
              const std::string& outcome_filter) {
  if (!outcome_filter.empty() && outcome_filter != "gg" && outcome_filter != "ge" &&
      outcome_filter != "eg" && outcome_filter != "ee")
    throw UsageError("swap: outcome must be one of gg, ge, eg, ee");
  const circuits::SwapVariant variant =
      variant_flag == "y" ? circuits::SwapVariant::YHalf : circuits::SwapVariant::XHalf;
  std::vector<std::string> outputs = {"swap.json"};
  for (const char* mn : {"gg", "ge", "eg", "ee"})
    if (outcome_filter.empty() || outcome_filter == mn)
      outputs.push_back(std::string("swap_rho_") + mn + ".csv");
  write_manifest(ctx, outputs);

  const circuits::SwapOutcomes out = circuits::run_swap_protocol(tier_config(ctx), variant);
  // Reference states per outcome (Eqs. S5-S8 phases for the X/2 variant).
  auto reference = [&](const std::string& mn) {
    std::vector<qmath::cplx> amps(4);
    const qmath::cplx i{0.0, 1.0};
    const double r = 1.0 / std::sqrt(2.0);
    if (variant == circuits::SwapVariant::XHalf) {
      if (mn == "gg") { amps[0] = r; amps[3] = -i * r; }
      else if (mn == "ge") { amps[1] = r; amps[2] = -i * r; }
      else if (mn == "eg") { amps[0] = r; amps[3] = i * r; }
      else { amps[1] = r; amps[2] = i * r; }
    } else {
      if (mn == "gg") { amps[0] = r; amps[3] = -r; }
      else if (mn == "ge") { amps[1] = -r; amps[2] = r; }
      else if (mn == "eg") { amps[0] = r; amps[3] = r; }
      else { amps[1] = r; amps[2] = r; }
    }
    return qmath::PureState({2, 2}, std::move(amps));
  };

  json summary;
  summary["variant"] = variant_flag == "y" ? "Y/2" : "X/2";
  summary["tier"] = ctx.tier();
  for (const auto& [mn, cond] : out) {
    if (!outcome_filter.empty() && outcome_filter != mn) continue;
    const double f = qmath::fidelity_pure(cond.rho, reference(mn));
    summary["outcomes"][mn]["probability"] = cond.probability;
    summary["outcomes"][mn]["fidelity"] = f;
    write_file(ctx.out / ("swap_rho_" + mn + ".csv"), matrix_csv(cond.rho.matrix));
    std::printf("outcome %s: p = %.4f, fidelity = %.4f\n", mn.c_str(), cond.probability, f);
  }
  write_file(ctx.out / "swap.json", summary.dump(2) + "\n");
}

void cmd_ghz(const RunContext& ctx, int size) {
  const std::string stem = size == 3 ? "ghz3" : "ghz5";
  write_manifest(ctx, {stem + ".json", stem + "_rho.csv"});
  const qmath::DensityMatrix rho =
      size == 3 ? circuits::run_ghz3(tier_config(ctx)) : circuits::run_ghz5(tier_config(ctx));
  const double f = qmath::fidelity_pure(rho, ghz_state(size));
  json summary;
  summary["state"] = stem;
  summary["tier"] = ctx.tier();
  summary["fidelity"] = f;
  write_file(ctx.out / (stem + ".json"), summary.dump(2) + "\n");
  write_file(ctx.out / (stem + "_rho.csv"), matrix_csv(rho.matrix));
  std::printf("%s (%s tier): fidelity = %.4f\n", stem.c_str(), ctx.tier().c_str(), f);
}

void cmd_qss(const RunContext& ctx, std::uint64_t rounds, const std::string& source_flag,
             double attack_theta, bool attack_set, const std::string& readout_flag) {
  write_manifest(ctx, {"qss_rounds.jsonl", "qss_report.json"});
  qss::StateSource source = qss::StateSource::ideal_ghz();
  std::string source_name = "ideal";
  if (attack_set) {
    source = qss::StateSource::attack(attack_theta);
    source_name = "attack";
  } else if (source_flag == "noisy") {
    circuits::TierConfig tc = tier_config(ctx);
    tc.tier = circuits::Tier::NoisyCircuit;
    source = qss::StateSource::circuit_noisy(tc);
    source_name = "noisy";
  } else if (source_flag == "attack") {
    source = qss::StateSource::attack(ctx.cfg.experiment.theta_e);
    source_name = "attack";
    attack_theta = ctx.cfg.experiment.theta_e;
  } else if (source_flag != "ideal") {
    throw UsageError("qss: source must be ideal, attack, or noisy");
  }
  const auto readout =
      readout_for(ctx, {"A2", "C1", "B2"}, readout_flag != "tables");

  const auto records = qss::run_rounds(rounds, source, readout, ctx.seed());
  const qss::KeyReport report = qss::sift_and_decode(records);

  write_file(ctx.out / "qss_rounds.jsonl", qss::rounds_to_jsonl(records));
  json rj;
  rj["source"] = source_name;
  if (source_name == "attack") rj["theta_e"] = attack_theta;
  rj["rounds_total"] = report.rounds_total;
  rj["rounds_sifted"] = report.rounds_sifted;
  rj["errors_sifted"] = report.errors_sifted;
  rj["qber_sifted"] = report.qber;
  rj["raw_error_fraction"] = report.raw_error_fraction;
  rj["threshold"] = report.threshold;
  rj["estimation_valid"] = report.estimation_valid;
  rj["verdict"] = report.alarm ? "alarm" : "clean";
  for (std::size_t o = 0; o < 8; ++o) {
    std::string key;
    for (int b = 2; b >= 0; --b) key += ((o >> b) & 1) ? '1' : '0';
    rj["allx_probs"][key] = report.allx_probs[o];
  }
  write_file(ctx.out / "qss_report.json", rj.dump(2) + "\n");
  std::printf("QSS: %llu rounds, sifted %llu, QBER = %.4f, verdict = %s\n",
              static_cast<unsigned long long>(report.rounds_total),
              static_cast<unsigned long long>(report.rounds_sifted), report.qber,
              report.alarm ? "alarm" : "clean");
}

// The analytic theta_E sweep behind the eavesdropping figures.
void cmd_sweep(const RunContext& ctx, std::uint64_t points) {
  write_manifest(ctx, {"sweep.csv"});
  if (points < 2) throw UsageError("sweep: need at least two grid points");
  std::string csv =
      "theta_E,fidelity,linear_entropy_E,qber_sifted,error_raw,mermin,privacy_bound,dw_bound\n";
  for (std::uint64_t k = 0; k < points; ++k) {
    const double theta = (M_PI / 2.0) * static_cast<double>(k) / static_cast<double>(points - 1);
    const qmath::DensityMatrix rho4 =
        circuits::apply_attack(qmath::DensityMatrix::from_pure(ghz_state(3)), theta);
    const qmath::DensityMatrix rho_abc = qmath::partial_trace(rho4, {0, 1, 2});
    const qmath::DensityMatrix rho_eve = qmath::partial_trace(rho4, {3});
    const double fidelity = qmath::fidelity_pure(rho_abc, ghz_state(3));
    const double lin_e = qmath::linear_entropy(rho_eve);
    const qss::AnalyticRates rates = qss::analytic_error_rates(rho_abc);
    const double mermin = qss::mermin_value(rho_abc);
    const double pb = privacy::privacy_bound(rho_abc);
    const auto cq = privacy::cq_from_measurement(rho_abc, privacy::MeasureBasis::X);
    const double dw = privacy::dw_bound(cq, rho_abc);
    csv += fmt_double(theta) + "," + fmt_double(fidelity) + "," + fmt_double(lin_e) + "," +
           fmt_double(rates.qber_sifted) + "," + fmt_double(rates.raw_error_fraction) + "," +
           fmt_double(mermin) + "," + fmt_double(pb) + "," + fmt_double(dw) + "\n";
  }
  write_file(ctx.out / "sweep.csv", csv);
  std::printf("sweep: %llu points written\n", static_cast<unsigned long long>(points));
}

void cmd_tomo(const RunContext& ctx, const std::string& state_flag, std::uint64_t shots,
              const std::string& readout_flag) {
  write_manifest(ctx, {"tomo_counts.csv", "tomo_rho.csv", "tomo.json"});
  qmath::DensityMatrix truth;
  qmath::PureState target;
  std::vector<std::string> labels;
  circuits::TierConfig tc = tier_config(ctx);
  if (state_flag == "ghz3") {
    truth = circuits::run_ghz3(tc);
    target = ghz_state(3);
    labels = {"A2", "C1", "B2"};
  } else if (state_flag == "ghz5") {
    truth = circuits::run_ghz5(tc);
    target = ghz_state(5);
    labels = {"A2", "C1", "C2", "B2", "B1"};
  } else if (state_flag == "bell") {
    const qmath::DensityMatrix prep = circuits::run_swap_stage(
        tc, circuits::SwapVariant::XHalf, circuits::SwapStage::AfterPrep);
    truth = qmath::partial_trace(prep, {0, 2});  // [C1, A2] pair
    target = psi_minus_state();  // antisymmetric, ordering-independent
    labels = {"C1", "A2"};
  } else {
    throw UsageError("tomo: state must be ghz3, ghz5, or bell");
  }
  const auto readout = readout_for(ctx, labels, readout_flag != "tables");
  const auto table = measurement::tomography_measure(truth, shots, readout, ctx.seed());
  const qmath::DensityMatrix rho = measurement::reconstruct(table, readout);
  const double f = qmath::fidelity_pure(rho, target);

  std::ostringstream counts;
  measurement::write_csv(table, counts);
  write_file(ctx.out / "tomo_counts.csv", counts.str());
  write_file(ctx.out / "tomo_rho.csv", matrix_csv(rho.matrix));
  json summary;
  summary["state"] = state_flag;
  summary["tier"] = ctx.tier();
  summary["shots_per_setting"] = shots;
  summary["readout"] = readout_flag;
  summary["fidelity_to_target"] = f;
  write_file(ctx.out / "tomo.json", summary.dump(2) + "\n");
  std::printf("tomo %s: reconstructed fidelity = %.4f\n", state_flag.c_str(), f);
}

void cmd_privacy(const RunContext& ctx, double theta) {
  write_manifest(ctx, {"privacy.json"});
  const qmath::DensityMatrix rho4 =
      circuits::apply_attack(qmath::DensityMatrix::from_pure(ghz_state(3)), theta);
  const qmath::DensityMatrix rho_abc = qmath::partial_trace(rho4, {0, 1, 2});
  const double pb = privacy::privacy_bound(rho_abc);
  const auto cq = privacy::cq_from_measurement(rho_abc, privacy::MeasureBasis::X);
  const double dw = privacy::dw_bound(cq, rho_abc);
  json summary;
  summary["theta_e"] = theta;
  summary["fidelity"] = qmath::fidelity_pure(rho_abc, ghz_state(3));
  summary["linear_entropy_eve"] = qmath::linear_entropy(qmath::partial_trace(rho4, {3}));
  summary["privacy_bound_bits"] = pb;
  summary["dw_bound_bits"] = dw;
  summary["privacy_bound_vacuous"] = privacy::bound_is_vacuous(pb);
  summary["dw_bound_vacuous"] = privacy::bound_is_vacuous(dw);
  summary["guessing_probability_bob"] = qss::guessing_probability(rho_abc, qss::Cheater::Bob);
  write_file(ctx.out / "privacy.json", summary.dump(2) + "\n");
  std::printf("privacy(theta_E = %.4f): bound = %.4f bits%s\n", theta, pb,
              privacy::bound_is_vacuous(pb) ? " (vacuous: no guaranteed key)" : "");
}

//==========================================================================
// check: fast self-checks over the exact (analytic) results
//==========================================================================

int cmd_check(const RunContext& ctx) {
  (void)ctx;
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
    if (!ok) ++failures;
  };

  bool fid_ok = true, lin_ok = true, mermin_ok = true, privacy_ok = true, monotone_ok = true;
  double prev_qber = -1.0, prev_privacy = 2.0;
  for (int k = 0; k <= 8; ++k) {
    const double theta = k * (M_PI / 2.0) / 8.0;
    const auto rho4 = circuits::apply_attack(qmath::DensityMatrix::from_pure(ghz_state(3)), theta);
    const auto abc = qmath::partial_trace(rho4, {0, 1, 2});
    fid_ok = fid_ok && std::abs(qmath::fidelity_pure(abc, ghz_state(3)) -
                                (1.0 + std::cos(theta)) / 2.0) < 1e-9;
    lin_ok = lin_ok && std::abs(qmath::linear_entropy(qmath::partial_trace(rho4, {3})) -
                                std::sin(theta) * std::sin(theta) / 2.0) < 1e-9;
    mermin_ok =
        mermin_ok && std::abs(qss::mermin_value(abc) - 4.0 * std::cos(theta)) < 1e-9;
    const double pb = privacy::privacy_bound(abc);
    monotone_ok = monotone_ok && pb <= prev_privacy + 1e-12;
    prev_privacy = pb;
    const double qber = qss::analytic_error_rates(abc).qber_sifted;
    monotone_ok = monotone_ok && qber >= prev_qber - 1e-12;
    prev_qber = qber;
    privacy_ok = privacy_ok &&
                 std::abs(qss::guessing_probability(abc, qss::Cheater::Bob) - 0.5) < 1e-9;
  }
  check("attack fidelity factor (1+cos)/2", fid_ok);
  check("attack Eve linear entropy sin^2/2", lin_ok);
  check("attack Mermin value 4cos", mermin_ok);
  check("attack guessing probability 1/2", privacy_ok);
  check("sweep columns monotone", monotone_ok);

  const auto ideal = qmath::DensityMatrix::from_pure(ghz_state(3));
  const auto cq = privacy::cq_from_measurement(ideal, privacy::MeasureBasis::X);
  check("ideal GHZ privacy bounds = 1 bit",
        std::abs(privacy::privacy_bound(ideal) - 1.0) < 1e-9 &&
            std::abs(privacy::dw_bound(cq, ideal) - 1.0) < 1e-9);

  bool swap_ok = true;
  const auto swap = circuits::run_swap_protocol();
  for (const auto& [mn, cond] : swap) swap_ok = swap_ok && std::abs(cond.probability - 0.25) < 1e-9;
  check("swap outcome probabilities 1/4", swap_ok);

  check("ideal GHZ-3 fidelity 1",
        std::abs(qmath::fidelity_pure(circuits::run_ghz3(), ghz_state(3)) - 1.0) < 1e-9);
  check("ideal GHZ-5 fidelity 1",
        std::abs(qmath::fidelity_pure(circuits::run_ghz5(), ghz_state(5)) - 1.0) < 1e-9);

  bool holevo_ok = true;
  std::mt19937_64 gen(2026);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    privacy::PureBipartiteEnsemble e;
    for (int i = 0; i < 2 + trial % 2; ++i) {
      std::vector<qmath::cplx> amps(4);
      for (auto& v : amps) v = qmath::cplx(dist(gen), dist(gen));
      qmath::PureState psi({2, 2}, amps);
      psi.normalize();
      e.items.push_back({1.0 / (2 + trial % 2), psi});
    }
    holevo_ok = holevo_ok && privacy::holevo_equals_mutual_info_check(e) < 1e-9;
  }
  check("Holevo equals cq mutual information", holevo_ok);

  const auto ep = qss::phi_sweep({0.0, M_PI / 2.0}, qss::StateSource::ideal_ghz(), 50000, 12345);
  check("phi sweep endpoints 0.5 and ~1",
        std::abs(ep[0].blue_sum - 0.5) < 0.01 && ep[1].blue_sum > 0.99);

  return failures == 0 ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"triqnet: three-node triangular quantum network simulator"};
  app.require_subcommand(1);
  app.fallthrough(true);

  GlobalOptions opts;
  app.add_option("--config", opts.config_path, "TOML configuration file");
  app.add_option("--out", opts.out_dir, "output directory (default .)");
  auto* seed_opt = app.add_option("--seed", opts.seed, "override the RNG seed");
  app.add_flag("--ideal", opts.ideal, "disable all decoherence and readout error");
  app.add_option("--tier", opts.tier, "simulation tier: device, circuit, or ideal")
      ->check(CLI::IsMember({"device", "circuit", "ideal"}));

  std::string channel = "a2c1", variant = "x", outcome, source = "ideal", readout = "ideal";
  std::string tomo_state = "ghz3", tomo_readout = "tables";
  bool chevron = false;
  std::uint64_t rounds = 0, points = 0, shots = 0;
  double attack_theta = 0.0, privacy_theta = -1.0;

  auto* c_transfer = app.add_subcommand("transfer", "state transfer (ST) and Bell generation (ST/2)");
  c_transfer->add_option("--channel", channel, "a2c1, c2b2, or b1a1");
  c_transfer->add_flag("--chevron", chevron, "also write the vacuum Rabi chevron map");

  auto* c_bell = app.add_subcommand("bell", "Bell state generation via ST/2");
  c_bell->add_option("--channel", channel, "a2c1, c2b2, or b1a1");

  auto* c_swap = app.add_subcommand("swap", "entanglement swapping");
  c_swap->add_option("--variant", variant, "basis gate on C1: x or y")
      ->check(CLI::IsMember({"x", "y"}));
  c_swap->add_option("--outcome", outcome, "restrict output to one C1C2 outcome");

  auto* c_ghz3 = app.add_subcommand("ghz3", "three-qubit GHZ generation");
  auto* c_ghz5 = app.add_subcommand("ghz5", "five-qubit GHZ generation");

  auto* c_qss = app.add_subcommand("qss", "quantum secret sharing rounds");
  c_qss->add_option("--rounds", rounds, "number of rounds");
  c_qss->add_option("--source", source, "state source: ideal, attack, or noisy");
  auto* attack_opt = c_qss->add_option("--attack", attack_theta, "attack angle theta_E (radians)");
  c_qss->add_option("--readout", readout, "readout model: ideal or tables")
      ->check(CLI::IsMember({"ideal", "tables"}));

  auto* c_sweep = app.add_subcommand("sweep", "analytic theta_E sweep (attack metrics)");
  c_sweep->add_option("--points", points, "grid points on [0, pi/2]");

  auto* c_tomo = app.add_subcommand("tomo", "state tomography with readout correction");
  c_tomo->add_option("--state", tomo_state, "ghz3, ghz5, or bell");
  c_tomo->add_option("--shots", shots, "shots per tomography setting");
  c_tomo->add_option("--readout", tomo_readout, "readout model: ideal or tables")
      ->check(CLI::IsMember({"ideal", "tables"}));

  auto* c_privacy = app.add_subcommand("privacy", "privacy and key-rate bounds");
  c_privacy->add_option("--theta", privacy_theta, "attack angle theta_E (radians)");

  auto* c_check = app.add_subcommand("check", "run the fast self-check battery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunContext ctx;
    ctx.opts = opts;
    ctx.opts.seed_set = seed_opt->count() > 0;
    ctx.cfg = opts.config_path.empty() ? config::Config{}
                                       : config::load_config_file(opts.config_path);
    ctx.cfg.validate();
    ctx.out = opts.out_dir;
    for (int i = 0; i < argc; ++i) ctx.command += std::string(i ? " " : "") + argv[i];

    if (c_transfer->parsed()) cmd_transfer(ctx, channel, chevron);
    else if (c_bell->parsed()) cmd_bell(ctx, channel);
    else if (c_swap->parsed()) cmd_swap(ctx, variant, outcome);
    else if (c_ghz3->parsed()) cmd_ghz(ctx, 3);
    else if (c_ghz5->parsed()) cmd_ghz(ctx, 5);
    else if (c_qss->parsed())
      cmd_qss(ctx, rounds ? rounds : ctx.cfg.simulation.rounds, source, attack_theta,
              attack_opt->count() > 0, readout);
    else if (c_sweep->parsed()) cmd_sweep(ctx, points ? points : ctx.cfg.experiment.theta_points);
    else if (c_tomo->parsed())
      cmd_tomo(ctx, tomo_state, shots ? shots : ctx.cfg.simulation.shots, tomo_readout);
    else if (c_privacy->parsed())
      cmd_privacy(ctx, privacy_theta >= 0.0 ? privacy_theta : ctx.cfg.experiment.theta_e);
    else if (c_check->parsed())
      return cmd_check(ctx);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
