#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "triqnet/circuits.hpp"
#include "triqnet/device.hpp"

// The composite sequences of the experiment: entanglement swapping (Fig. S4),
// GHZ-3 (Fig. 3a), GHZ-5 (Fig. S5a) and the entangle-and-measure attack
// (Fig. 4a), each runnable at three tiers:
//   Ideal        - noiseless gates, transfers as unitary two-iSWAP maps
//   NoisyCircuit - idle damping/dephasing for actual durations plus a uniform
//                  depolarizing probability per benchmarked gate
//   Device       - Bell generation and transfers from the Lindblad device
//                  simulation, local gates ideal
namespace triqnet::circuits {

enum class Tier { Ideal, NoisyCircuit, Device };

struct NoiseParams {
  double p_1q = 0.004;     // 1 - F_1Q
  double p_cz = 0.044;     // 1 - F_CZ
  double t_1q_ns = 30.0;
  double t_cz_ns = 31.0;
  double t_st_ns = 180.6;   // full transfer incl. receive swap
  double t_st2_ns = 130.6;  // half transfer
};

struct TierConfig {
  Tier tier = Tier::Ideal;
  bool include_dd = true;  // insert the identity-net dynamical-decoupling pairs
  NoiseParams noise;
  std::vector<device::QubitParams> qubits = device::default_qubits();
  std::vector<device::ChannelParams> channels = device::default_channels();
  bool device_decoherence = true;  // Device tier: include T1/T2
  double device_dt_ns = 0.05;
};

namespace detail {

inline const device::QubitParams& qubit_of(const TierConfig& cfg, const std::string& label) {
  for (const auto& q : cfg.qubits)
    if (q.label == label) return q;
  throw UsageError("tier config: unknown qubit " + label);
}

inline const device::ChannelParams& channel_of(const TierConfig& cfg, const std::string& label) {
  for (const auto& ch : cfg.channels)
    if (ch.label == label) return ch;
  throw UsageError("tier config: unknown channel " + label);
}

inline device::TransferSetup setup_of(const TierConfig& cfg, const std::string& channel_label) {
  const auto& ch = channel_of(cfg, channel_label);
  const auto dash = ch.label.find('-');
  return device::TransferSetup{qubit_of(cfg, ch.label.substr(0, dash)),
                               qubit_of(cfg, ch.label.substr(dash + 1)), ch};
}

// One wall-clock window of the sequence: gates running in parallel, everything
// else idling. Expansion inserts the noisy-tier damping/dephasing and per-gate
// depolarizing events.
struct Window {
  std::vector<Event> ops;
  double duration_ns = 0.0;
  std::vector<std::string> busy;  // qubits driven or transferring in this window
};

inline void targets_of(const Event& ev, std::vector<std::string>& out) {
  if (const Gate* g = std::get_if<Gate>(&ev))
    out.insert(out.end(), g->targets.begin(), g->targets.end());
  else if (const TransferEvent* t = std::get_if<TransferEvent>(&ev)) {
    out.push_back(t->src);
    out.push_back(t->dst);
  }
}

inline Circuit expand(const std::vector<std::string>& qubits, const std::vector<Window>& windows,
                      const TierConfig& cfg) {
  Circuit c;
  c.qubits = qubits;
  const bool noisy = cfg.tier == Tier::NoisyCircuit;
  for (const Window& w : windows) {
    for (const Event& ev : w.ops) {
      c.events.push_back(ev);
      if (!noisy) continue;
      if (const Gate* g = std::get_if<Gate>(&ev)) {
        NoiseEvent depol;
        depol.targets = g->targets;
        depol.depol_p = g->targets.size() == 1 ? cfg.noise.p_1q : cfg.noise.p_cz;
        c.events.push_back(depol);
      }
    }
    if (noisy && w.duration_ns > 0.0) {
      // Damping and dephasing for qubits idling through this window.
      std::vector<std::string> busy;
      for (const Event& ev : w.ops) targets_of(ev, busy);
      for (const auto& q : qubits) {
        bool driven = false;
        for (const auto& b : busy) driven = driven || b == q;
        if (driven) continue;
        const auto& p = qubit_of(cfg, q);
        NoiseEvent idle;
        idle.targets = {q};
        idle.duration_ns = w.duration_ns;
        idle.t1_us = p.t1_us;
        const double rphi = p.pure_dephasing_rate_per_ns();
        idle.tphi_us = rphi > 0.0 ? 1e-3 / rphi : 0.0;
        c.events.push_back(idle);
      }
    }
  }
  return c;
}

inline Gate gx(const std::string& q) { return Gate{GateKind::X, {q}}; }

// The CNOT stage of the sequences: three windows (-Y/2, CZ, Y/2 on the
// target). The paper applies three X gates to `net_x` alongside; the middle
// one is the protocol X (the algebra needs a net X), the outer two are a
// dynamical-decoupling pair and may be dropped.
inline void append_cnot_stage(std::vector<Window>& w, const TierConfig& cfg,
                              const std::string& control, const std::string& target,
                              const std::vector<std::string>& net_x,
                              const std::vector<std::string>& dd_idle = {}) {
  const double t1q = cfg.noise.t_1q_ns, tcz = cfg.noise.t_cz_ns;
  Window w1{{Gate{GateKind::MinusYHalf, {target}}}, t1q, {target}};
  Window w2{{Gate{GateKind::CZ, {control, target}}}, tcz, {control, target}};
  Window w3{{Gate{GateKind::YHalf, {target}}}, t1q, {target}};
  if (cfg.include_dd) {
    for (const auto& q : net_x) {
      w1.ops.push_back(gx(q));
      w3.ops.push_back(gx(q));
    }
    for (const auto& q : dd_idle) {
      w1.ops.push_back(gx(q));
      w3.ops.push_back(gx(q));
    }
  }
  for (const auto& q : net_x) w2.ops.push_back(gx(q));
  w.push_back(std::move(w1));
  w.push_back(std::move(w2));
  w.push_back(std::move(w3));
}

// Transfer window with identity-net DD X pairs on the idling qubits.
inline void append_transfer_stage(std::vector<Window>& w, const TierConfig& cfg,
                                  const std::string& src, const std::string& dst, double theta,
                                  double duration_ns, const std::vector<std::string>& dd_qubits) {
  Window win{{TransferEvent{src, dst, theta}}, duration_ns, {src, dst}};
  if (cfg.include_dd) {
    for (int rep = 0; rep < 4; ++rep)
      for (const auto& q : dd_qubits) win.ops.push_back(gx(q));
  }
  w.push_back(std::move(win));
}

//------------------------------------------------------------------------
// Device-tier building blocks
//------------------------------------------------------------------------

// Bell pair from the Lindblad half transfer, [emitter, receiver].
inline DensityMatrix device_bell_pair(const TierConfig& cfg, const std::string& channel_label) {
  const auto setup = setup_of(cfg, channel_label);
  return device::run_half_transfer(setup, {cfg.device_dt_ns, cfg.device_decoherence}).rho_final;
}

// Single-qubit process of the full transfer, as images of the four basis
// operators |a><b| on the receiver (emitter input, receiver starts in |g>).
struct TransferProcess {
  std::array<ComplexMatrix, 4> image;  // index a*2+b for E(|a><b|)
};

inline DensityMatrix device_transfer_output(const device::TransferSetup& setup,
                                            const ComplexMatrix& emitter_rho,
                                            const TierConfig& cfg) {
  const auto dims = device::device_dims(setup.channel.modes);
  const std::size_t dim = std::size_t{1} << dims.size();
  ComplexMatrix full(dim, dim);
  const std::size_t ebit = dim >> 1;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) full(a ? ebit : 0, b ? ebit : 0) = emitter_rho(a, b);
  device::PulseSchedule schedule;
  const double tau1 = M_PI / (2.0 * setup.channel.g1_rad_ns());
  const double tau2 = M_PI / (2.0 * setup.channel.g2_rad_ns());
  schedule.segments.push_back({tau1, true, false, 0.0, 0.0});
  schedule.segments.push_back({tau2, false, true, 0.0, 0.0});
  const DensityMatrix out = device::lindblad_evolve(
      DensityMatrix(dims, std::move(full)), schedule, setup,
      {cfg.device_dt_ns, cfg.device_decoherence});
  DensityMatrix recv = qmath::partial_trace(out, {1});
  if ((setup.channel.modes + 1) / 2 % 2 == 1) {  // central-mode sign negative
    recv.matrix(0, 1) = -recv.matrix(0, 1);
    recv.matrix(1, 0) = -recv.matrix(1, 0);
  }
  return recv;
}

inline TransferProcess extract_transfer_process(const TierConfig& cfg,
                                                const std::string& channel_label) {
  const auto setup = setup_of(cfg, channel_label);
  auto run = [&](const ComplexMatrix& rho_in) {
    return device_transfer_output(setup, rho_in, cfg).matrix;
  };
  ComplexMatrix g(2, 2), e(2, 2), xp(2, 2), yp(2, 2);
  g(0, 0) = 1.0;
  e(1, 1) = 1.0;
  xp(0, 0) = xp(0, 1) = xp(1, 0) = xp(1, 1) = 0.5;
  yp(0, 0) = yp(1, 1) = 0.5;
  yp(0, 1) = cplx(0.0, -0.5);
  yp(1, 0) = cplx(0.0, 0.5);
  const ComplexMatrix ig = run(g), ie = run(e), ix = run(xp), iy = run(yp);
  TransferProcess p;
  p.image[0] = ig;
  p.image[3] = ie;
  // E(|g><e|) = E(x+) + i E(y+) - (1+i)/2 (E(g) + E(e)), and its adjoint.
  ComplexMatrix ge(2, 2), eg(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const cplx base = ig(i, j) + ie(i, j);
      ge(i, j) = ix(i, j) + cplx(0.0, 1.0) * iy(i, j) - cplx(0.5, 0.5) * base;
    }
  eg = ge.adjoint();
  p.image[1] = ge;
  p.image[2] = eg;
  return p;
}

// Applies the extracted process from qubit `src` onto qubit `dst` (which must
// be in |g>): src is returned to |g>, dst receives the transferred state.
inline void apply_transfer_process(DensityMatrix& rho, const TransferProcess& p, std::size_t src,
                                   std::size_t dst) {
  const std::size_t n = rho.dims.size();
  const std::size_t d = rho.dim();
  const std::size_t sbit = std::size_t{1} << (n - 1 - src);
  const std::size_t dbit = std::size_t{1} << (n - 1 - dst);
  ComplexMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    if (i & (sbit | dbit)) continue;  // rest-index with src = dst = 0
    for (std::size_t j = 0; j < d; ++j) {
      if (j & (sbit | dbit)) continue;
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
          const cplx w = rho.matrix(i | (a ? sbit : 0), j | (b ? sbit : 0));
          if (w == cplx{}) continue;
          const ComplexMatrix& img = p.image[a * 2 + b];
          for (std::size_t cbit = 0; cbit < 2; ++cbit)
            for (std::size_t dbit2 = 0; dbit2 < 2; ++dbit2)
              out(i | (cbit ? dbit : 0), j | (dbit2 ? dbit : 0)) += w * img(cbit, dbit2);
        }
    }
  }
  rho.matrix = std::move(out);
}

}  // namespace detail

//==========================================================================
// GHZ generation
//==========================================================================

// Circuit-tier GHZ-3 sequence on [A2, C1, C2, B2]; C2 is the intra-node
// intermediary that is transferred to B2 at the end.
inline Circuit ghz3_circuit(const TierConfig& cfg) {
  const std::vector<std::string> qubits = {"A2", "C1", "C2", "B2"};
  std::vector<detail::Window> w;
  w.push_back({{detail::gx("A2")}, cfg.noise.t_1q_ns, {"A2"}});
  detail::append_transfer_stage(w, cfg, "A2", "C1", M_PI / 4.0, cfg.noise.t_st2_ns, {});
  detail::append_cnot_stage(w, cfg, "C1", "C2", {"A2"});
  detail::append_transfer_stage(w, cfg, "C2", "B2", M_PI / 2.0, cfg.noise.t_st_ns, {"A2", "C1"});
  return detail::expand(qubits, w, cfg);
}

// State right after the CNOT stage, ideally (|ggg> - |eee>)/sqrt(2) on A2C1C2.
inline DensityMatrix run_ghz3_intermediate(const TierConfig& cfg = {}) {
  const std::vector<std::string> qubits = {"A2", "C1", "C2", "B2"};
  std::vector<detail::Window> w;
  w.push_back({{detail::gx("A2")}, cfg.noise.t_1q_ns, {"A2"}});
  detail::append_transfer_stage(w, cfg, "A2", "C1", M_PI / 4.0, cfg.noise.t_st2_ns, {});
  detail::append_cnot_stage(w, cfg, "C1", "C2", {"A2"});
  const DensityMatrix full = run_circuit(detail::expand(qubits, w, cfg));
  return qmath::partial_trace(full, {0, 1, 2});
}

// GHZ state over [A2, C1, B2].
inline DensityMatrix run_ghz3(const TierConfig& cfg = {}) {
  if (cfg.tier == Tier::Device) {
    const DensityMatrix bell = detail::device_bell_pair(cfg, "A2-C1");  // [A2, C1]
    DensityMatrix rho({2, 2, 2, 2}, ComplexMatrix(16, 16));  // [A2, C1, C2, B2]
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) rho.matrix(i << 2, j << 2) = bell.matrix(i, j);
    for (const Gate& g : cnot("C1", "C2")) apply_gate(rho, g, {"A2", "C1", "C2", "B2"});
    apply_gate(rho, Gate{GateKind::X, {"A2"}}, {"A2", "C1", "C2", "B2"});
    const detail::TransferProcess st = detail::extract_transfer_process(cfg, "C2-B2");
    detail::apply_transfer_process(rho, st, 2, 3);
    return qmath::partial_trace(rho, {0, 1, 3});
  }
  const DensityMatrix full = run_circuit(ghz3_circuit(cfg));
  return qmath::partial_trace(full, {0, 1, 3});
}

// GHZ state over [A2, C1, C2, B2, B1].
inline DensityMatrix run_ghz5(const TierConfig& cfg = {}) {
  if (cfg.tier == Tier::Device) {
    const DensityMatrix ghz3 = run_ghz3(cfg);  // [A2, C1, B2]
    DensityMatrix rho({2, 2, 2, 2, 2}, ComplexMatrix(32, 32));  // [A2, C1, C2, B2, B1]
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) {
        const std::size_t ii = ((i & 6) << 2) | ((i & 1) << 1);
        const std::size_t jj = ((j & 6) << 2) | ((j & 1) << 1);
        rho.matrix(ii, jj) = ghz3.matrix(i, j);
      }
    const std::vector<std::string> order = {"A2", "C1", "C2", "B2", "B1"};
    for (const Gate& g : cnot("C1", "C2")) apply_gate(rho, g, order);
    for (const Gate& g : cnot("B2", "B1")) apply_gate(rho, g, order);
    return rho;
  }
  const std::vector<std::string> qubits = {"A2", "C1", "C2", "B2", "B1"};
  std::vector<detail::Window> w;
  w.push_back({{detail::gx("A2")}, cfg.noise.t_1q_ns, {"A2"}});
  detail::append_transfer_stage(w, cfg, "A2", "C1", M_PI / 4.0, cfg.noise.t_st2_ns, {});
  detail::append_cnot_stage(w, cfg, "C1", "C2", {"A2"});
  detail::append_transfer_stage(w, cfg, "C2", "B2", M_PI / 2.0, cfg.noise.t_st_ns, {"A2", "C1"});
  detail::append_cnot_stage(w, cfg, "C1", "C2", {}, {"A2", "B2"});
  detail::append_cnot_stage(w, cfg, "B2", "B1", {}, {"A2", "C1"});
  return run_circuit(detail::expand(qubits, w, cfg));
}

//==========================================================================
// Entanglement swapping
//==========================================================================

enum class SwapVariant { XHalf, YHalf };

enum class SwapStage { AfterPrep, AfterCnot, Full };

struct SwapConditional {
  double probability = 0.0;
  DensityMatrix rho;  // [A2, B2]
};

using SwapOutcomes = std::map<std::string, SwapConditional>;

namespace detail {

// Swap sequence on [C1, C2, A2, B2] (the supplement's basis ordering), up to
// the requested stage, measurement excluded.
inline Circuit swap_circuit(const TierConfig& cfg, SwapVariant variant, SwapStage stage) {
  const std::vector<std::string> qubits = {"C1", "C2", "A2", "B2"};
  std::vector<Window> w;
  w.push_back({{gx("A2"), gx("C2")}, cfg.noise.t_1q_ns, {"A2", "C2"}});
  append_transfer_stage(w, cfg, "A2", "C1", M_PI / 4.0, cfg.noise.t_st2_ns, {});
  append_transfer_stage(w, cfg, "C2", "B2", M_PI / 4.0, cfg.noise.t_st2_ns, {});
  if (stage != SwapStage::AfterPrep) {
    // Three X gates each on A2 and B2 across this stage: a DD pair plus the
    // protocol X that the output algebra requires.
    append_cnot_stage(w, cfg, "C1", "C2", {}, {"A2", "B2"});
    if (stage == SwapStage::Full) {
      Window basis{{Gate{variant == SwapVariant::XHalf ? GateKind::XHalf : GateKind::YHalf,
                         {"C1"}},
                    gx("A2"), gx("B2")},
                   cfg.noise.t_1q_ns,
                   {"C1", "A2", "B2"}};
      w.push_back(std::move(basis));
    }
  }
  return expand(qubits, w, cfg);
}

inline DensityMatrix swap_initial_state(const TierConfig& cfg) {
  // Device tier: both Bell pairs from the Lindblad half transfers, reordered
  // into [C1, C2, A2, B2].
  const DensityMatrix p1 = device_bell_pair(cfg, "A2-C1");  // [A2, C1]
  const DensityMatrix p2 = device_bell_pair(cfg, "C2-B2");  // [C2, B2]
  ComplexMatrix m(16, 16);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c1 = 0; c1 < 2; ++c1)
      for (std::size_t c2 = 0; c2 < 2; ++c2)
        for (std::size_t b = 0; b < 2; ++b)
          for (std::size_t a2 = 0; a2 < 2; ++a2)
            for (std::size_t c1p = 0; c1p < 2; ++c1p)
              for (std::size_t c2p = 0; c2p < 2; ++c2p)
                for (std::size_t bp = 0; bp < 2; ++bp)
                  m((c1 << 3) | (c2 << 2) | (a << 1) | b,
                    (c1p << 3) | (c2p << 2) | (a2 << 1) | bp) =
                      p1.matrix((a << 1) | c1, (a2 << 1) | c1p) *
                      p2.matrix((c2 << 1) | b, (c2p << 1) | bp);
  return DensityMatrix({2, 2, 2, 2}, std::move(m));
}

}  // namespace detail

// State of [C1, C2, A2, B2] at the given cut of the swap sequence.
inline DensityMatrix run_swap_stage(const TierConfig& cfg, SwapVariant variant, SwapStage stage) {
  if (cfg.tier == Tier::Device) {
    DensityMatrix rho = detail::swap_initial_state(cfg);
    if (stage == SwapStage::AfterPrep) return rho;
    const std::vector<std::string> order = {"C1", "C2", "A2", "B2"};
    for (const Gate& g : cnot("C1", "C2")) apply_gate(rho, g, order);
    if (stage == SwapStage::Full) {
      apply_gate(rho,
                 Gate{variant == SwapVariant::XHalf ? GateKind::XHalf : GateKind::YHalf, {"C1"}},
                 order);
      apply_gate(rho, Gate{GateKind::X, {"A2"}}, order);
      apply_gate(rho, Gate{GateKind::X, {"B2"}}, order);
    }
    return rho;
  }
  return run_circuit(detail::swap_circuit(cfg, variant, stage));
}

// Projective Z measurement of C1C2 and the conditional output states of A2B2.
inline SwapOutcomes run_swap_protocol(const TierConfig& cfg = {},
                                      SwapVariant variant = SwapVariant::XHalf) {
  const DensityMatrix rho = run_swap_stage(cfg, variant, SwapStage::Full);
  SwapOutcomes out;
  const char* names[4] = {"gg", "ge", "eg", "ee"};
  for (std::size_t mn = 0; mn < 4; ++mn) {
    // Project C1C2 on |mn> and trace them out.
    ComplexMatrix cond(4, 4);
    double prob = 0.0;
    const std::size_t base = mn << 2;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) cond(i, j) = rho.matrix(base | i, base | j);
      prob += cond(i, i).real();
    }
    if (prob > 1e-15)
      for (auto& v : cond.data) v /= prob;
    out[names[mn]] = SwapConditional{prob, DensityMatrix({2, 2}, std::move(cond))};
  }
  return out;
}

//==========================================================================
// Entangle-and-measure attack
//==========================================================================

// R_Y(theta_E) on Eve (initialized to |g>) followed by CZ between Bob and
// Eve. Input ordering [A2, C1, B2]; output [A2, C1, B2, Eve].
inline DensityMatrix apply_attack(const DensityMatrix& rho_abc, double theta_e) {
  if (rho_abc.dims != std::vector<std::size_t>{2, 2, 2})
    throw UsageError("apply_attack: expected a three-qubit state");
  ComplexMatrix m(16, 16);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) m(i << 1, j << 1) = rho_abc.matrix(i, j);
  DensityMatrix rho({2, 2, 2, 2}, std::move(m));
  const std::vector<std::string> order = {"A2", "C1", "B2", "E"};
  apply_gate(rho, Gate{GateKind::RY, {"E"}, theta_e}, order);
  apply_gate(rho, Gate{GateKind::CZ, {"B2", "E"}}, order);
  return rho;
}

// The A2C1B2 marginal after the attack on an ideal GHZ state.
inline DensityMatrix attack_rho_abc(double theta_e) {
  std::vector<cplx> amps(8);
  amps[0] = 1.0 / std::sqrt(2.0);
  amps[7] = 1.0 / std::sqrt(2.0);
  const DensityMatrix ghz = DensityMatrix::from_pure(PureState({2, 2, 2}, std::move(amps)));
  return qmath::partial_trace(apply_attack(ghz, theta_e), {0, 1, 2});
}

}  // namespace triqnet::circuits
