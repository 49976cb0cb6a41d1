#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "triqnet/errors.hpp"
#include "triqnet/qmath.hpp"

// Physical tier: two qubits coupled through the M standing modes of a long
// transmission line, evolved under the Lindblad master equation with the
// measured T1/T2 values. Everything is expressed in the frame rotating at the
// channel's central mode frequency, so a qubit "on resonance" has zero
// detuning and mode m of M carries detuning (m - (M+1)/2) * omega_FSR.
//
// Internal units: time in ns, angular frequencies in rad/ns. Parameter structs
// keep the natural units of the device tables (GHz, MHz, us).
namespace triqnet::device {

using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct QubitParams {
  std::string label;
  double omega_q_ghz = 0.0;  // operating frequency / 2pi
  double t1_us = 0.0;        // energy relaxation
  double t2_us = 0.0;        // total dephasing (Ramsey)
  double f_g = 1.0;          // P(read g | prepared g)
  double f_e = 1.0;          // P(read e | prepared e)
  // Inert metadata, not used by the dynamics.
  double alpha_ghz = 0.0;    // anharmonicity / 2pi
  double chi_ge_mhz = 0.0;   // dispersive shift / 2pi
  double tau_rr_ns = 0.0;    // readout length
  double f_1q = 0.0;         // single-qubit gate fidelity

  void validate() const {
    if (t1_us <= 0.0) throw UsageError("QubitParams " + label + ": T1 must be positive");
    if (t2_us <= 0.0 || t2_us > 2.0 * t1_us + 1e-12)
      throw UsageError("QubitParams " + label + ": need 0 < T2 <= 2*T1");
    if (f_g <= 0.5 || f_g > 1.0 || f_e <= 0.5 || f_e > 1.0)
      throw UsageError("QubitParams " + label + ": readout fidelities must be in (0.5, 1]");
  }

  // 1/T_phi = 1/T2 - 1/(2 T1), in 1/ns.
  double pure_dephasing_rate_per_ns() const {
    const double r = 1.0 / t2_us - 0.5 / t1_us;
    return (r > 0.0 ? r : 0.0) * 1e-3;
  }
  double relaxation_rate_per_ns() const { return 1e-3 / t1_us; }
};

struct ChannelParams {
  std::string label;          // "A2-C1": emitter-receiver endpoints
  double omega_c_ghz = 0.0;   // central communication-mode frequency / 2pi
  double t1_us = 0.0;
  double t2_us = 0.0;
  int modes = 5;              // M, odd
  double fsr_mhz = 50.0;      // free spectral range / 2pi
  double g1_mhz = 2.5;        // emit coupling / 2pi
  double g2_mhz = 3.1;        // receive coupling / 2pi

  void validate() const {
    if (modes < 1 || modes % 2 == 0)
      throw UsageError("ChannelParams " + label + ": mode count must be odd and >= 1");
    if (fsr_mhz <= 0.0) throw UsageError("ChannelParams " + label + ": FSR must be positive");
    if (g1_mhz <= 0.0 || g2_mhz <= 0.0)
      throw UsageError("ChannelParams " + label + ": couplings must be positive");
    if (g1_mhz > 0.25 * fsr_mhz || g2_mhz > 0.25 * fsr_mhz)
      throw UsageError("ChannelParams " + label + ": couplings must be well below the FSR");
    if (t1_us <= 0.0 || t2_us <= 0.0 || t2_us > 2.0 * t1_us + 1e-12)
      throw UsageError("ChannelParams " + label + ": need T1 > 0 and 0 < T2 <= 2*T1");
  }

  double pure_dephasing_rate_per_ns() const {
    const double r = 1.0 / t2_us - 0.5 / t1_us;
    return (r > 0.0 ? r : 0.0) * 1e-3;
  }
  double relaxation_rate_per_ns() const { return 1e-3 / t1_us; }

  double g1_rad_ns() const { return kTwoPi * g1_mhz * 1e-3; }
  double g2_rad_ns() const { return kTwoPi * g2_mhz * 1e-3; }
  double fsr_rad_ns() const { return kTwoPi * fsr_mhz * 1e-3; }
};

// One square segment of the transfer protocol. Detunings are relative to the
// central mode, in MHz (cyclic); couplings switch instantaneously.
struct Segment {
  double duration_ns = 0.0;
  bool g1_on = false;
  bool g2_on = false;
  double detune1_mhz = 0.0;
  double detune2_mhz = 0.0;
};

struct PulseSchedule {
  std::vector<Segment> segments;

  void validate() const {
    for (const Segment& s : segments) {
      if (!(s.duration_ns > 0.0)) throw UsageError("PulseSchedule: segment durations must be > 0");
      if (s.g1_on && s.g2_on && s.detune1_mhz == 0.0 && s.detune2_mhz == 0.0)
        throw UsageError("PulseSchedule: at most one qubit resonant with the channel per segment");
    }
  }

  double total_ns() const {
    double t = 0.0;
    for (const Segment& s : segments) t += s.duration_ns;
    return t;
  }
};

struct TransferResult {
  double eta_t = 0.0;                 // receiver excited-state population
  DensityMatrix rho_final;            // two end qubits, [emitter, receiver]
  std::optional<double> f_bell;       // <psi-|rho|psi-> for half transfers
};

struct TransferSetup {
  QubitParams emitter;
  QubitParams receiver;
  ChannelParams channel;

  void validate() const {
    emitter.validate();
    receiver.validate();
    channel.validate();
  }
};

struct EvolveOptions {
  double dt_ns = 0.05;
  bool decoherence = true;
};

//==========================================================================
// Table S1 / S2 defaults
//==========================================================================

inline std::vector<QubitParams> default_qubits() {
  // label, omega_q, T1, T2, Fg, Fe, alpha, chi_ge, tau_rr, F1Q
  return {
      {"A1", 5.147, 13.0, 0.170, 0.98, 0.93, -0.158, -2.1, 820.0, 0.995},
      {"A2", 4.824, 7.0, 2.6, 0.97, 0.93, -0.167, -2.0, 800.0, 0.994},
      {"B1", 4.799, 15.0, 1.8, 0.99, 0.95, -0.165, -4.2, 720.0, 0.997},
      {"B2", 5.119, 12.0, 1.8, 0.98, 0.90, -0.166, -3.0, 780.0, 0.996},
      {"C1", 4.717, 13.0, 1.7, 0.99, 0.94, -0.170, -3.6, 560.0, 0.996},
      {"C2", 5.111, 10.0, 4.5, 0.99, 0.94, -0.171, -2.6, 520.0, 0.996},
  };
}

inline std::vector<ChannelParams> default_channels() {
  return {
      {"A2-C1", 4.743, 1.2, 2.3, 5, 50.0, 2.5, 3.1},
      {"C2-B2", 5.135, 1.0, 2.0, 5, 50.0, 2.5, 3.1},
      {"B1-A1", 4.905, 1.0, 2.0, 5, 50.0, 2.5, 3.1},
  };
}

inline QubitParams find_qubit(const std::vector<QubitParams>& table, const std::string& label) {
  for (const auto& q : table)
    if (q.label == label) return q;
  throw UsageError("unknown qubit label: " + label);
}

//==========================================================================
// Hamiltonian assembly
//==========================================================================

// Subsystem layout: [emitter qubit, receiver qubit, mode 1 .. mode M], all
// two-level (single-excitation regime). Subsystem 0 is the most significant
// bit of the basis index.
inline std::vector<std::size_t> device_dims(int modes) {
  return std::vector<std::size_t>(static_cast<std::size_t>(modes) + 2, 2);
}

namespace detail {

struct Hop {
  std::uint32_t row;
  std::uint32_t col;
  double value;  // rad/ns, real by construction
};

// Mode m of M (1-based) sits at detuning (m - (M+1)/2) * omega_FSR; the
// receiver coupling alternates sign as (-1)^m across the standing modes.
inline double mode_detuning_rad_ns(const ChannelParams& ch, int m) {
  return (static_cast<double>(m) - 0.5 * (ch.modes + 1)) * ch.fsr_rad_ns();
}

inline double receiver_mode_sign(int m) { return (m % 2 == 1) ? -1.0 : 1.0; }

// Diagonal (number-operator) part of H for one segment, per basis state.
inline std::vector<double> build_diagonal(const ChannelParams& ch, const Segment& seg) {
  const int n_sub = ch.modes + 2;
  const std::size_t dim = std::size_t{1} << n_sub;
  std::vector<double> diag(dim, 0.0);
  const double d1 = kTwoPi * seg.detune1_mhz * 1e-3;
  const double d2 = kTwoPi * seg.detune2_mhz * 1e-3;
  for (std::size_t i = 0; i < dim; ++i) {
    double e = 0.0;
    if ((i >> (n_sub - 1)) & 1) e += d1;
    if ((i >> (n_sub - 2)) & 1) e += d2;
    for (int m = 1; m <= ch.modes; ++m)
      if ((i >> (ch.modes - m)) & 1) e += mode_detuning_rad_ns(ch, m);
    diag[i] = e;
  }
  return diag;
}

// Directed hopping entries (both (i,j) and (j,i)) for the couplings that are
// switched on in this segment.
inline std::vector<Hop> build_hops(const ChannelParams& ch, const Segment& seg) {
  const int n_sub = ch.modes + 2;
  const std::size_t dim = std::size_t{1} << n_sub;
  std::vector<Hop> hops;
  auto add_coupling = [&](int qubit_sub, int m, double g) {
    const std::size_t qbit = std::size_t{1} << (n_sub - 1 - qubit_sub);
    const std::size_t mbit = std::size_t{1} << (ch.modes - m);
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & qbit) && !(i & mbit)) {
        const std::size_t j = (i & ~qbit) | mbit;  // qubit e, mode 0 <-> qubit g, mode 1
        hops.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), g});
        hops.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i), g});
      }
    }
  };
  if (seg.g1_on)
    for (int m = 1; m <= ch.modes; ++m) add_coupling(0, m, ch.g1_rad_ns());
  if (seg.g2_on)
    for (int m = 1; m <= ch.modes; ++m)
      add_coupling(1, m, receiver_mode_sign(m) * ch.g2_rad_ns());
  return hops;
}

}  // namespace detail

// Dense Eq.-S2 Hamiltonian (rad/ns) for one coupling configuration.
inline ComplexMatrix build_hamiltonian(const QubitParams& q1, const QubitParams& q2,
                                       const ChannelParams& ch, bool g1_on, bool g2_on,
                                       double detune1_mhz = 0.0, double detune2_mhz = 0.0) {
  (void)q1;
  (void)q2;
  ch.validate();
  Segment seg{1.0, g1_on, g2_on, detune1_mhz, detune2_mhz};
  const std::vector<double> diag = detail::build_diagonal(ch, seg);
  const std::vector<detail::Hop> hops = detail::build_hops(ch, seg);
  const std::size_t dim = diag.size();
  ComplexMatrix h(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) h(i, i) = diag[i];
  for (const auto& e : hops) h(e.row, e.col) += e.value;
  return h;
}

//==========================================================================
// Lindblad evolution
//==========================================================================

namespace detail {

struct SubsystemNoise {
  std::size_t bit;     // bit mask of this subsystem
  double gamma1;       // relaxation rate, 1/ns
};

class LindbladEngine {
public:
  LindbladEngine(const TransferSetup& setup, const EvolveOptions& opt)
      : setup_(setup), opt_(opt), n_sub_(setup.channel.modes + 2),
        dim_(std::size_t{1} << n_sub_) {
    if (dim_ > qmath::kMaxDim) throw UsageError("device Hilbert space exceeds supported dimension");
    if (opt_.decoherence) {
      const double g1q[2] = {setup.emitter.relaxation_rate_per_ns(),
                             setup.receiver.relaxation_rate_per_ns()};
      const double gphi_q[2] = {setup.emitter.pure_dephasing_rate_per_ns(),
                                setup.receiver.pure_dephasing_rate_per_ns()};
      const double g1c = setup.channel.relaxation_rate_per_ns();
      const double gphi_c = setup.channel.pure_dephasing_rate_per_ns();
      std::vector<double> gamma1(n_sub_), gphi(n_sub_);
      gamma1[0] = g1q[0];
      gamma1[1] = g1q[1];
      gphi[0] = gphi_q[0];
      gphi[1] = gphi_q[1];
      for (int k = 2; k < n_sub_; ++k) {
        gamma1[k] = g1c;  // the measured channel T1/T2 applies to every mode
        gphi[k] = gphi_c;
      }
      // Elementwise decay factor from damping (coherence part) and dephasing.
      decay_.assign(dim_ * dim_, 0.0);
      for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) {
          double a = 0.0;
          for (int k = 0; k < n_sub_; ++k) {
            const std::size_t bit = std::size_t{1} << (n_sub_ - 1 - k);
            const int ni = (i & bit) ? 1 : 0;
            const int nj = (j & bit) ? 1 : 0;
            a -= 0.5 * gamma1[k] * (ni + nj);
            a -= gphi[k] * ((ni + nj) - 2 * ni * nj);  // L = sqrt(2/Tphi) n
          }
          decay_[i * dim_ + j] = a;
        }
      for (int k = 0; k < n_sub_; ++k)
        if (gamma1[k] > 0.0)
          noise_.push_back({std::size_t{1} << (n_sub_ - 1 - k), gamma1[k]});
    }
  }

  std::size_t dim() const { return dim_; }

  void set_segment(const Segment& seg) {
    diag_ = build_diagonal(setup_.channel, seg);
    hops_ = build_hops(setup_.channel, seg);
    // Coherent elementwise factor: decay - i*(diag_i - diag_j).
    cfac_.assign(dim_ * dim_, cplx{});
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        cfac_[i * dim_ + j] =
            cplx(decay_.empty() ? 0.0 : decay_[i * dim_ + j], -(diag_[i] - diag_[j]));
  }

  // d rho/dt
  void rhs(const std::vector<cplx>& rho, std::vector<cplx>& out, std::vector<cplx>& scratch) const {
    const std::size_t d = dim_;
    for (std::size_t idx = 0; idx < d * d; ++idx) out[idx] = cfac_[idx] * rho[idx];

    // B = -i H_off rho, then out += B + B^dagger (valid since H is Hermitian).
    std::fill(scratch.begin(), scratch.end(), cplx{});
    for (const Hop& h : hops_) {
      const cplx alpha(0.0, -h.value);
      const cplx* src = &rho[h.col * d];
      cplx* dst = &scratch[h.row * d];
      for (std::size_t j = 0; j < d; ++j) dst[j] += alpha * src[j];
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        out[i * d + j] += scratch[i * d + j] + std::conj(scratch[j * d + i]);

    // Refill terms L rho L^dagger of the lowering operators.
    for (const SubsystemNoise& s : noise_) {
      for (std::size_t i = 0; i < d; ++i) {
        if (!(i & s.bit)) continue;
        const std::size_t i0 = i & ~s.bit;
        for (std::size_t j = 0; j < d; ++j) {
          if (!(j & s.bit)) continue;
          out[i0 * d + (j & ~s.bit)] += s.gamma1 * rho[i * d + j];
        }
      }
    }
  }

  void evolve(std::vector<cplx>& rho, double duration_ns) const {
    const std::size_t n = dim_ * dim_;
    std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n), scratch(n);
    const long steps = std::lround(std::ceil(duration_ns / opt_.dt_ns - 1e-9));
    const double dt = duration_ns / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      rhs(rho, k1, scratch);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = rho[i] + 0.5 * dt * k1[i];
      rhs(tmp, k2, scratch);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = rho[i] + 0.5 * dt * k2[i];
      rhs(tmp, k3, scratch);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = rho[i] + dt * k3[i];
      rhs(tmp, k4, scratch);
      const double w = dt / 6.0;
      for (std::size_t i = 0; i < n; ++i)
        rho[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }

private:
  TransferSetup setup_;
  EvolveOptions opt_;
  int n_sub_;
  std::size_t dim_;
  std::vector<double> decay_;
  std::vector<SubsystemNoise> noise_;
  std::vector<double> diag_;
  std::vector<Hop> hops_;
  std::vector<cplx> cfac_;
};

}  // namespace detail

inline DensityMatrix lindblad_evolve(const DensityMatrix& rho0, const PulseSchedule& schedule,
                                     const TransferSetup& setup, const EvolveOptions& opt = {}) {
  setup.validate();
  schedule.validate();
  detail::LindbladEngine engine(setup, opt);
  if (rho0.dim() != engine.dim())
    throw UsageError("lindblad_evolve: state dimension does not match the device Hilbert space");

  std::vector<cplx> rho = rho0.matrix.data;
  for (const Segment& seg : schedule.segments) {
    engine.set_segment(seg);
    engine.evolve(rho, seg.duration_ns);
  }

  ComplexMatrix out(engine.dim(), engine.dim());
  out.data = std::move(rho);
  // Enforce the physical invariants; fail loudly if the integrator drifted.
  double tr = 0.0;
  for (std::size_t i = 0; i < out.rows; ++i) tr += out(i, i).real();
  if (!out.is_finite() || std::abs(tr - 1.0) > 1e-6)
    throw NumericalError("lindblad_evolve: trace drift exceeds 1e-6");
  for (std::size_t i = 0; i < out.rows; ++i) {
    out(i, i) = cplx(out(i, i).real() / tr, 0.0);
    for (std::size_t j = i + 1; j < out.cols; ++j) {
      const cplx v = 0.5 * (out(i, j) + std::conj(out(j, i))) / tr;
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
  return DensityMatrix(rho0.dims, std::move(out));
}

namespace detail {

// Transfer protocol: ideal pi pulse on the emitter, then the two swap
// segments. tau1 is pi/2g1 for a full transfer, pi/4g1 for a half transfer.
inline TransferResult run_protocol(const TransferSetup& setup, double tau1_ns,
                                   bool compute_bell, const EvolveOptions& opt) {
  setup.validate();
  const double tau2_ns = M_PI / (2.0 * setup.channel.g2_rad_ns());
  PulseSchedule schedule;
  schedule.segments.push_back({tau1_ns, true, false, 0.0, 0.0});
  schedule.segments.push_back({tau2_ns, false, true, 0.0, 0.0});

  const auto dims = device_dims(setup.channel.modes);
  const std::size_t dim = std::size_t{1} << dims.size();
  const std::size_t excited = dim >> 1;  // emitter bit set, everything else vacuum
  DensityMatrix rho0 = DensityMatrix::from_pure(qmath::PureState::basis(dims, excited));

  DensityMatrix rho = lindblad_evolve(rho0, schedule, setup, opt);

  TransferResult result;
  const std::size_t recv_bit = dim >> 2;
  for (std::size_t i = 0; i < dim; ++i)
    if (i & recv_bit) result.eta_t += rho.matrix(i, i).real();

  DensityMatrix pair = qmath::partial_trace(rho, {0, 1});
  // Receiver frame: fixed Z on the receiving qubit whenever the central-mode
  // coupling sign is negative, so the half transfer produces
  // (|eg> - |ge>)/sqrt(2) in the calibrated frame for every odd M.
  if (receiver_mode_sign((setup.channel.modes + 1) / 2) < 0.0) {
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (((i & 1) + (j & 1)) % 2 == 1) pair.matrix(i, j) = -pair.matrix(i, j);
  }
  if (compute_bell) {
    std::vector<cplx> amps(4);
    amps[2] = 1.0 / std::sqrt(2.0);
    amps[1] = -1.0 / std::sqrt(2.0);
    result.f_bell = qmath::fidelity_pure(pair, qmath::PureState({2, 2}, std::move(amps)));
  }
  result.rho_final = std::move(pair);
  return result;
}

}  // namespace detail

inline TransferResult run_transfer(const TransferSetup& setup, const EvolveOptions& opt = {}) {
  const double tau1 = M_PI / (2.0 * setup.channel.g1_rad_ns());
  return detail::run_protocol(setup, tau1, false, opt);
}

inline TransferResult run_half_transfer(const TransferSetup& setup, const EvolveOptions& opt = {}) {
  const double tau1 = M_PI / (4.0 * setup.channel.g1_rad_ns());
  return detail::run_protocol(setup, tau1, true, opt);
}

//==========================================================================
// Vacuum Rabi chevron (coherent dynamics, emitting qubit only)
//==========================================================================

struct ChevronMap {
  std::vector<double> detunings_mhz;
  std::vector<double> times_ns;
  std::vector<std::vector<double>> p_e;  // [detuning][time]
};

inline ChevronMap rabi_chevron(const QubitParams& q, const ChannelParams& ch,
                               const std::vector<double>& detunings_mhz,
                               const std::vector<double>& times_ns, double dt_ns = 0.05) {
  (void)q;
  ch.validate();
  if (detunings_mhz.empty() || times_ns.empty())
    throw UsageError("rabi_chevron: grids must be non-empty");

  // Qubit plus M modes; Schroedinger evolution of |e, vacuum>.
  const int n_sub = ch.modes + 1;
  const std::size_t dim = std::size_t{1} << n_sub;
  ChevronMap map;
  map.detunings_mhz = detunings_mhz;
  map.times_ns = times_ns;
  map.p_e.resize(detunings_mhz.size());

  for (std::size_t di = 0; di < detunings_mhz.size(); ++di) {
    std::vector<double> diag(dim, 0.0);
    const double dq = kTwoPi * detunings_mhz[di] * 1e-3;
    for (std::size_t i = 0; i < dim; ++i) {
      double e = 0.0;
      if (i >> (n_sub - 1)) e += dq;
      for (int m = 1; m <= ch.modes; ++m)
        if ((i >> (ch.modes - m)) & 1) e += detail::mode_detuning_rad_ns(ch, m);
      diag[i] = e;
    }
    std::vector<detail::Hop> hops;
    const std::size_t qbit = dim >> 1;
    for (int m = 1; m <= ch.modes; ++m) {
      const std::size_t mbit = std::size_t{1} << (ch.modes - m);
      for (std::size_t i = 0; i < dim; ++i)
        if ((i & qbit) && !(i & mbit)) {
          const std::size_t j = (i & ~qbit) | mbit;
          hops.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                          ch.g1_rad_ns()});
          hops.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(i),
                          ch.g1_rad_ns()});
        }
    }

    auto rhs = [&](const std::vector<cplx>& psi, std::vector<cplx>& out) {
      for (std::size_t i = 0; i < dim; ++i) out[i] = cplx(0.0, -diag[i]) * psi[i];
      for (const auto& h : hops) out[h.row] += cplx(0.0, -h.value) * psi[h.col];
    };

    std::vector<cplx> psi(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    psi[qbit] = 1.0;
    map.p_e[di].reserve(times_ns.size());
    double t = 0.0;
    for (double target : times_ns) {
      if (target < t - 1e-12) throw UsageError("rabi_chevron: times must be non-decreasing");
      while (t < target - 1e-12) {
        const double dt = std::min(dt_ns, target - t);
        rhs(psi, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + dt * k3[i];
        rhs(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
          psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += dt;
      }
      double pe = 0.0;
      for (std::size_t i = 0; i < dim; ++i)
        if (i & qbit) pe += std::norm(psi[i]);
      map.p_e[di].push_back(pe);
    }
  }
  return map;
}

}  // namespace triqnet::device
