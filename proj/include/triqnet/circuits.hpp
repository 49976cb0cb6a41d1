#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "triqnet/device.hpp"
#include "triqnet/errors.hpp"
#include "triqnet/qmath.hpp"

// Circuit tier: the gate library and the composite sequences (Bell prep,
// entanglement swapping, GHZ-3/GHZ-5, eavesdropper attack). Gate conventions
// are pinned by the supplement's stated actions:
//   X/2:  |g> -> (|g> - i|e>)/sqrt(2)            (exp(-i pi X/4))
//   Y/2:  |g> -> (|g> + |e>)/sqrt(2)             (exp(-i pi Y/4))
//   -Y/2: |g> -> (|g> - |e>)/sqrt(2)
//   CZ = diag(1,1,1,-1); CNOT = (-Y/2 on target, CZ, Y/2 on target)
//   R_Y(theta): |g> -> cos(theta/2)|g> - sin(theta/2)|e>
//   R_phi(pi/2) = exp(+i pi/4 (cos(phi) X + sin(phi) Y)); phi = pi/2 reads +X
//     (outcome 0 <-> |x+>), phi = 0 reads -Y.
// State transfer inside circuits is the two-iSWAP map: the moved excitation
// acquires a phase flip.
namespace triqnet::circuits {

using qmath::ComplexMatrix;
using qmath::cplx;
using qmath::DensityMatrix;
using qmath::PureState;

enum class GateKind { X, Y, XHalf, YHalf, MinusYHalf, RY, RPhiHalf, CZ, ISwap, Cnot };

struct Gate {
  GateKind kind;
  std::vector<std::string> targets;
  double angle = 0.0;  // RY: rotation angle; RPhiHalf: axis angle phi
};

struct NoiseEvent {
  std::vector<std::string> targets;
  double duration_ns = 0.0;  // idle window for damping/dephasing
  double t1_us = 0.0;        // 0 disables amplitude damping
  double tphi_us = 0.0;      // 0 disables pure dephasing
  double depol_p = 0.0;      // uniform depolarizing probability on targets
};

// src -> dst through the channel; theta = g1*tau1 (pi/2 full, pi/4 half).
struct TransferEvent {
  std::string src;
  std::string dst;
  double theta = M_PI / 2.0;
};

using Event = std::variant<Gate, NoiseEvent, TransferEvent>;

struct Circuit {
  std::vector<std::string> qubits;
  std::vector<Event> events;

  std::size_t index_of(const std::string& label) const {
    for (std::size_t k = 0; k < qubits.size(); ++k)
      if (qubits[k] == label) return k;
    throw UsageError("circuit: unknown qubit label " + label);
  }
};

//==========================================================================
// Single- and two-qubit unitaries
//==========================================================================

namespace detail {

inline ComplexMatrix u_x() {
  ComplexMatrix m(2, 2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline ComplexMatrix u_y() {
  ComplexMatrix m(2, 2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}

inline ComplexMatrix u_xhalf() {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix m(2, 2);
  m(0, 0) = r;
  m(0, 1) = cplx(0.0, -r);
  m(1, 0) = cplx(0.0, -r);
  m(1, 1) = r;
  return m;
}

inline ComplexMatrix u_yhalf(double sign) {
  // sign +1: Y/2, sign -1: -Y/2
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix m(2, 2);
  m(0, 0) = r;
  m(0, 1) = -sign * r;
  m(1, 0) = sign * r;
  m(1, 1) = r;
  return m;
}

inline ComplexMatrix u_ry(double theta) {
  ComplexMatrix m(2, 2);
  m(0, 0) = std::cos(theta / 2.0);
  m(0, 1) = std::sin(theta / 2.0);
  m(1, 0) = -std::sin(theta / 2.0);
  m(1, 1) = std::cos(theta / 2.0);
  return m;
}

inline ComplexMatrix u_rphi_half(double phi) {
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix m(2, 2);
  m(0, 0) = r;
  m(0, 1) = cplx(0.0, r) * std::exp(cplx(0.0, -phi));
  m(1, 0) = cplx(0.0, r) * std::exp(cplx(0.0, phi));
  m(1, 1) = r;
  return m;
}

inline ComplexMatrix u_cz() {
  ComplexMatrix m = ComplexMatrix::identity(4);
  m(3, 3) = -1.0;
  return m;
}

inline ComplexMatrix u_iswap() {
  ComplexMatrix m(4, 4);
  m(0, 0) = 1.0;
  m(1, 2) = cplx(0.0, 1.0);
  m(2, 1) = cplx(0.0, 1.0);
  m(3, 3) = 1.0;
  return m;
}

// Net action of the two-iSWAP state transfer on (src, dst), generalized to a
// partial first swap of angle theta: |eg> -> cos(theta)|eg> - sin(theta)|ge>.
inline ComplexMatrix u_transfer(double theta) {
  ComplexMatrix m(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = std::cos(theta);
  m(2, 1) = std::sin(theta);
  m(1, 2) = -std::sin(theta);
  m(2, 2) = std::cos(theta);
  m(3, 3) = -1.0;
  return m;
}

}  // namespace detail

//==========================================================================
// Applying operations to density matrices (all subsystems qubits)
//==========================================================================

inline void apply_unitary_1q(DensityMatrix& rho, const ComplexMatrix& u, std::size_t qubit) {
  const std::size_t n = rho.dims.size();
  if (qubit >= n) throw UsageError("apply_unitary_1q: qubit index out of range");
  const std::size_t d = rho.dim();
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
  ComplexMatrix& m = rho.matrix;
  // Left multiply by U.
  for (std::size_t i = 0; i < d; ++i) {
    if (i & bit) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const cplx r0 = m(i, j), r1 = m(i | bit, j);
      m(i, j) = u(0, 0) * r0 + u(0, 1) * r1;
      m(i | bit, j) = u(1, 0) * r0 + u(1, 1) * r1;
    }
  }
  // Right multiply by U^dagger.
  for (std::size_t j = 0; j < d; ++j) {
    if (j & bit) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const cplx c0 = m(i, j), c1 = m(i, j | bit);
      m(i, j) = c0 * std::conj(u(0, 0)) + c1 * std::conj(u(0, 1));
      m(i, j | bit) = c0 * std::conj(u(1, 0)) + c1 * std::conj(u(1, 1));
    }
  }
}

inline void apply_unitary_2q(DensityMatrix& rho, const ComplexMatrix& u, std::size_t q_a,
                             std::size_t q_b) {
  const std::size_t n = rho.dims.size();
  if (q_a >= n || q_b >= n || q_a == q_b)
    throw UsageError("apply_unitary_2q: invalid qubit indices");
  const std::size_t d = rho.dim();
  const std::size_t bit_a = std::size_t{1} << (n - 1 - q_a);
  const std::size_t bit_b = std::size_t{1} << (n - 1 - q_b);
  ComplexMatrix& m = rho.matrix;
  auto sub = [&](std::size_t base, std::size_t k) {
    return base | ((k & 2) ? bit_a : 0) | ((k & 1) ? bit_b : 0);
  };
  for (std::size_t i = 0; i < d; ++i) {
    if (i & (bit_a | bit_b)) continue;
    for (std::size_t j = 0; j < d; ++j) {
      cplx r[4];
      for (int k = 0; k < 4; ++k) r[k] = m(sub(i, k), j);
      for (int k = 0; k < 4; ++k) {
        cplx v = 0.0;
        for (int l = 0; l < 4; ++l) v += u(k, l) * r[l];
        m(sub(i, k), j) = v;
      }
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (j & (bit_a | bit_b)) continue;
    for (std::size_t i = 0; i < d; ++i) {
      cplx c[4];
      for (int k = 0; k < 4; ++k) c[k] = m(i, sub(j, k));
      for (int k = 0; k < 4; ++k) {
        cplx v = 0.0;
        for (int l = 0; l < 4; ++l) v += c[l] * std::conj(u(k, l));
        m(i, sub(j, k)) = v;
      }
    }
  }
}

inline void apply_amplitude_damping(DensityMatrix& rho, std::size_t qubit, double gamma) {
  if (gamma <= 0.0) return;
  const std::size_t n = rho.dims.size();
  const std::size_t d = rho.dim();
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
  const double s = std::sqrt(1.0 - gamma);
  ComplexMatrix& m = rho.matrix;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const bool ei = i & bit, ej = j & bit;
      if (ei && ej) continue;
      if (ei != ej) m(i, j) *= s;
    }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(i & bit)) continue;
    for (std::size_t j = 0; j < d; ++j) {
      if (!(j & bit)) continue;
      m(i & ~bit, j & ~bit) += gamma * m(i, j);
      m(i, j) *= 1.0 - gamma;
    }
  }
}

inline void apply_phase_damping(DensityMatrix& rho, std::size_t qubit, double lambda) {
  if (lambda <= 0.0) return;
  const std::size_t n = rho.dims.size();
  const std::size_t d = rho.dim();
  const std::size_t bit = std::size_t{1} << (n - 1 - qubit);
  const double s = std::sqrt(1.0 - lambda);
  ComplexMatrix& m = rho.matrix;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (((i & bit) != 0) != ((j & bit) != 0)) m(i, j) *= s;
}

// Uniform depolarizing on a set of qubits via the Pauli twirl:
// rho -> (1-p) rho + p/4^k sum_P P rho P.
inline void apply_depolarizing(DensityMatrix& rho, const std::vector<std::size_t>& qubits,
                               double p) {
  if (p <= 0.0) return;
  const std::size_t k = qubits.size();
  const std::size_t npauli = std::size_t{1} << (2 * k);
  DensityMatrix mix = rho;
  for (auto& v : mix.matrix.data) v = 0.0;
  ComplexMatrix pz(2, 2);
  pz(0, 0) = 1.0;
  pz(1, 1) = -1.0;
  const ComplexMatrix paulis[4] = {ComplexMatrix::identity(2), detail::u_x(), detail::u_y(), pz};
  for (std::size_t code = 0; code < npauli; ++code) {
    DensityMatrix term = rho;
    std::size_t c = code;
    for (std::size_t q : qubits) {
      const std::size_t which = c & 3;
      c >>= 2;
      if (which != 0) apply_unitary_1q(term, paulis[which], q);
    }
    mix.matrix += term.matrix;
  }
  const double w = p / static_cast<double>(npauli);
  for (std::size_t idx = 0; idx < rho.matrix.data.size(); ++idx)
    rho.matrix.data[idx] = (1.0 - p) * rho.matrix.data[idx] + w * mix.matrix.data[idx];
}

//==========================================================================
// Gate dispatch and circuit execution
//==========================================================================

// CNOT decomposition used on the device: -Y/2 on target, CZ, Y/2 on target.
inline std::vector<Gate> cnot(const std::string& control, const std::string& target) {
  if (control == target) throw UsageError("cnot: control and target must differ");
  return {{GateKind::MinusYHalf, {target}},
          {GateKind::CZ, {control, target}},
          {GateKind::YHalf, {target}}};
}

inline void apply_gate(DensityMatrix& rho, const Gate& g,
                       const std::vector<std::string>& qubit_order) {
  auto idx = [&](const std::string& label) {
    for (std::size_t k = 0; k < qubit_order.size(); ++k)
      if (qubit_order[k] == label) return k;
    throw UsageError("apply_gate: unknown target " + label);
  };
  auto need = [&](std::size_t n) {
    if (g.targets.size() != n) throw UsageError("apply_gate: wrong number of targets");
  };
  switch (g.kind) {
    case GateKind::X: need(1); apply_unitary_1q(rho, detail::u_x(), idx(g.targets[0])); break;
    case GateKind::Y: need(1); apply_unitary_1q(rho, detail::u_y(), idx(g.targets[0])); break;
    case GateKind::XHalf:
      need(1);
      apply_unitary_1q(rho, detail::u_xhalf(), idx(g.targets[0]));
      break;
    case GateKind::YHalf:
      need(1);
      apply_unitary_1q(rho, detail::u_yhalf(1.0), idx(g.targets[0]));
      break;
    case GateKind::MinusYHalf:
      need(1);
      apply_unitary_1q(rho, detail::u_yhalf(-1.0), idx(g.targets[0]));
      break;
    case GateKind::RY: need(1); apply_unitary_1q(rho, detail::u_ry(g.angle), idx(g.targets[0])); break;
    case GateKind::RPhiHalf:
      need(1);
      apply_unitary_1q(rho, detail::u_rphi_half(g.angle), idx(g.targets[0]));
      break;
    case GateKind::CZ:
      need(2);
      apply_unitary_2q(rho, detail::u_cz(), idx(g.targets[0]), idx(g.targets[1]));
      break;
    case GateKind::ISwap:
      need(2);
      apply_unitary_2q(rho, detail::u_iswap(), idx(g.targets[0]), idx(g.targets[1]));
      break;
    case GateKind::Cnot:
      need(2);
      for (const Gate& part : cnot(g.targets[0], g.targets[1])) apply_gate(rho, part, qubit_order);
      break;
  }
}

inline DensityMatrix apply_gate(const DensityMatrix& rho, const Gate& g,
                                const std::vector<std::string>& qubit_order) {
  DensityMatrix out = rho;
  apply_gate(out, g, qubit_order);
  return out;
}

inline void apply_noise(DensityMatrix& rho, const NoiseEvent& ev,
                        const std::vector<std::string>& qubit_order) {
  std::vector<std::size_t> idx;
  for (const auto& t : ev.targets) {
    bool found = false;
    for (std::size_t k = 0; k < qubit_order.size(); ++k)
      if (qubit_order[k] == t) {
        idx.push_back(k);
        found = true;
      }
    if (!found) throw UsageError("apply_noise: unknown target " + t);
  }
  if (ev.duration_ns > 0.0) {
    for (std::size_t q : idx) {
      if (ev.t1_us > 0.0)
        apply_amplitude_damping(rho, q, 1.0 - std::exp(-ev.duration_ns * 1e-3 / ev.t1_us));
      if (ev.tphi_us > 0.0)
        apply_phase_damping(rho, q, 1.0 - std::exp(-2.0 * ev.duration_ns * 1e-3 / ev.tphi_us));
    }
  }
  if (ev.depol_p > 0.0) apply_depolarizing(rho, idx, ev.depol_p);
}

inline void apply_transfer(DensityMatrix& rho, const TransferEvent& ev,
                           const std::vector<std::string>& qubit_order) {
  auto idx = [&](const std::string& label) {
    for (std::size_t k = 0; k < qubit_order.size(); ++k)
      if (qubit_order[k] == label) return k;
    throw UsageError("apply_transfer: unknown target " + label);
  };
  apply_unitary_2q(rho, detail::u_transfer(ev.theta), idx(ev.src), idx(ev.dst));
}

inline DensityMatrix run_circuit(const Circuit& c, const DensityMatrix& initial) {
  if (initial.dims.size() != c.qubits.size())
    throw UsageError("run_circuit: initial state does not match qubit count");
  DensityMatrix rho = initial;
  for (const Event& ev : c.events) {
    if (const Gate* g = std::get_if<Gate>(&ev))
      apply_gate(rho, *g, c.qubits);
    else if (const NoiseEvent* n = std::get_if<NoiseEvent>(&ev))
      apply_noise(rho, *n, c.qubits);
    else
      apply_transfer(rho, std::get<TransferEvent>(ev), c.qubits);
  }
  return rho;
}

inline DensityMatrix run_circuit(const Circuit& c) {
  std::vector<std::size_t> dims(c.qubits.size(), 2);
  return run_circuit(c, DensityMatrix::from_pure(PureState::basis(dims, 0)));
}

//==========================================================================
// Line-oriented text form (one event per line: KIND targets [angle])
//==========================================================================

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string to_text(const Circuit& c) {
  std::string out;
  out += "QUBITS";
  for (const auto& q : c.qubits) out += " " + q;
  out += "\n";
  for (const Event& ev : c.events) {
    if (const Gate* g = std::get_if<Gate>(&ev)) {
      switch (g->kind) {
        case GateKind::X: out += "X"; break;
        case GateKind::Y: out += "Y"; break;
        case GateKind::XHalf: out += "X/2"; break;
        case GateKind::YHalf: out += "Y/2"; break;
        case GateKind::MinusYHalf: out += "-Y/2"; break;
        case GateKind::RY: out += "RY"; break;
        case GateKind::RPhiHalf: out += "RPHI"; break;
        case GateKind::CZ: out += "CZ"; break;
        case GateKind::ISwap: out += "ISWAP"; break;
        case GateKind::Cnot: out += "CNOT"; break;
      }
      for (const auto& t : g->targets) out += " " + t;
      if (g->kind == GateKind::RY || g->kind == GateKind::RPhiHalf)
        out += " " + detail::fmt_double(g->angle);
    } else if (const NoiseEvent* n = std::get_if<NoiseEvent>(&ev)) {
      out += "NOISE";
      for (const auto& t : n->targets) out += " " + t;
      out += " " + detail::fmt_double(n->duration_ns) + " " + detail::fmt_double(n->t1_us) + " " +
             detail::fmt_double(n->tphi_us) + " " + detail::fmt_double(n->depol_p);
    } else {
      const TransferEvent& t = std::get<TransferEvent>(ev);
      out += "ST " + t.src + " " + t.dst + " " + detail::fmt_double(t.theta);
    }
    out += "\n";
  }
  return out;
}

inline Circuit from_text(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    auto angle_of = [](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{}) throw UsageError("circuit text: bad number " + s);
      return v;
    };
    if (kind == "QUBITS") {
      c.qubits = tok;
    } else if (kind == "NOISE") {
      if (tok.size() < 5) throw UsageError("circuit text: NOISE needs targets + 4 numbers");
      NoiseEvent n;
      n.targets.assign(tok.begin(), tok.end() - 4);
      n.duration_ns = angle_of(tok[tok.size() - 4]);
      n.t1_us = angle_of(tok[tok.size() - 3]);
      n.tphi_us = angle_of(tok[tok.size() - 2]);
      n.depol_p = angle_of(tok[tok.size() - 1]);
      c.events.push_back(n);
    } else if (kind == "ST") {
      if (tok.size() != 3) throw UsageError("circuit text: ST src dst theta");
      c.events.push_back(TransferEvent{tok[0], tok[1], angle_of(tok[2])});
    } else {
      Gate g;
      if (kind == "X") g.kind = GateKind::X;
      else if (kind == "Y") g.kind = GateKind::Y;
      else if (kind == "X/2") g.kind = GateKind::XHalf;
      else if (kind == "Y/2") g.kind = GateKind::YHalf;
      else if (kind == "-Y/2") g.kind = GateKind::MinusYHalf;
      else if (kind == "RY") g.kind = GateKind::RY;
      else if (kind == "RPHI") g.kind = GateKind::RPhiHalf;
      else if (kind == "CZ") g.kind = GateKind::CZ;
      else if (kind == "ISWAP") g.kind = GateKind::ISwap;
      else if (kind == "CNOT") g.kind = GateKind::Cnot;
      else throw UsageError("circuit text: unknown event " + kind);
      if (g.kind == GateKind::RY || g.kind == GateKind::RPhiHalf) {
        if (tok.size() != 2) throw UsageError("circuit text: rotation needs target + angle");
        g.targets = {tok[0]};
        g.angle = angle_of(tok[1]);
      } else {
        g.targets = tok;
      }
      c.events.push_back(g);
    }
  }
  if (c.qubits.empty()) throw UsageError("circuit text: missing QUBITS line");
  return c;
}

}  // namespace triqnet::circuits
