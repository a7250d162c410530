#include "nvsim/dynamics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nvsim/error.hpp"
#include "nvsim/metrics.hpp"
#include "nvsim/tolerances.hpp"

namespace nvsim {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

void check_sample_times(const std::vector<double>& times, double duration) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    require(std::isfinite(times[k]), "sample times must be finite");
    require(times[k] >= 0.0 && times[k] <= duration * (1 + 1e-12),
            "sample times must lie within [0, duration]");
    if (k > 0) require(times[k] >= times[k - 1], "sample times must be sorted");
  }
}

// Threads a state through free evolution and pulses, calling `emit` with the
// raw (unvalidated) matrix at each sample time.
template <typename Emit>
void propagate(const Matrix& rho0, const FreePropagator& free, const PulseSequence& seq,
               const std::vector<double>& sample_times, Emit&& emit) {
  const SpaceLabel& space = free.space();
  check_sample_times(sample_times, seq.duration());

  Matrix rho = rho0;
  double now = 0.0;
  std::size_t next_pulse = 0;
  const auto& pulses = seq.pulses();
  auto advance = [&](double t) {
    if (t > now) {
      const Matrix u = free.at(t - now);
      rho = u * rho * u.adjoint();
      now = t;
    }
  };
  for (double t : sample_times) {
    while (next_pulse < pulses.size() && pulses[next_pulse].time_s <= t) {
      const Pulse& p = pulses[next_pulse];
      advance(p.time_s);
      const Matrix u = rotation(space, p.target, p.axis, p.angle_rad).matrix();
      rho = u * rho * u.adjoint();
      ++next_pulse;
    }
    advance(t);
    emit(rho);
  }
}

}  // namespace

PulseSequence::PulseSequence(double duration_s, std::vector<Pulse> pulses, std::string label)
    : duration_(duration_s), pulses_(std::move(pulses)), label_(std::move(label)) {
  require(std::isfinite(duration_) && duration_ > 0.0, "pulse sequence duration must be positive");
  for (std::size_t k = 0; k < pulses_.size(); ++k) {
    const Pulse& p = pulses_[k];
    require(p.time_s >= 0.0 && p.time_s <= duration_, "pulse time outside the sequence duration");
    if (k > 0) require(p.time_s > pulses_[k - 1].time_s, "pulses must be strictly time ordered");
    const double n = std::sqrt(p.axis[0] * p.axis[0] + p.axis[1] * p.axis[1] + p.axis[2] * p.axis[2]);
    require(std::abs(n - 1.0) <= tol::kAxisNorm, "pulse axis must be a unit vector");
    require(!p.target.empty(), "pulse target must be named");
  }
}

PulseSequence make_fid(double duration_s) {
  require(duration_s > 0.0, "make_fid: duration must be positive");
  return {duration_s, {}, "fid"};
}

PulseSequence make_pdd(int n_pulses, double duration_s) {
  require(n_pulses >= 1, "make_pdd: n_pulses must be >= 1");
  require(duration_s > 0.0, "make_pdd: duration must be positive");
  std::vector<Pulse> pulses;
  for (int k = 1; k <= n_pulses; ++k) {
    pulses.push_back({(k - 0.5) * duration_s / n_pulses, kElectron, {1.0, 0.0, 0.0}, kPi});
  }
  return {duration_s, std::move(pulses), "pdd" + std::to_string(n_pulses)};
}

PulseSequence make_hahn(double duration_s) {
  PulseSequence pdd = make_pdd(1, duration_s);
  return {pdd.duration(), pdd.pulses(), "hahn"};
}

PulseSequence SequenceShape::build(double duration_s) const {
  switch (kind) {
    case SequenceKind::Fid:
      return make_fid(duration_s);
    case SequenceKind::Hahn:
      return make_hahn(duration_s);
    case SequenceKind::Pdd:
      return make_pdd(n_pulses, duration_s);
  }
  throw InvalidArgument("unknown sequence kind");
}

void PreparationSpec::validate() const {
  require(std::isfinite(polarization) && polarization >= 0.0 && polarization <= 1.0,
          "preparation.polarization must lie in [0, 1]");
  require(std::isfinite(pulse_angle_error_rad), "preparation.pulse_angle_error_rad must be finite");
}

SpaceLabel two_qubit_space() { return SpaceLabel{{kElectron, 2}, {kAncilla, 2}}; }

DensityMatrix bell_phi_minus() {
  Vector psi = Vector::Zero(4);
  psi(two_qubit_index(0, 0)) = 1.0 / std::sqrt(2.0);
  psi(two_qubit_index(1, 1)) = -1.0 / std::sqrt(2.0);
  return DensityMatrix::pure(two_qubit_space(), psi);
}

Operator rotation(const SpaceLabel& space, const std::string& target, const Vec3& axis, double angle_rad) {
  const int dim = space.dim_of(target);
  double spin = 0.0;
  if (dim == 2) {
    spin = 0.5;
  } else if (dim == 3) {
    spin = 1.0;
  } else {
    throw InvalidArgument("rotation: unsupported subsystem dimension for '" + target + "'");
  }
  const auto s = spin_operators(spin, target);
  const Operator generator = axis[0] * s.x + axis[1] * s.y + axis[2] * s.z;
  return embed(expm_hermitian(generator, angle_rad / (2.0 * kPi)), space);
}

namespace {

// R on `target` when the other qubit sits in `control_index`, identity otherwise.
Matrix conditional_rotation(const std::string& target, int control_index, double angle) {
  const SpaceLabel space = two_qubit_space();
  const bool target_is_electron = target == kElectron;
  const std::string control = target_is_electron ? kAncilla : kElectron;
  const Operator r = rotation(SpaceLabel{{target, 2}}, target, {0.0, 1.0, 0.0}, angle);
  Matrix proj = Matrix::Zero(2, 2);
  proj(control_index, control_index) = 1.0;
  const Operator p{SpaceLabel{{control, 2}}, proj};
  const Operator rest{SpaceLabel{{control, 2}}, Matrix::Identity(2, 2) - proj};
  const Operator id_t = Operator::identity(SpaceLabel{{target, 2}});
  if (target_is_electron) return (kron(r, p) + kron(id_t, rest)).matrix();
  return (kron(p, r) + kron(rest, id_t)).matrix();
}

}  // namespace

DensityMatrix prepare_bell(const PreparationSpec& spec) {
  spec.validate();
  const double p = spec.polarization;
  const double err = spec.pulse_angle_error_rad;
  Matrix rho = Matrix::Zero(4, 4);
  rho(two_qubit_index(0, 0), two_qubit_index(0, 0)) = 0.5 * (1.0 + p);
  rho(two_qubit_index(0, 1), two_qubit_index(0, 1)) = 0.5 * (1.0 - p);

  // MW4: electron flip on the ancilla "0" line; RF1: ancilla rotation in Ms=+1.
  const int ancilla_zero = 1;
  const int electron_one = 0;
  const Matrix mw4 = conditional_rotation(kElectron, ancilla_zero, kPi + err);
  const Matrix rf1 = conditional_rotation(kAncilla, electron_one, kPi / 2 + err);
  const Matrix u = mw4 * rf1 * mw4;
  return DensityMatrix::hermitized(two_qubit_space(), u * rho * u.adjoint());
}

CalibrationResult calibrate_preparation(double target_fidelity, double target_concurrence,
                                        const CalibrationGrid& grid) {
  require(grid.polarization_steps >= 2 && grid.angle_steps >= 2, "calibration grid needs >= 2 steps per axis");
  const DensityMatrix target = bell_phi_minus();
  CalibrationResult best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.polarization_steps; ++i) {
    const double p = static_cast<double>(i) / (grid.polarization_steps - 1);
    for (int j = 0; j < grid.angle_steps; ++j) {
      const double err = -kPi / 2 + kPi * static_cast<double>(j) / (grid.angle_steps - 1);
      const PreparationSpec spec{p, err};
      const DensityMatrix rho = prepare_bell(spec);
      const double f = fidelity(rho, target);
      const double c = concurrence(rho);
      const double cost = (f - target_fidelity) * (f - target_fidelity) +
                          (c - target_concurrence) * (c - target_concurrence);
      if (cost < best.cost) best = {spec, f, c, cost};
    }
  }
  return best;
}

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const FreePropagator& free, const PulseSequence& seq,
                                  const std::vector<double>& sample_times) {
  if (!(rho0.space() == free.space())) throw InvalidArgument("evolve: state and Hamiltonian spaces differ");
  std::vector<DensityMatrix> out;
  out.reserve(sample_times.size());
  propagate(rho0.matrix(), free, seq, sample_times,
            [&](const Matrix& rho) { out.push_back(DensityMatrix::hermitized(rho0.space(), rho)); });
  return out;
}

std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Operator& h, const PulseSequence& seq,
                                  const std::vector<double>& sample_times) {
  if (!(rho0.space() == h.space())) throw InvalidArgument("evolve: state and Hamiltonian spaces differ");
  return evolve(rho0, FreePropagator(h), seq, sample_times);
}

Operator build_coupled_hamiltonian(const SpaceLabel& system_space, const SystemParams& params,
                                   const BathConfiguration& bath) {
  const bool with_ancilla = system_space.contains(kAncilla);
  const bool with_n14 = system_space.contains(kNitrogen);
  const Operator h_sys = build_system_hamiltonian(params, with_ancilla, with_n14);
  if (!(h_sys.space() == system_space)) {
    throw InvalidArgument("system space must be electron[, ancilla][, n14] in that order");
  }
  std::vector<std::size_t> members(bath.size());
  for (std::size_t k = 0; k < members.size(); ++k) members[k] = k;
  const Operator h0 = build_bath_hamiltonian(bath, members, params, 0);
  const Operator h1 = build_bath_hamiltonian(bath, members, params, 1);

  Matrix up = Matrix::Zero(2, 2);
  up(0, 0) = 1.0;  // Ms = +1
  const Operator electron_up = embed(Operator(SpaceLabel{{kElectron, 2}}, up), system_space);
  return kron(h_sys, Operator::identity(h0.space())) + kron(electron_up, h1 - h0) +
         kron(Operator::identity(system_space), h0);
}

namespace {

void check_exact_size(const BathConfiguration& bath) {
  if (bath.size() > kMaxExactBathSpins) {
    std::ostringstream os;
    os << "exact bath evolution: " << bath.size() << " bath spins exceed the limit of " << kMaxExactBathSpins;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

ExactBathEvolver::ExactBathEvolver(const SpaceLabel& system_space, const SystemParams& params,
                                   const BathConfiguration& bath)
    : system_space_(system_space),
      hamiltonian_((check_exact_size(bath), build_coupled_hamiltonian(system_space, params, bath))),
      free_(hamiltonian_) {}

std::vector<DensityMatrix> ExactBathEvolver::run(const DensityMatrix& rho0, const PulseSequence& seq,
                                                 const std::vector<double>& sample_times) const {
  if (!(rho0.space() == system_space_)) throw InvalidArgument("exact bath evolution: state space mismatch");
  const auto& all = hamiltonian_.space().subsystems();
  const SpaceLabel bath_space(std::vector<Subsystem>(all.begin() + static_cast<std::ptrdiff_t>(system_space_.size()),
                                                     all.end()));
  const int bath_dim = bath_space.dim();
  const Operator bath_state(bath_space, Matrix::Identity(bath_dim, bath_dim) / static_cast<double>(bath_dim));
  const Matrix rho_full = kron(rho0.as_operator(), bath_state).matrix();

  std::vector<std::string> keep;
  for (const auto& s : system_space_.subsystems()) keep.push_back(s.name);
  std::vector<DensityMatrix> out;
  out.reserve(sample_times.size());
  propagate(rho_full, free_, seq, sample_times, [&](const Matrix& rho) {
    const Operator reduced = partial_trace(Operator(hamiltonian_.space(), rho), keep);
    out.push_back(DensityMatrix::hermitized(reduced.space(), reduced.matrix()));
  });
  return out;
}

std::vector<cplx> ExactBathEvolver::coherence(const PulseSequence& seq,
                                              const std::vector<double>& sample_times) const {
  const DensityMatrix plus(system_space_, Matrix::Constant(2, 2, 0.5));
  const auto states = run(plus, seq, sample_times);
  std::vector<cplx> out;
  out.reserve(states.size());
  for (const auto& rho : states) out.push_back(2.0 * rho(1, 0));
  return out;
}

std::vector<DensityMatrix> evolve_with_bath(const DensityMatrix& rho0, const SystemParams& params,
                                            const BathConfiguration& bath, const PulseSequence& seq,
                                            const std::vector<double>& sample_times) {
  return ExactBathEvolver(rho0.space(), params, bath).run(rho0, seq, sample_times);
}

std::vector<cplx> exact_bath_coherence(const SystemParams& params, const BathConfiguration& bath,
                                       const PulseSequence& seq, const std::vector<double>& sample_times) {
  return ExactBathEvolver(SpaceLabel{{kElectron, 2}}, params, bath).coherence(seq, sample_times);
}

}  // namespace nvsim
