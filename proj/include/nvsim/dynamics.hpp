#pragma once

#include <string>
#include <vector>

#include "nvsim/linops.hpp"
#include "nvsim/model.hpp"

namespace nvsim {

/// Ideal instantaneous rotation exp(-i angle axis.S) on one subsystem.
struct Pulse {
  double time_s = 0.0;
  std::string target;
  Vec3 axis{1.0, 0.0, 0.0};
  double angle_rad = 0.0;
};

class PulseSequence {
 public:
  PulseSequence(double duration_s, std::vector<Pulse> pulses, std::string label);

  double duration() const { return duration_; }
  const std::vector<Pulse>& pulses() const { return pulses_; }
  const std::string& label() const { return label_; }

 private:
  double duration_;
  std::vector<Pulse> pulses_;
  std::string label_;
};

PulseSequence make_fid(double duration_s);
/// n pi-x pulses on the electron at t_k = (k - 1/2) duration / n.
PulseSequence make_pdd(int n_pulses, double duration_s);
PulseSequence make_hahn(double duration_s);

enum class SequenceKind { Fid, Hahn, Pdd };

/// Sequence template whose timing scales with the total evolution time, so
/// that each point of a trajectory is its own experiment of length t.
struct SequenceShape {
  SequenceKind kind = SequenceKind::Pdd;
  int n_pulses = 2;

  PulseSequence build(double duration_s) const;
};

/// Preparation of phi- = (|00> - |11>)/sqrt2 by pi(MW4) - pi/2(RF1) - pi(MW4).
struct PreparationSpec {
  /// Nuclear polarization degree: the initial state is |00> with weight
  /// (1 + p)/2 and |01> with weight (1 - p)/2.
  double polarization = 1.0;
  /// Systematic error added to every preparation rotation angle.
  double pulse_angle_error_rad = 0.0;

  void validate() const;
};

/// Two-qubit space electron (Ms=+1, 0) x ancilla (+1/2, -1/2).
SpaceLabel two_qubit_space();
DensityMatrix bell_phi_minus();

DensityMatrix prepare_bell(const PreparationSpec& spec);

struct CalibrationResult {
  PreparationSpec spec;
  double fidelity = 0.0;
  double concurrence = 0.0;
  double cost = 0.0;
};

struct CalibrationGrid {
  int polarization_steps = 201;  // over [0, 1]
  int angle_steps = 361;         // over [-pi/2, pi/2]
};

/// Exhaustive grid search minimizing (F - F*)^2 + (C - C*)^2 over the
/// preparation parameters. Ties keep the first point in scan order
/// (polarization ascending, then angle ascending).
CalibrationResult calibrate_preparation(double target_fidelity, double target_concurrence,
                                        const CalibrationGrid& grid = {});

/// Unitary for an ideal rotation on subsystem `target` of `space`.
Operator rotation(const SpaceLabel& space, const std::string& target, const Vec3& axis, double angle_rad);

/// Piecewise free evolution under `h` interleaved with the sequence's pulses.
/// A pulse whose time is <= a sample time is applied before that sample.
std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const Operator& h, const PulseSequence& seq,
                                  const std::vector<double>& sample_times);

/// Same, with a precomputed free propagator.
std::vector<DensityMatrix> evolve(const DensityMatrix& rho0, const FreePropagator& free, const PulseSequence& seq,
                                  const std::vector<double>& sample_times);

inline constexpr std::size_t kMaxExactBathSpins = 8;

/// Rotating-frame Hamiltonian of system x bath; the system is whatever
/// subset of electron/ancilla/n14 `system_space` contains.
Operator build_coupled_hamiltonian(const SpaceLabel& system_space, const SystemParams& params,
                                   const BathConfiguration& bath);

/// Exact system x bath evolution with the coupled propagator cached, for
/// running many sequences against one bath.
class ExactBathEvolver {
 public:
  ExactBathEvolver(const SpaceLabel& system_space, const SystemParams& params, const BathConfiguration& bath);

  /// Bath starts maximally mixed; states are reduced to the system.
  std::vector<DensityMatrix> run(const DensityMatrix& rho0, const PulseSequence& seq,
                                 const std::vector<double>& sample_times) const;
  /// Electron coherence 2 rho_e(Ms=0, Ms=+1) starting from |+x>; requires an
  /// electron-only system space.
  std::vector<cplx> coherence(const PulseSequence& seq, const std::vector<double>& sample_times) const;

 private:
  SpaceLabel system_space_;
  Operator hamiltonian_;
  FreePropagator free_;
};

/// Exact unitary evolution of system x bath with the bath initially
/// maximally mixed, reduced to the system at each sample time.
std::vector<DensityMatrix> evolve_with_bath(const DensityMatrix& rho0, const SystemParams& params,
                                            const BathConfiguration& bath, const PulseSequence& seq,
                                            const std::vector<double>& sample_times);

/// Electron coherence L(t) = 2 rho_e(Ms=0, Ms=+1) of the reduced electron
/// state, starting from |+x> with a maximally mixed bath (exact method).
std::vector<cplx> exact_bath_coherence(const SystemParams& params, const BathConfiguration& bath,
                                       const PulseSequence& seq, const std::vector<double>& sample_times);

}  // namespace nvsim
