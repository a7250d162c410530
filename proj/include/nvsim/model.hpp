#pragma once

// Physical model of the NV electron spin, its first-shell 13C ancilla, the
// optional 14N spectator and the surrounding 13C bath.
//
// Frame: NV symmetry axis (vacancy -> nitrogen, crystal [111]) is z and the
// static field is aligned with it. Bath couplings are kept in the secular
// approximation (only terms conditioned on S_z).

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvsim/linops.hpp"

namespace nvsim {

using Vec3 = std::array<double, 3>;
using Tensor3 = std::array<std::array<double, 3>, 3>;

inline constexpr const char* kElectron = "electron";
inline constexpr const char* kAncilla = "ancilla";
inline constexpr const char* kNitrogen = "n14";

struct N14Coupling {
  double a_parallel_hz = -2.16e6;
  double a_perp_hz = -2.7e6;  // non-secular; dropped by the rotating-frame model
};

struct SystemParams {
  double zero_field_hz = 2.87e9;
  double gamma_e_hz_per_gauss = 2.802e6;
  double gamma_c_hz_per_gauss = 1.071e3;
  double b_gauss = 60.0;
  /// Ancilla hyperfine tensor. The default is a placeholder with the scale of
  /// a first-shell 13C, axially symmetric about the NV axis; real values are
  /// sample specific and must come from configuration.
  Tensor3 ancilla_hyperfine_hz{{{123e6, 0.0, 0.0}, {0.0, 123e6, 0.0}, {0.0, 0.0, 130e6}}};
  double t2n_star_s = 56e-6;
  std::optional<N14Coupling> n14;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  double larmor_hz() const { return gamma_c_hz_per_gauss * b_gauss; }
};

struct BathSpin {
  Vec3 position_angstrom{};
  Vec3 hyperfine_hz{};  // (A_zx, A_zy, A_zz)
};

struct BathConfiguration {
  std::vector<BathSpin> spins;
  /// Secular homonuclear coupling b_ij for i < j, row-major upper triangle.
  std::vector<double> pair_couplings_hz;
  std::uint64_t seed = 0;
  double abundance = 0.0;
  double r_min_angstrom = 0.0;
  double r_max_angstrom = 0.0;

  std::size_t size() const { return spins.size(); }
  /// Coupling for i != j (symmetric access).
  double coupling(std::size_t i, std::size_t j) const;
  /// Bath restricted to `members` (renumbered 0..n-1 in the given order).
  BathConfiguration subset(const std::vector<std::size_t>& members) const;
  /// The (at most) n spins closest to the defect, nearest first; ties keep
  /// the original order.
  BathConfiguration nearest(std::size_t n) const;
};

inline constexpr double kDiamondLatticeConstant = 3.567;  // Angstrom

/// Two-level electron label ("1" = Ms=+1 at index 0, "0" = Ms=0 at index 1)
/// and ancilla label ("1" = m_I=+1/2 at index 0, "0" = m_I=-1/2 at index 1).
int two_qubit_index(int electron_bit, int ancilla_bit);

/// Lab-frame Hamiltonian
///   H = gamma_e B S_z + D S_z^2 + S.A.I + gamma_c B I_z  [+ 14N hyperfine]
/// on electron (spin 1) [x ancilla (spin 1/2)] [x n14 (spin 1)], in Hz.
Operator build_central_hamiltonian(const SystemParams& params, bool include_ancilla, bool include_n14);

/// Restriction of an operator with a spin-1 "electron" subsystem to the
/// Ms in {+1, 0} levels.
Operator project_two_level(const Operator& h);

/// Secular rotating-frame Hamiltonian on the two-level electron space: the
/// projected central Hamiltonian with electron-flip blocks removed and the
/// bare electron level energies (D, gamma_e B) subtracted.
Operator build_system_hamiltonian(const SystemParams& params, bool include_ancilla, bool include_n14);

/// Point-dipole electron-nuclear prefactor (mu0/4pi) gamma_e gamma_c h in Hz A^3.
double hyperfine_prefactor(const SystemParams& params);
/// Homonuclear 13C-13C prefactor (mu0/4pi) gamma_c^2 h in Hz A^3.
double nuclear_dipolar_prefactor(const SystemParams& params);

/// Secular hyperfine row (A_zx, A_zy, A_zz) of a point dipole at `position`.
Vec3 dipolar_hyperfine(const Vec3& position_angstrom, const SystemParams& params);

/// Secular homonuclear coefficient b = prefactor (1 - 3 cos^2 theta) / r^3,
/// theta measured from the NV axis. The pair Hamiltonian is
/// b (I_z I_z - (I_x I_x + I_y I_y)/2).
double nuclear_dipolar(const Vec3& p_i, const Vec3& p_j, const SystemParams& params);

/// Carbon sites of the diamond lattice with r_min <= |r| <= r_max, vacancy at
/// the origin and the nitrogen site excluded, in deterministic order.
std::vector<Vec3> enumerate_lattice_sites(double r_min_angstrom, double r_max_angstrom);

/// Occupies each lattice site independently with probability `abundance`
/// using a generator seeded by `seed`.
BathConfiguration sample_bath(std::uint64_t seed, double abundance, double r_min_angstrom, double r_max_angstrom,
                              const SystemParams& params);

/// Cluster bath Hamiltonian conditioned on the electron level `ms` (0 or 1)
/// in the rotating frame: ms * sum A_i.I_i + nu_L sum I_z,i + pair terms.
/// Subsystems are named "c<index>" after the original bath indices.
Operator build_bath_hamiltonian(const BathConfiguration& bath, const std::vector<std::size_t>& members,
                                const SystemParams& params, int ms);

std::string bath_spin_name(std::size_t index);

}  // namespace nvsim
