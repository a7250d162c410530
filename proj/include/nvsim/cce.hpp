#pragma once

// Cluster correlation expansion of the electron coherence under a sequence of
// ideal electron pi pulses, and the mapping of that coherence (plus a
// phenomenological ancilla decay) onto the two-qubit state.

#include <cstddef>
#include <string>
#include <vector>

#include "nvsim/dynamics.hpp"
#include "nvsim/linops.hpp"
#include "nvsim/model.hpp"

namespace nvsim {

struct Cluster {
  std::vector<std::size_t> members;  // sorted, unique

  std::size_t order() const { return members.size(); }
  bool operator==(const Cluster&) const = default;
  auto operator<=>(const Cluster&) const = default;
};

/// L(t) = tr[U_0(t) rho_B U_1(t)^dagger], where U_0 / U_1 propagate the bath
/// along the electron path that ends in Ms=0 / Ms=+1 at time t. With this
/// orientation L multiplies the rho(Ms=0, Ms=+1) block of the final state.
struct CoherenceCurve {
  std::vector<double> times;
  std::vector<cplx> values;
  std::vector<std::string> warnings;
};

inline constexpr std::size_t kMaxClusterOrder = 8;

/// Singletons plus every connected cluster (edges |b_ij| >= pair_cutoff) of
/// size 2..max_order, sorted by order then lexicographically.
std::vector<Cluster> enumerate_clusters(const BathConfiguration& bath, std::size_t max_order, double pair_cutoff_hz);

/// Exact coherence of one cluster under a fixed sequence sampled at `times`.
CoherenceCurve cluster_coherence(const Cluster& cluster, const BathConfiguration& bath, const SystemParams& params,
                                 const PulseSequence& seq, const std::vector<double>& times);

struct CceOptions {
  std::size_t max_order = 2;
  double pair_cutoff_hz = 10.0;
  int threads = 1;
};

/// L(t) = prod_C L~_C(t) with L~_C = L_C / prod_{S proper subset of C} L~_S,
/// for a fixed sequence sampled at intermediate times.
CoherenceCurve cce_coherence(const BathConfiguration& bath, const SystemParams& params, const PulseSequence& seq,
                             const std::vector<double>& times, const CceOptions& options);

/// As above, but every time point t is its own experiment built from `shape`
/// with total duration t (t = 0 yields L = 1).
CoherenceCurve cce_coherence(const BathConfiguration& bath, const SystemParams& params, const SequenceShape& shape,
                             const std::vector<double>& times, const CceOptions& options);

/// Electron coherence from exact evolution (bath <= 8 spins), per-time
/// experiments built from `shape`.
CoherenceCurve exact_coherence(const BathConfiguration& bath, const SystemParams& params, const SequenceShape& shape,
                               const std::vector<double>& times);

enum class DecayProfile { Gaussian, Exponential, None };

DecayProfile parse_decay_profile(const std::string& name);
std::string to_string(DecayProfile profile);
double ancilla_decay_factor(DecayProfile profile, double t, double t2n_star_s);

/// Multiplies the electron coherence blocks of a two-qubit state by l (and
/// conj(l)) and the ancilla coherences by the decay factor at time t.
DensityMatrix apply_decay(const DensityMatrix& rho, cplx l, double t, double t2n_star_s,
                          DecayProfile profile = DecayProfile::Gaussian);

/// Applies the decay of `curve` to a fixed initial state at each of `times`
/// (which must coincide with the curve's sample times).
std::vector<DensityMatrix> apply_decay(const DensityMatrix& rho0, const CoherenceCurve& curve, double t2n_star_s,
                                       const std::vector<double>& times,
                                       DecayProfile profile = DecayProfile::Gaussian);

}  // namespace nvsim
