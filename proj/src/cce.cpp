#include "nvsim/cce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nvsim/error.hpp"
#include "nvsim/parallel.hpp"
#include "nvsim/tolerances.hpp"

namespace nvsim {

namespace {

// One coherence evaluation: electron flips at `flips` (all <= t), read out at t.
struct Experiment {
  std::vector<double> flips;
  double t = 0.0;
};

void check_decoupling_pulses(const PulseSequence& seq) {
  for (const auto& p : seq.pulses()) {
    // A pi pulse about any other axis would add a relative phase between the
    // two electron paths that the toggling-frame formula does not carry.
    if (p.target != kElectron || std::abs(p.angle_rad - std::numbers::pi) > 1e-12 ||
        std::abs(p.axis[0] - 1.0) > 1e-12) {
      throw InvalidArgument("CCE supports only ideal electron pi pulses about x");
    }
  }
}

std::vector<Experiment> fixed_sequence_experiments(const PulseSequence& seq, const std::vector<double>& times) {
  check_decoupling_pulses(seq);
  std::vector<Experiment> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!(t >= 0.0 && t <= seq.duration() * (1 + 1e-12))) {
      throw InvalidArgument("coherence sample times must lie within [0, duration]");
    }
    if (k > 0 && t < times[k - 1]) throw InvalidArgument("coherence sample times must be sorted");
    Experiment e{{}, t};
    for (const auto& p : seq.pulses()) {
      if (p.time_s <= t) e.flips.push_back(p.time_s);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Experiment> scaled_experiments(const SequenceShape& shape, const std::vector<double>& times) {
  std::vector<Experiment> out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("coherence sample times must be non-negative");
    if (k > 0 && t < times[k - 1]) throw InvalidArgument("coherence sample times must be sorted");
    Experiment e{{}, t};
    if (t > 0.0) {
      const PulseSequence seq = shape.build(t);
      check_decoupling_pulses(seq);
      for (const auto& p : seq.pulses()) e.flips.push_back(p.time_s);
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Exact coherence of one set of bath spins for each experiment.
std::vector<cplx> subset_coherence(const std::vector<std::size_t>& members, const BathConfiguration& bath,
                                   const SystemParams& params, const std::vector<Experiment>& experiments) {
  const FreePropagator level0(build_bath_hamiltonian(bath, members, params, 0));
  const FreePropagator level1(build_bath_hamiltonian(bath, members, params, 1));
  const int dim = 1 << members.size();
  std::vector<cplx> out;
  out.reserve(experiments.size());
  for (const auto& e : experiments) {
    if (e.t == 0.0) {
      out.emplace_back(1.0);
      continue;
    }
    // Path ending in Ms=0 starts in Ms=0 iff an even number of flips occurred.
    int level_a = e.flips.size() % 2 == 0 ? 0 : 1;
    int level_b = 1 - level_a;
    Matrix va = Matrix::Identity(dim, dim);
    Matrix vb = Matrix::Identity(dim, dim);
    double now = 0.0;
    auto segment = [&](double until) {
      const double dt = until - now;
      if (dt > 0.0) {
        const Matrix u0 = level0.at(dt);
        const Matrix u1 = level1.at(dt);
        va = (level_a == 0 ? u0 : u1) * va;
        vb = (level_b == 0 ? u0 : u1) * vb;
        now = until;
      }
    };
    for (double flip : e.flips) {
      segment(flip);
      level_a = 1 - level_a;
      level_b = 1 - level_b;
    }
    segment(e.t);
    out.push_back((va * vb.adjoint()).trace() / static_cast<double>(dim));
  }
  return out;
}

// Non-empty proper subsets of a sorted member list.
std::vector<std::vector<std::size_t>> proper_subsets(const std::vector<std::size_t>& members) {
  std::vector<std::vector<std::size_t>> out;
  const std::size_t n = members.size();
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) s.push_back(members[k]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

CoherenceCurve run_cce(const BathConfiguration& bath, const SystemParams& params,
                       const std::vector<Experiment>& experiments, const CceOptions& options) {
  const auto clusters = enumerate_clusters(bath, options.max_order, options.pair_cutoff_hz);

  // Every cluster and all of its sub-clusters need a raw coherence.
  std::set<std::vector<std::size_t>> needed;
  for (const auto& c : clusters) {
    needed.insert(c.members);
    for (auto& s : proper_subsets(c.members)) needed.insert(std::move(s));
  }
  std::vector<std::vector<std::size_t>> subsets(needed.begin(), needed.end());
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });

  std::vector<std::vector<cplx>> raw(subsets.size());
  parallel_for(subsets.size(), options.threads,
               [&](std::size_t i) { raw[i] = subset_coherence(subsets[i], bath, params, experiments); });

  const std::size_t nt = experiments.size();
  std::map<std::vector<std::size_t>, std::vector<cplx>> cumulant;
  std::size_t guarded = 0;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    std::vector<cplx> value = raw[i];
    if (subsets[i].size() > 1) {
      std::vector<cplx> denom(nt, cplx(1.0));
      for (const auto& s : proper_subsets(subsets[i])) {
        const auto& sub = cumulant.at(s);
        for (std::size_t k = 0; k < nt; ++k) denom[k] *= sub[k];
      }
      for (std::size_t k = 0; k < nt; ++k) {
        if (std::abs(denom[k]) < tol::kCumulantGuard) {
          value[k] = 1.0;
          ++guarded;
        } else {
          value[k] /= denom[k];
        }
      }
    }
    cumulant.emplace(subsets[i], std::move(value));
  }

  CoherenceCurve curve;
  curve.values.assign(nt, cplx(1.0));
  for (const auto& e : experiments) curve.times.push_back(e.t);
  for (const auto& c : clusters) {
    const auto& v = cumulant.at(c.members);
    for (std::size_t k = 0; k < nt; ++k) curve.values[k] *= v[k];
  }
  std::size_t clamped = 0;
  for (auto& v : curve.values) {
    if (std::abs(v) > 1.0 + tol::kCoherenceExcess) {
      v /= std::abs(v);
      ++clamped;
    }
  }
  if (guarded > 0) {
    curve.warnings.push_back("cumulant division guarded at " + std::to_string(guarded) +
                             " cluster/time points (|denominator| < 1e-8)");
  }
  if (clamped > 0) {
    curve.warnings.push_back("truncated expansion exceeded |L| = 1 at " + std::to_string(clamped) +
                             " time points; rescaled to unit magnitude");
  }
  return curve;
}

}  // namespace

std::vector<Cluster> enumerate_clusters(const BathConfiguration& bath, std::size_t max_order, double pair_cutoff_hz) {
  if (max_order < 1 || max_order > kMaxClusterOrder) {
    throw InvalidArgument("cluster order must lie in [1, " + std::to_string(kMaxClusterOrder) + "]");
  }
  const std::size_t n = bath.size();
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{i}});
  if (max_order == 1 || n < 2) return out;

  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(bath.coupling(i, j)) >= pair_cutoff_hz) {
        neighbours[i].push_back(j);
        neighbours[j].push_back(i);
      }
    }
  }
  std::set<std::vector<std::size_t>> level;
  for (std::size_t i = 0; i < n; ++i) level.insert({i});
  for (std::size_t order = 2; order <= max_order && !level.empty(); ++order) {
    std::set<std::vector<std::size_t>> grown;
    for (const auto& members : level) {
      for (std::size_t m : members) {
        for (std::size_t nb : neighbours[m]) {
          if (std::binary_search(members.begin(), members.end(), nb)) continue;
          auto bigger = members;
          bigger.insert(std::upper_bound(bigger.begin(), bigger.end(), nb), nb);
          grown.insert(std::move(bigger));
        }
      }
    }
    for (const auto& members : grown) out.push_back({members});
    level = std::move(grown);
  }
  return out;
}

CoherenceCurve cluster_coherence(const Cluster& cluster, const BathConfiguration& bath, const SystemParams& params,
                                 const PulseSequence& seq, const std::vector<double>& times) {
  if (cluster.members.empty()) throw InvalidArgument("cluster has no members");
  if (cluster.order() > kMaxClusterOrder) {
    throw InvalidArgument("cluster of order " + std::to_string(cluster.order()) + " is too large for exact evolution");
  }
  if (!std::is_sorted(cluster.members.begin(), cluster.members.end()) ||
      std::adjacent_find(cluster.members.begin(), cluster.members.end()) != cluster.members.end()) {
    throw InvalidArgument("cluster members must be sorted and unique");
  }
  for (std::size_t m : cluster.members) {
    if (m >= bath.size()) throw InvalidArgument("cluster member outside the bath");
  }
  const auto experiments = fixed_sequence_experiments(seq, times);
  CoherenceCurve curve;
  curve.times = times;
  curve.values = subset_coherence(cluster.members, bath, params, experiments);
  return curve;
}

CoherenceCurve cce_coherence(const BathConfiguration& bath, const SystemParams& params, const PulseSequence& seq,
                             const std::vector<double>& times, const CceOptions& options) {
  return run_cce(bath, params, fixed_sequence_experiments(seq, times), options);
}

CoherenceCurve cce_coherence(const BathConfiguration& bath, const SystemParams& params, const SequenceShape& shape,
                             const std::vector<double>& times, const CceOptions& options) {
  return run_cce(bath, params, scaled_experiments(shape, times), options);
}

CoherenceCurve exact_coherence(const BathConfiguration& bath, const SystemParams& params, const SequenceShape& shape,
                               const std::vector<double>& times) {
  const ExactBathEvolver evolver(SpaceLabel{{kElectron, 2}}, params, bath);
  CoherenceCurve curve;
  curve.times = times;
  for (double t : times) {
    if (t == 0.0) {
      curve.values.emplace_back(1.0);
    } else {
      curve.values.push_back(evolver.coherence(shape.build(t), {t}).front());
    }
  }
  return curve;
}

DecayProfile parse_decay_profile(const std::string& name) {
  if (name == "gaussian") return DecayProfile::Gaussian;
  if (name == "exponential") return DecayProfile::Exponential;
  if (name == "none") return DecayProfile::None;
  throw InvalidArgument("unknown decay profile '" + name + "' (expected gaussian|exponential|none)");
}

std::string to_string(DecayProfile profile) {
  switch (profile) {
    case DecayProfile::Gaussian:
      return "gaussian";
    case DecayProfile::Exponential:
      return "exponential";
    case DecayProfile::None:
      return "none";
  }
  return "none";
}

double ancilla_decay_factor(DecayProfile profile, double t, double t2n_star_s) {
  if (!(t2n_star_s > 0.0)) throw InvalidArgument("ancilla T2* must be positive");
  switch (profile) {
    case DecayProfile::Gaussian:
      return std::exp(-(t / t2n_star_s) * (t / t2n_star_s));
    case DecayProfile::Exponential:
      return std::exp(-t / t2n_star_s);
    case DecayProfile::None:
      return 1.0;
  }
  return 1.0;
}

DensityMatrix apply_decay(const DensityMatrix& rho, cplx l, double t, double t2n_star_s, DecayProfile profile) {
  if (!(rho.space() == two_qubit_space())) throw InvalidArgument("apply_decay expects an electron x ancilla state");
  if (std::abs(l) > 1.0 + tol::kCoherenceExcess) throw InvalidArgument("apply_decay: |L| exceeds one");
  const double g = ancilla_decay_factor(profile, t, t2n_star_s);
  Matrix m = rho.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int er = r / 2, ec = c / 2;  // electron index: 0 = Ms+1, 1 = Ms0
      const int nr = r % 2, nc = c % 2;
      cplx f = 1.0;
      if (er == 1 && ec == 0) f *= l;
      if (er == 0 && ec == 1) f *= std::conj(l);
      if (nr != nc) f *= g;
      m(r, c) *= f;
    }
  }
  return DensityMatrix::hermitized(rho.space(), m);
}

std::vector<DensityMatrix> apply_decay(const DensityMatrix& rho0, const CoherenceCurve& curve, double t2n_star_s,
                                       const std::vector<double>& times, DecayProfile profile) {
  if (curve.times.size() != times.size()) throw InvalidArgument("apply_decay: curve and times differ in length");
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (std::abs(curve.times[k] - times[k]) > 1e-15 + 1e-12 * std::abs(times[k])) {
      throw InvalidArgument("apply_decay: curve sample times do not match");
    }
    out.push_back(apply_decay(rho0, curve.values[k], times[k], t2n_star_s, profile));
  }
  return out;
}

}  // namespace nvsim
