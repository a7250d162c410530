// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "nvsim/cce.hpp"
#include "nvsim/config.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/error.hpp"
#include "nvsim/experiment.hpp"
#include "nvsim/metrics.hpp"
#include "nvsim/tomography.hpp"

using namespace nvsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_numerical_errors = 0;
bool g_all_pass = true;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const NumericalError& e) {
    ++g_numerical_errors;
    o = {false, std::string("numerical error: ") + e.what()};
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += fmt("; runtime over %.0f s", limit_s);
  }
  g_all_pass = g_all_pass && o.pass;
  std::printf("criterion %d %s: %s. %s [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

DensityMatrix two_qubit(const Matrix& m) { return DensityMatrix(two_qubit_space(), m); }

Outcome concurrence_oracle() {
  const double s = 1.0 / std::sqrt(2.0);
  Vector phi_plus = Vector::Zero(4);
  phi_plus << s, 0, 0, s;
  const Matrix proj = phi_plus * phi_plus.adjoint();

  double werner_err = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double p = 0.1 * k;
    const Matrix m = p * proj + (1 - p) * Matrix::Identity(4, 4) / 4.0;
    werner_err = std::max(werner_err, std::abs(concurrence(two_qubit(m)) - std::max(0.0, (3 * p - 1) / 2)));
  }

  std::vector<Vector> bells(4, Vector::Zero(4));
  bells[0] << s, 0, 0, s;
  bells[1] << s, 0, 0, -s;
  bells[2] << 0, s, s, 0;
  bells[3] << 0, s, -s, 0;
  double bell_err = 0.0;
  for (const auto& b : bells) bell_err = std::max(bell_err, std::abs(concurrence(DensityMatrix::pure(two_qubit_space(), b)) - 1.0));

  std::mt19937_64 rng(20240601);
  double product_max = 0.0;
  const SpaceLabel e{{kElectron, 2}}, a{{kAncilla, 2}};
  for (int k = 0; k < 1000; ++k) {
    DensityMatrix ra = k % 2 == 0 ? DensityMatrix::pure(e, testing_support::random_ket(rng, 2))
                                  : DensityMatrix(e, testing_support::random_state_matrix(rng, 2));
    DensityMatrix rb = k % 2 == 0 ? DensityMatrix::pure(a, testing_support::random_ket(rng, 2))
                                  : DensityMatrix(a, testing_support::random_state_matrix(rng, 2));
    product_max = std::max(product_max, concurrence(kron(ra, rb)));
  }
  return {werner_err <= 1e-10 && bell_err <= 1e-12 && product_max <= 1e-9,
          fmt("Werner max error %.2e, Bell max error %.2e, product-state max %.2e", werner_err, bell_err, product_max)};
}

Outcome non_markovianity_baseline() {
  std::vector<double> t(200), e(200);
  for (int k = 0; k < 200; ++k) {
    t[k] = 0.5e-6 * k;
    e[k] = std::exp(-t[k] / 20e-6);
  }
  const double monotone = non_markovianity(TimeSeries(t, e), t.front(), t.back()).measure;

  // Linear collapse 1 -> 0, revival 0 -> h, collapse h -> 0: I = 2h.
  double worst_rel = 0.0;
  for (double h : {0.1, 0.25, 0.5}) {
    std::vector<double> ts, es;
    for (int k = 0; k <= 300; ++k) {
      const double x = k / 100.0;
      ts.push_back(x * 1e-5);
      es.push_back(x <= 1 ? 1 - x : (x <= 2 ? h * (x - 1) : h * (3 - x)));
    }
    const double i = non_markovianity(TimeSeries(ts, es), ts.front(), ts.back()).measure;
    worst_rel = std::max(worst_rel, std::abs(i - 2 * h) / (2 * h));
  }
  return {monotone == 0.0 && worst_rel <= 1e-6,
          fmt("monotone I = %g, collapse-revival max relative error %.2e", monotone, worst_rel)};
}

double rms(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double acc = 0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
  return std::sqrt(acc / a.size());
}

struct OracleStats {
  double full_max = 0.0;
  double order2_rms = 0.0;
  std::vector<cplx> first_values;
};

OracleStats cce_vs_exact(const SystemParams& p, int n_seeds) {
  OracleStats st;
  std::vector<double> times;
  for (int k = 0; k <= 75; ++k) times.push_back(2e-6 * k);
  for (int seed = 1; seed <= n_seeds; ++seed) {
    const auto bath = sample_bath(seed, 0.011, 2.0, 10.0, p).nearest(6);
    for (const SequenceShape shape : {SequenceShape{SequenceKind::Hahn, 1}, SequenceShape{SequenceKind::Pdd, 2}}) {
      const auto exact = exact_coherence(bath, p, shape, times);
      const auto full = cce_coherence(bath, p, shape, times, {std::max<std::size_t>(bath.size(), 1), 0.0, 1});
      const auto second = cce_coherence(bath, p, shape, times, {2, 0.0, 1});
      for (std::size_t k = 0; k < times.size(); ++k) {
        st.full_max = std::max(st.full_max, std::abs(full.values[k] - exact.values[k]));
      }
      st.order2_rms = std::max(st.order2_rms, rms(second.values, exact.values));
      if (st.first_values.empty()) st.first_values = full.values;
    }
  }
  return st;
}

bool all_valid(const std::vector<DensityMatrix>& states) {
  for (const auto& s : states) DensityMatrix check(s.space(), s.matrix());  // throws NumericalError
  return true;
}

RunConfig reference_config() { return parse_config(nlohmann::json::object()); }

Outcome decoupling_revival(std::string& fingerprint) {
  const RunConfig c = reference_config();
  const RunResult r = run_experiment(c);
  all_valid(r.states);
  fingerprint = trajectory_csv(r) + report_json(c, r).dump();
  const auto& conc = r.concurrence;
  const double t_larmor = 1.0 / c.system.larmor_hz();

  // Plateau: the first stretch below 0.05 after the initial collapse.
  std::size_t pa = 0;
  while (pa < conc.size() && conc[pa] >= 0.05) ++pa;
  std::size_t pb = pa;
  while (pb < conc.size() && conc[pb] < 0.05) ++pb;
  const bool collapsed = pa < conc.size();
  const double plateau = collapsed ? r.times[pb - 1] - r.times[pa] : 0.0;
  double peak = 0.0, peak_t = 0.0;
  for (std::size_t k = pb; k < conc.size(); ++k) {
    if (conc[k] > peak) peak = conc[k], peak_t = r.times[k];
  }
  const double ratio = peak_t / t_larmor;
  const double nearest = std::round(ratio);
  const bool commensurate = nearest >= 1 && std::abs(ratio - nearest) <= 0.1;
  const std::size_t n_bath = r.bath_sizes.front();
  const bool ok = collapsed && plateau >= 5e-6 && peak >= 0.1 && commensurate && r.report.measure > 0 &&
                  n_bath >= 100 && n_bath <= 300;
  return {ok, fmt("%zu bath spins; prepared F = %.3f, C0 = %.3f; below 0.05 for %.1f us from %.1f us; "
                  "revival to %.3f at %.2f us = %.2f T_L (T_L = %.2f us); I = %.4f",
                  n_bath, r.initial_fidelity, r.initial_concurrence, plateau * 1e6, r.times[pa] * 1e6, peak,
                  peak_t * 1e6, ratio, t_larmor * 1e6, r.report.measure)};
}

RunConfig fid_config(bool with_n14) {
  RunConfig c = reference_config();
  c.sequence = {SequenceKind::Fid, 0, 3e-6, 121};
  c.bath.ensemble = 50;
  if (with_n14) c.system.n14 = N14Coupling{};
  return c;
}

Outcome spectator_oscillation(std::string& fingerprint) {
  const RunConfig with = fid_config(true), without = fid_config(false);
  const RunResult a = run_experiment(with);
  const RunResult b = run_experiment(without);
  all_valid(a.states);
  all_valid(b.states);
  fingerprint = trajectory_csv(a) + trajectory_csv(b);
  const auto amp = [](const RunResult& r) {
    const Revival* best = r.report.largest_revival();
    return best ? best->height : 0.0;
  };
  const double with_amp = amp(a), without_amp = amp(b);
  return {with_amp > 0.05 && without_amp < 0.01,
          fmt("largest trough-to-peak rise %.4f with 14N, %.4f without", with_amp, without_amp)};
}

Outcome fid_t2star() {
  const RunConfig c = fid_config(false);
  const auto times = sample_times(c.sequence);
  const CoherenceCurve l = bath_coherence(c, times);
  const double target = std::exp(-1.0);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double a = std::abs(l.values[k - 1]), b = std::abs(l.values[k]);
    if (a >= target && b < target) {
      const double t = times[k - 1] + (a - target) / (a - b) * (times[k] - times[k - 1]);
      return {t >= 0.1e-6 && t <= 3e-6, fmt("50-seed ensemble 1/e time %.3f us", t * 1e6)};
    }
  }
  return {false, "ensemble coherence never fell below 1/e within 3 us"};
}

struct CoverageResult {
  int covered = 0;
  std::vector<double> fingerprint;
};

CoverageResult coverage(const DensityMatrix& truth, int trials, std::uint64_t seed0) {
  const auto settings = pauli_settings();
  const double c_true = concurrence(truth);
  CoverageResult out;
  for (int k = 0; k < trials; ++k) {
    const auto record = simulate_readout(truth, settings, 1000000, 0.3, seed0 + 2 * k);
    const auto boot = bootstrap_errors(record, settings, 200, seed0 + 2 * k + 1);
    all_valid({boot.estimate});
    if (std::abs(boot.concurrence_corrected - c_true) <= 2 * boot.concurrence_sigma) ++out.covered;
    out.fingerprint.push_back(boot.concurrence_corrected);
    out.fingerprint.push_back(boot.concurrence_sigma);
  }
  return out;
}

Outcome tomography(std::vector<double>& fingerprint) {
  const auto settings = pauli_settings();
  std::mt19937_64 rng(77);
  double worst_f = 1.0;
  for (int k = 0; k < 50; ++k) {
    const DensityMatrix rho = two_qubit(testing_support::random_state_matrix(rng, 4));
    worst_f = std::min(worst_f, uhlmann_fidelity(rho, reconstruct(exact_record(rho, settings), settings)));
  }
  const DensityMatrix prepared = prepare_bell(default_preparation());
  const CoverageResult cov = coverage(prepared, 200, 1000);
  fingerprint = cov.fingerprint;

  // Reported only: rank-deficient mixed states sit on the positivity boundary,
  // where the projected estimator is biased beyond what the bootstrap corrects.
  const DensityMatrix x_state = prepare_bell({0.8, 0.0});
  const DensityMatrix decayed = apply_decay(bell_phi_minus(), cplx(0.6, 0.0), 20e-6, 56e-6);
  std::printf("  info: coverage on the p = 0.8 preparation %d/200, on a decayed phi- %d/200\n",
              coverage(x_state, 200, 5000).covered, coverage(decayed, 200, 9000).covered);

  return {worst_f >= 0.999 && cov.covered >= 180,
          fmt("noiseless worst fidelity %.12f; 2-sigma coverage on the prepared state (C = %.3f) %d/200",
              worst_f, concurrence(prepared), cov.covered)};
}

}  // namespace

int main() {
  const SystemParams p;
  std::string fp4, fp5;
  std::vector<double> fp7;
  OracleStats oracle;

  criterion(1, "concurrence oracle", 5.0, concurrence_oracle);
  criterion(2, "non-Markovianity baseline", 1.0, non_markovianity_baseline);
  criterion(3, "CCE vs exact evolution", 300.0, [&] {
    oracle = cce_vs_exact(p, 20);
    return Outcome{oracle.full_max <= 1e-8 && oracle.order2_rms <= 0.05,
                   fmt("20 baths x {Hahn, PDD2}: full order max error %.2e, order 2 worst RMS %.4f",
                       oracle.full_max, oracle.order2_rms)};
  });
  criterion(4, "PDD2 collapse and revival, default configuration", 600.0, [&] { return decoupling_revival(fp4); });
  criterion(5, "14N spectator oscillation in FID", 0.0, [&] { return spectator_oscillation(fp5); });
  criterion(6, "ensemble FID 1/e time", 0.0, fid_t2star);
  criterion(7, "tomography round trip and bootstrap coverage", 300.0, [&] { return tomography(fp7); });

  criterion(8, "determinism and validity", 0.0, [&] {
    std::string again4, again5;
    decoupling_revival(again4);
    spectator_oscillation(again5);
    const OracleStats again3 = cce_vs_exact(p, 1);
    const CoverageResult again7 = coverage(prepare_bell(default_preparation()), 10, 1000);
    bool same7 = true;
    for (std::size_t i = 0; i < again7.fingerprint.size(); ++i) same7 = same7 && again7.fingerprint[i] == fp7.at(i);
    const bool same = again4 == fp4 && again5 == fp5 && again3.first_values == oracle.first_values && same7;
    return Outcome{same && g_numerical_errors == 0,
                   fmt("repeat runs byte-identical: %s; numerical-validation failures: %d", same ? "yes" : "no",
                       g_numerical_errors)};
  });

  return g_all_pass ? 0 : 1;
}
