#include "nvsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "nvsim/error.hpp"

namespace nvsim {

namespace {

constexpr double kMu0Over4Pi = 1e-7;         // T m / A
constexpr double kPlanck = 6.62607015e-34;   // J s
constexpr double kGaussPerTesla = 1e4;
constexpr double kCubicAngstromPerCubicMetre = 1e30;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(zero_field_hz) && zero_field_hz > 0, "system.zero_field_hz must be positive");
  require(std::isfinite(gamma_e_hz_per_gauss), "system.gamma_e_hz_per_gauss must be finite");
  require(std::isfinite(gamma_c_hz_per_gauss), "system.gamma_c_hz_per_gauss must be finite");
  require(std::isfinite(b_gauss) && b_gauss >= 0, "system.b_gauss must be non-negative");
  require(std::isfinite(t2n_star_s) && t2n_star_s > 0, "system.t2n_star_s must be positive");
  for (const auto& row : ancilla_hyperfine_hz) {
    for (double a : row) require(std::isfinite(a), "system.ancilla_hyperfine_hz must be finite");
  }
  if (n14) {
    require(std::isfinite(n14->a_parallel_hz) && std::isfinite(n14->a_perp_hz),
            "system.n14 couplings must be finite");
  }
}

double BathConfiguration::coupling(std::size_t i, std::size_t j) const {
  if (i == j) throw InvalidArgument("pair coupling requested for a single spin");
  if (i > j) std::swap(i, j);
  const std::size_t n = spins.size();
  return pair_couplings_hz.at(i * n - i * (i + 1) / 2 + (j - i - 1));
}

BathConfiguration BathConfiguration::subset(const std::vector<std::size_t>& members) const {
  BathConfiguration out;
  out.seed = seed;
  out.abundance = abundance;
  out.r_min_angstrom = r_min_angstrom;
  out.r_max_angstrom = r_max_angstrom;
  for (std::size_t m : members) out.spins.push_back(spins.at(m));
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = a + 1; b < members.size(); ++b) {
      out.pair_couplings_hz.push_back(coupling(members[a], members[b]));
    }
  }
  return out;
}

BathConfiguration BathConfiguration::nearest(std::size_t n) const {
  std::vector<std::size_t> order(spins.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto r2 = [&](std::size_t i) {
    const Vec3& r = spins[i].position_angstrom;
    return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r2(a) < r2(b); });
  order.resize(std::min(n, order.size()));
  return subset(order);
}

int two_qubit_index(int electron_bit, int ancilla_bit) {
  require((electron_bit == 0 || electron_bit == 1) && (ancilla_bit == 0 || ancilla_bit == 1),
          "two_qubit_index: bits must be 0 or 1");
  return 2 * (1 - electron_bit) + (1 - ancilla_bit);
}

Operator build_central_hamiltonian(const SystemParams& params, bool include_ancilla, bool include_n14) {
  params.validate();
  if (include_n14 && !params.n14) throw InvalidArgument("14N spectator requested but system.n14 is not set");

  std::vector<Subsystem> subs{{kElectron, 3}};
  if (include_ancilla) subs.push_back({kAncilla, 2});
  if (include_n14) subs.push_back({kNitrogen, 3});
  const SpaceLabel space(subs);

  const auto s = spin_operators(1.0, kElectron);
  const Operator sx = embed(s.x, space);
  const Operator sy = embed(s.y, space);
  const Operator sz = embed(s.z, space);

  Operator h = params.gamma_e_hz_per_gauss * params.b_gauss * sz + params.zero_field_hz * (sz * sz);

  if (include_ancilla) {
    const auto i = spin_operators(0.5, kAncilla);
    const std::array<Operator, 3> svec{sx, sy, sz};
    const std::array<Operator, 3> ivec{embed(i.x, space), embed(i.y, space), embed(i.z, space)};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double coeff = params.ancilla_hyperfine_hz[a][b];
        if (coeff != 0.0) h += coeff * (svec[a] * ivec[b]);
      }
    }
    h += params.gamma_c_hz_per_gauss * params.b_gauss * ivec[2];
  }
  if (include_n14) {
    const auto n = spin_operators(1.0, kNitrogen);
    h += params.n14->a_parallel_hz * (sz * embed(n.z, space));
    h += params.n14->a_perp_hz * (sx * embed(n.x, space) + sy * embed(n.y, space));
  }
  return h;
}

Operator project_two_level(const Operator& h) {
  const SpaceLabel& space = h.space();
  if (!space.contains(kElectron) || space.dim_of(kElectron) != 3) {
    throw InvalidArgument("project_two_level: space has no spin-1 electron subsystem");
  }
  const std::size_t pos = space.position(kElectron);
  int right = 1;
  for (std::size_t i = pos + 1; i < space.size(); ++i) right *= space.subsystems()[i].dim;

  std::vector<Subsystem> subs = space.subsystems();
  subs[pos].dim = 2;
  SpaceLabel out_space(subs);

  std::vector<int> keep;
  for (int idx = 0; idx < space.dim(); ++idx) {
    if ((idx / right) % 3 != 2) keep.push_back(idx);  // drop Ms = -1
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    for (std::size_t c = 0; c < keep.size(); ++c) out(r, c) = h(keep[r], keep[c]);
  }
  return {std::move(out_space), std::move(out)};
}

Operator build_system_hamiltonian(const SystemParams& params, bool include_ancilla, bool include_n14) {
  const Operator projected = project_two_level(build_central_hamiltonian(params, include_ancilla, include_n14));
  const SpaceLabel& space = projected.space();
  const std::size_t pos = space.position(kElectron);
  int right = 1;
  for (std::size_t i = pos + 1; i < space.size(); ++i) right *= space.subsystems()[i].dim;

  const double bare[2] = {params.zero_field_hz + params.gamma_e_hz_per_gauss * params.b_gauss, 0.0};
  Matrix m = projected.matrix();
  for (int r = 0; r < m.rows(); ++r) {
    const int er = (r / right) % 2;
    for (int c = 0; c < m.cols(); ++c) {
      if ((c / right) % 2 != er) m(r, c) = 0.0;
    }
    m(r, r) -= bare[er];
  }
  return {space, std::move(m)};
}

double hyperfine_prefactor(const SystemParams& params) {
  return kMu0Over4Pi * (params.gamma_e_hz_per_gauss * kGaussPerTesla) *
         (params.gamma_c_hz_per_gauss * kGaussPerTesla) * kPlanck * kCubicAngstromPerCubicMetre;
}

double nuclear_dipolar_prefactor(const SystemParams& params) {
  const double g = params.gamma_c_hz_per_gauss * kGaussPerTesla;
  return kMu0Over4Pi * g * g * kPlanck * kCubicAngstromPerCubicMetre;
}

Vec3 dipolar_hyperfine(const Vec3& position, const SystemParams& params) {
  const double r = norm(position);
  if (!(r > 0.0)) throw InvalidArgument("dipolar_hyperfine: zero-length position");
  const double scale = hyperfine_prefactor(params) / (r * r * r);
  const double uz = position[2] / r;
  Vec3 a{};
  for (int k = 0; k < 3; ++k) {
    const double delta = k == 2 ? 1.0 : 0.0;
    a[k] = scale * (delta - 3.0 * uz * position[k] / r);
  }
  return a;
}

double nuclear_dipolar(const Vec3& p_i, const Vec3& p_j, const SystemParams& params) {
  const Vec3 d{p_j[0] - p_i[0], p_j[1] - p_i[1], p_j[2] - p_i[2]};
  const double r = norm(d);
  if (!(r > 0.0)) throw InvalidArgument("nuclear_dipolar: coincident positions");
  const double cos_theta = d[2] / r;
  return nuclear_dipolar_prefactor(params) * (1.0 - 3.0 * cos_theta * cos_theta) / (r * r * r);
}

std::vector<Vec3> enumerate_lattice_sites(double r_min, double r_max) {
  require(r_min > 0 && r_max > r_min, "lattice window requires 0 < r_min < r_max");
  constexpr double a = kDiamondLatticeConstant;
  // Conventional cell: FCC positions plus the (1/4,1/4,1/4) sublattice.
  constexpr double basis[8][3] = {{0, 0, 0},       {0, .5, .5},     {.5, 0, .5},     {.5, .5, 0},
                                  {.25, .25, .25}, {.25, .75, .75}, {.75, .25, .75}, {.75, .75, .25}};
  // Crystal -> NV frame: x = [1-10]/sqrt2, y = [11-2]/sqrt6, z = [111]/sqrt3.
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
  const double rot[3][3] = {{1 / s2, -1 / s2, 0}, {1 / s6, 1 / s6, -2 / s6}, {1 / s3, 1 / s3, 1 / s3}};
  const double nitrogen[3] = {.25 * a, .25 * a, .25 * a};

  const int n = static_cast<int>(std::ceil(r_max / a)) + 1;
  const double hi = r_max * r_max * (1 + 1e-12);
  const double lo = r_min * r_min * (1 - 1e-12);
  std::vector<Vec3> sites;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      for (int k = -n; k <= n; ++k) {
        for (const auto& b : basis) {
          const double c[3] = {(i + b[0]) * a, (j + b[1]) * a, (k + b[2]) * a};
          const double r2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
          if (r2 == 0.0 || r2 < lo || r2 > hi) continue;
          if (c[0] == nitrogen[0] && c[1] == nitrogen[1] && c[2] == nitrogen[2]) continue;
          Vec3 p{};
          for (int row = 0; row < 3; ++row) {
            p[row] = rot[row][0] * c[0] + rot[row][1] * c[1] + rot[row][2] * c[2];
          }
          sites.push_back(p);
        }
      }
    }
  }
  return sites;
}

BathConfiguration sample_bath(std::uint64_t seed, double abundance, double r_min, double r_max,
                              const SystemParams& params) {
  require(abundance >= 0.0 && abundance < 1.0, "bath.abundance must lie in [0, 1)");
  const auto sites = enumerate_lattice_sites(r_min, r_max);
  if (sites.empty()) throw InvalidArgument("sample_bath: empty lattice window");

  BathConfiguration bath;
  bath.seed = seed;
  bath.abundance = abundance;
  bath.r_min_angstrom = r_min;
  bath.r_max_angstrom = r_max;

  std::mt19937_64 rng(seed);
  for (const auto& site : sites) {
    // 53-bit uniform in [0,1) straight from the engine output, which is
    // fully specified by the standard; distributions are not.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < abundance) bath.spins.push_back({site, dipolar_hyperfine(site, params)});
  }
  const std::size_t count = bath.spins.size();
  bath.pair_couplings_hz.reserve(count * (count > 0 ? count - 1 : 0) / 2);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      bath.pair_couplings_hz.push_back(
          nuclear_dipolar(bath.spins[i].position_angstrom, bath.spins[j].position_angstrom, params));
    }
  }
  return bath;
}

std::string bath_spin_name(std::size_t index) { return "c" + std::to_string(index); }

Operator build_bath_hamiltonian(const BathConfiguration& bath, const std::vector<std::size_t>& members,
                                const SystemParams& params, int ms) {
  require(ms == 0 || ms == 1, "build_bath_hamiltonian: ms must be 0 or 1");
  std::vector<Subsystem> subs;
  for (std::size_t m : members) subs.push_back({bath_spin_name(m), 2});
  const SpaceLabel space(subs);
  if (members.empty()) return Operator::zero(space);

  std::vector<SpinOperators> ops;
  for (std::size_t m : members) {
    const auto local = spin_operators(0.5, bath_spin_name(m));
    ops.push_back({embed(local.x, space), embed(local.y, space), embed(local.z, space)});
  }
  Operator h = Operator::zero(space);
  const double larmor = params.larmor_hz();
  for (std::size_t k = 0; k < members.size(); ++k) {
    const Vec3& a = bath.spins.at(members[k]).hyperfine_hz;
    h += larmor * ops[k].z;
    if (ms == 1) h += a[0] * ops[k].x + a[1] * ops[k].y + a[2] * ops[k].z;
  }
  for (std::size_t p = 0; p < members.size(); ++p) {
    for (std::size_t q = p + 1; q < members.size(); ++q) {
      const double b = bath.coupling(members[p], members[q]);
      if (b == 0.0) continue;
      h += b * (ops[p].z * ops[q].z - 0.5 * (ops[p].x * ops[q].x + ops[p].y * ops[q].y));
    }
  }
  return h;
}

}  // namespace nvsim
