#pragma once

// The tower family S = S_0 + sum_k S_k, the sparse operator T_S, sparsity
// certificates, certified maximal-function brackets and the bilinear form
// <T_S f, g>.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mwsparse/bracket.hpp"
#include "mwsparse/measure.hpp"

namespace mwsparse {

class CornerPointError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Towers [c, c + 2^{-N})^n, N >= 0, at corners c = 0 and c = 2^k (1 <= k <= k_max).
class TowerFamily {
 public:
  TowerFamily(int n, int k_max) : n_(n), k_max_(k_max) {
    if (n < 1) throw std::invalid_argument("dimension n must be >= 1");
    if (k_max < 1) throw std::invalid_argument("tower family needs k_max >= 1");
  }

  int dim() const { return n_; }
  int k_max() const { return k_max_; }

  /// Integer corner vectors: index 0 is the origin, index k is (2^k, ..., 2^k).
  std::vector<std::vector<mpz_class>> corners() const {
    std::vector<std::vector<mpz_class>> out;
    out.push_back(diagonal(n_, mpz_class(0)));
    for (int k = 1; k <= k_max_; ++k) out.push_back(diagonal(n_, pow2_int(static_cast<unsigned long>(k))));
    return out;
  }

  /// Tower cube at integer corner c and level N >= 0.
  DyadicCube cube(const std::vector<mpz_class>& corner, long level) const {
    if (level < 0) throw std::invalid_argument("tower levels start at 0");
    std::vector<mpz_class> idx(corner.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      mpz_mul_2exp(idx[i].get_mpz_t(), corner[i].get_mpz_t(), static_cast<mp_bitcnt_t>(level));
    }
    return DyadicCube::from_index(std::move(idx), level);
  }

  /// Corner of the tower holding Q, when Q belongs to the family.
  std::optional<std::vector<mpz_class>> tower_of(const DyadicCube& q) const {
    if (q.dim() != n_ || q.level() < 0) return std::nullopt;
    for (const auto& c : corners()) {
      if (cube(c, q.level()) == q) return c;
    }
    return std::nullopt;
  }

 private:
  int n_;
  int k_max_;
};

/// The tower whose unit block holds x, with the deepest level N_max such that
/// x lies in [c, c + 2^{-N})^n for every N in [0, N_max].
struct TowerHit {
  std::vector<mpz_class> corner;
  long n_max = 0;
};

inline std::vector<TowerHit> towers_containing(const TowerFamily& fam, const Point& x) {
  if (x.dim() != fam.dim()) throw DimensionMismatch("point dimension differs from family");
  std::vector<TowerHit> hits;
  for (const auto& c : fam.corners()) {
    if (!DyadicCube::from_index(c, 0).contains(x)) continue;
    // Largest N with max_i (x_i - c_i) < 2^{-N}.
    std::optional<long> n_max;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const DyadicRational offset = x[i] - DyadicRational(c[i], 0);
      if (offset.numerator() == 0) continue;
      const long bits = static_cast<long>(mpz_sizeinbase(offset.numerator().get_mpz_t(), 2));
      const long level = offset.scale() - bits;
      if (!n_max || level < *n_max) n_max = level;
    }
    if (!n_max) throw CornerPointError("point " + x.str() + " is a tower corner; T_S diverges there");
    hits.push_back({c, *n_max});
  }
  return hits;
}

/// T_S mu(x) = sum over tower cubes Q containing x of mu(Q) / |Q|. The value
/// type follows the measure: exact rationals, or linear forms for measures with
/// symbolic factors.
template <CubeMeasure M>
auto sparse_apply(const TowerFamily& fam, const M& mu, const Point& x) {
  using Value = std::decay_t<decltype(mu.measure(std::declval<const DyadicCube&>()))>;
  Value total{};
  for (const auto& hit : towers_containing(fam, x)) {
    for (long level = 0; level <= hit.n_max; ++level) {
      total += mu.measure(fam.cube(hit.corner, level)) * pow2(level * fam.dim());
    }
  }
  return total;
}

/// Closed form of T_S(w_k) on Q_1^m: 1 + k (B+1)/((2^n - 1) B - 1) (r^m - r),
/// i.e. 1 + k sum_{i=1}^{m-1} r^i.
inline ExactRational sparse_apply_wk_closed(const FractalSpec& spec, long m) {
  if (m < 1) throw std::invalid_argument("closed form needs m >= 1");
  const mpz_class b = spec.branch_count();
  const mpz_class two_n = pow2_int(static_cast<unsigned long>(spec.n()));
  ExactRational lead(b + 1, (two_n - 1) * b - 1);
  lead.canonicalize();
  const ExactRational r = spec.density_ratio();
  return 1 + spec.k() * lead * (pow_rational(r, static_cast<unsigned long>(m)) - r);
}

/// (sum_{P in S, P subset Q} |P|) / |Q| for a tower cube Q: 2^n / (2^n - 1).
inline ExactRational carleson_ratio(const TowerFamily& fam, const DyadicCube& q) {
  if (!fam.tower_of(q)) throw std::invalid_argument("cube " + q.str() + " is not in the tower family");
  const mpz_class two_n = pow2_int(static_cast<unsigned long>(fam.dim()));
  ExactRational r(two_n, two_n - 1);
  r.canonicalize();
  return r;
}

/// E_Q = Q_N minus Q_{N+1}.
struct SparsityEntry {
  DyadicCube cube;
  DyadicCube removed;
  ExactRational e_volume;
  ExactRational ratio;  ///< |E_Q| / |Q|
};

struct SparsityCertificate {
  std::vector<SparsityEntry> entries;
  bool pairwise_disjoint = false;
  bool half_mass = false;  ///< |Q| <= 2 |E_Q| for every entry
  ExactRational min_ratio{1};
};

inline SparsityCertificate sparsity_sets(const TowerFamily& fam, const std::vector<mpz_class>& corner, long n_max) {
  if (n_max < 0) throw std::invalid_argument("N_max must be >= 0");
  if (corner.size() != static_cast<std::size_t>(fam.dim())) throw DimensionMismatch("corner dimension differs");
  SparsityCertificate cert;
  for (long level = 0; level <= n_max; ++level) {
    DyadicCube q = fam.cube(corner, level);
    DyadicCube inner = fam.cube(corner, level + 1);
    if (!q.contains(inner)) throw std::logic_error("tower not nested");
    ExactRational ev = q.volume() - inner.volume();
    ExactRational ratio = ev / q.volume();
    cert.entries.push_back({std::move(q), std::move(inner), std::move(ev), std::move(ratio)});
  }
  cert.half_mass = true;
  cert.pairwise_disjoint = true;
  for (std::size_t i = 0; i < cert.entries.size(); ++i) {
    const auto& e = cert.entries[i];
    cert.min_ratio = std::min(cert.min_ratio, e.ratio);
    if (e.cube.volume() > 2 * e.e_volume) cert.half_mass = false;
    for (std::size_t j = i + 1; j < cert.entries.size(); ++j) {
      // E_j sits inside Q_j, which sits inside the cube removed from Q_i.
      if (!e.removed.contains(cert.entries[j].cube)) cert.pairwise_disjoint = false;
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Maximal function brackets.

struct MaximalPolicy {
  long fine_levels = 64;  ///< levels past the point's own scale searched for stabilization
};

/// sup over j of the average of mu over 3Q_j(x), where Q_j(x) is the level-j
/// dyadic cube containing x. dyadic_best is the sup of the plain Q_j(x)
/// averages, which can exceed `best` when x sits on a cube corner.
struct DilatedSup {
  ExactRational best{0};
  long best_level = 0;
  ExactRational dyadic_best{0};
  std::optional<long> stable_level;  ///< every finer level gives stable_value
  ExactRational stable_value{0};
  long coarse_stop = 0;              ///< last level examined on the coarse side
  bool resolved = false;             ///< false if the fine tail never stabilized

  Bracket bracket() const { return resolved ? Bracket(best) : Bracket::unbounded_above(best); }
};

namespace detail {

/// If x is a corner at level j and mu has constant density on each of the 2^n
/// orthant pieces of 3Q_j(x), the 3Q average is the same for all finer levels.
template <ProfiledMeasure M>
std::optional<ExactRational> orthant_stable_average(const M& mu, const Point& x, long level) {
  const int n = x.dim();
  const DyadicCube home = DyadicCube::containing(x, level);
  ExactRational total(0);
  const unsigned long orthants = 1UL << n;
  for (unsigned long mask = 0; mask < orthants; ++mask) {
    std::optional<ExactRational> density;
    ExactRational weight(1);
    std::vector<std::vector<int>> axis_offsets(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (mask & (1UL << i)) {
        axis_offsets[static_cast<std::size_t>(i)] = {0, 1};
        weight *= ExactRational(2, 3);
      } else {
        axis_offsets[static_cast<std::size_t>(i)] = {-1};
        weight *= ExactRational(1, 3);
      }
    }
    std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
    while (true) {
      std::vector<mpz_class> idx(home.index());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] += axis_offsets[i][pos[i]];
      const CubeProfile p = mu.profile(DyadicCube::from_index(std::move(idx), level));
      if (!p.density) return std::nullopt;
      if (density && *density != *p.density) return std::nullopt;
      density = p.density;
      std::size_t axis = 0;
      while (axis < pos.size() && ++pos[axis] == axis_offsets[axis].size()) pos[axis++] = 0;
      if (axis == pos.size()) break;
    }
    total += weight * *density;
  }
  return total;
}

template <ProfiledMeasure M>
ExactRational dilated_average(const M& mu, const Point& x, long level) {
  ExactRational mass(0);
  for (const auto& cell : DyadicCube::containing(x, level).neighbors3()) mass += mu.measure(cell);
  const ExactRational volume =
      pow2(-level * x.dim()) * pow_rational(ExactRational(3), static_cast<unsigned long>(x.dim()));
  return mass / volume;
}

}  // namespace detail

template <ProfiledMeasure M>
DilatedSup maximal_dilated_sup(const M& mu, const Point& x, const MaximalPolicy& policy = {}) {
  if (x.dim() != mu.dim()) throw DimensionMismatch("point dimension differs from measure");
  DilatedSup out;
  const ExactRational total = mu.total_mass();
  if (total < 0) throw std::invalid_argument("maximal bracket needs a non-negative measure");
  if (total == 0) {
    out.resolved = true;
    out.stable_level = x.scale();
    return out;
  }
  const long first = x.scale();
  long start = first + policy.fine_levels;
  for (long j = first; j <= first + policy.fine_levels; ++j) {
    if (auto v = detail::orthant_stable_average(mu, x, j)) {
      out.stable_level = j;
      out.stable_value = *v;
      start = j;
      break;
    }
  }
  out.resolved = out.stable_level.has_value();
  const int n = x.dim();
  const ExactRational three_n = pow_rational(ExactRational(3), static_cast<unsigned long>(n));
  bool have_best = false;
  for (long j = start;; --j) {
    // Every coarser average is at most total / |Q|, which decreases with j.
    const ExactRational bound = total * pow2(j * n);
    if (have_best && bound / three_n <= out.best && bound <= out.dyadic_best) {
      out.coarse_stop = j;
      break;
    }
    const ExactRational avg = detail::dilated_average(mu, x, j);
    if (!have_best || avg > out.best) {
      out.best = avg;
      out.best_level = j;
      have_best = true;
    }
    const ExactRational own = mu.measure(DyadicCube::containing(x, j)) * pow2(j * n);
    if (own > out.dyadic_best) out.dyadic_best = own;
  }
  if (out.resolved && out.stable_value > out.best) {
    // Cannot happen: the scan starts at the stable level itself.
    throw std::logic_error("stable average exceeds scanned supremum");
  }
  return out;
}

/// Certified bracket for the (uncentred, cube) maximal function M mu (x):
/// [max(dilated sup, dyadic sup), 6^n * dilated sup].
struct MaximalBracket {
  DilatedSup dilated;
  Bracket value;
};

template <ProfiledMeasure M>
MaximalBracket maximal_bracket(const M& mu, const Point& x, const MaximalPolicy& policy = {}) {
  MaximalBracket out{maximal_dilated_sup(mu, x, policy), Bracket()};
  const ExactRational six_n = pow_rational(ExactRational(6), static_cast<unsigned long>(x.dim()));
  const ExactRational lower = std::max(out.dilated.best, out.dilated.dyadic_best);
  if (out.dilated.resolved) {
    out.value = Bracket(lower, out.dilated.best * six_n);
  } else {
    out.value = Bracket::unbounded_above(lower);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bilinear form.

namespace detail {

/// Behaviour of N -> g(Q_N) at one tower corner once N >= threshold:
/// g(Q_{N+period}) = ratio * g(Q_N).
struct EventualGeometric {
  long threshold = 0;
  long period = 1;
  ExactRational ratio{0};
  ExactRational corner_density{0};  ///< density of the piece holding the corner (pieces only)
};

inline EventualGeometric eventual_behaviour(const SimpleFunction& g, const std::vector<mpz_class>& corner) {
  const int n = g.dim();
  EventualGeometric ev;
  ev.ratio = pow2(-n);
  for (const auto& p : g.pieces()) ev.threshold = std::max(ev.threshold, p.cube.level());
  const Point corner_point = [&] {
    std::vector<DyadicRational> c;
    for (const auto& v : corner) c.emplace_back(v, 0);
    return Point(std::move(c));
  }();
  for (const auto& p : g.pieces()) {
    if (p.cube.contains(corner_point)) ev.corner_density = p.density;
  }
  for (const auto& t : g.tails()) {
    if (t.shift != corner) continue;
    ev.threshold = std::max(ev.threshold, static_cast<long>(t.spec.k()) * t.first);
    ev.period = t.spec.k();
    ev.ratio = ExactRational(1, t.spec.branch_count() + 1);
    ev.ratio.canonicalize();
  }
  return ev;
}

}  // namespace detail

/// sum over Q in S of avg_Q(f) * integral_Q g. Returns an exact bracket, or an
/// unbounded one when the corner interaction diverges.
inline Bracket bilinear_form(const TowerFamily& fam, const SimpleFunction& f, const SimpleFunction& g) {
  if (f.dim() != fam.dim() || g.dim() != fam.dim()) throw DimensionMismatch("function dimension differs");
  const int n = fam.dim();
  ExactRational total(0);
  bool divergent = false;
  for (const auto& corner : fam.corners()) {
    const auto ef = detail::eventual_behaviour(f, corner);
    const auto eg = detail::eventual_behaviour(g, corner);
    const long threshold = std::max<long>({ef.threshold, eg.threshold, 0});
    const long period = std::lcm(ef.period, eg.period);
    auto term = [&](long level) -> ExactRational {
      const DyadicCube q = fam.cube(corner, level);
      return f.measure(q) * g.measure(q) * pow2(level * n);
    };
    for (long level = 0; level < threshold; ++level) total += term(level);
    ExactRational block(0);
    for (long level = threshold; level < threshold + period; ++level) block += term(level);
    if (block == 0) continue;
    const ExactRational rho = pow2(period * n) *
                              pow_rational(ef.ratio, static_cast<unsigned long>(period / ef.period)) *
                              pow_rational(eg.ratio, static_cast<unsigned long>(period / eg.period));
    if (rho >= 1) {
      divergent = true;
      continue;
    }
    total += block / (1 - rho);
  }
  if (divergent) return Bracket::unbounded_above(total);
  return Bracket(total);
}

/// integral of (T_S f) g computed pointwise: T_S f is constant on each annulus
/// Q_N minus Q_{N+1}, equal to the running sum of tower averages. Independent
/// route to bilinear_form for functions without chain tails.
inline ExactRational pairing_by_annuli(const TowerFamily& fam, const SimpleFunction& f, const SimpleFunction& g) {
  if (!f.tails().empty() || !g.tails().empty()) {
    throw std::invalid_argument("annulus pairing supports functions without chain tails");
  }
  const int n = fam.dim();
  const ExactRational rho = pow2(-n);
  ExactRational total(0);
  for (const auto& corner : fam.corners()) {
    const auto ef = detail::eventual_behaviour(f, corner);
    const auto eg = detail::eventual_behaviour(g, corner);
    const long threshold = std::max<long>({ef.threshold, eg.threshold, 0});
    ExactRational running(0);
    for (long level = 0; level < threshold; ++level) {
      const DyadicCube q = fam.cube(corner, level);
      running += f.measure(q) * pow2(level * n);
      const ExactRational annulus = g.measure(q) - g.measure(fam.cube(corner, level + 1));
      total += running * annulus;
    }
    // Past the threshold: avg f = d_f on every Q_N, g(annulus_N) = d_g (1 - rho) 2^{-Nn}.
    const ExactRational scale = eg.corner_density * (1 - rho) * pow2(-threshold * n);
    const ExactRational geometric = 1 / (1 - rho);
    total += scale * (running * geometric + ef.corner_density * geometric * geometric);
  }
  return total;
}

}  // namespace mwsparse
