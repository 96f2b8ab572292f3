#pragma once

// Exploratory probes. They report numbers; none of them asserts a threshold
// beyond internal consistency.

#include <string>
#include <vector>

#include "mwsparse/norms.hpp"
#include "mwsparse/verify.hpp"

namespace mwsparse {

/// T_S(w_k 1_Gamma(k))(x) / T_S(w_k)(x) at x in Q_1^m, computed by tower
/// summation and by the explicit chain sum over N <= k(m-1).
inline ExactRational restricted_ratio(const FractalSpec& spec, long m) {
  const Point x = offset_point(q1_cube(spec, m), 1);
  const TowerFamily fam(spec.n(), 1);
  return sparse_apply(fam, ChainMeasure{spec, 3}, x) / sparse_apply(fam, WkMeasure{spec}, x);
}

inline CheckReport restricted_variant_probe(const FractalSpec& spec, long m) {
  if (m < 3) throw std::invalid_argument("probe needs m >= 3");
  CheckReport r;
  r.claim = "restricted_variant_probe";
  r.params = spec_params(spec);
  r.params["m"] = m;
  const Point x = offset_point(q1_cube(spec, m), 1);
  const TowerFamily fam(spec.n(), 1);
  const ExactRational numerator = sparse_apply(fam, ChainMeasure{spec, 3}, x);
  ExactRational explicit_sum(0);
  for (long level = 0; level <= spec.k() * (m - 1); ++level) {
    explicit_sum += pow2(level * spec.n()) * gamma_restricted_measure(spec, DyadicCube::origin(spec.n(), level));
  }
  const ExactRational denominator = sparse_apply_wk_closed(spec, m);
  r.add(exact_compare("tower sum == explicit chain sum", numerator, "==", explicit_sum, x.str()));
  r.add(report_only("T_S(w_k 1_Gamma)(x) / T_S(w_k)(x)", Bracket(numerator / denominator), "", std::nullopt, x.str()));
  r.lhs = Bracket(numerator);
  r.rhs = Bracket(denominator);
  r.bracket = Bracket(numerator / denominator);
  r.settle();
  r.verdict = r.verdict == Verdict::Fail ? Verdict::Fail : Verdict::ReportOnly;
  return r;
}

/// Ratio table over k in [k_lo, k_hi], m in [m_lo, m_hi]; records whether the
/// ratio decreases in k at each fixed m.
inline CheckReport restricted_variant_scan(int n, int k_lo, int k_hi, long m_lo, long m_hi) {
  CheckReport r;
  r.claim = "restricted_variant_probe";
  r.params = Json{{"n", n}, {"k", {k_lo, k_hi}}, {"m", {m_lo, m_hi}}};
  Json table = Json::array();
  for (long m = m_lo; m <= m_hi; ++m) {
    std::optional<ExactRational> previous;
    bool decreasing = true;
    for (int k = k_lo; k <= k_hi; ++k) {
      const ExactRational ratio = restricted_ratio(FractalSpec(n, k), m);
      table.push_back(Json{{"k", k}, {"m", m}, {"ratio", ratio.get_str()}, {"ratio_approx", ratio.get_d()}});
      if (previous && ratio >= *previous) decreasing = false;
      previous = ratio;
    }
    r.add(report_only("ratio decreasing in k", Bracket(ExactRational(decreasing ? 1 : 0)), "", std::nullopt,
                      "m=" + std::to_string(m)));
  }
  r.extra["table"] = table;
  r.lhs = Bracket(restricted_ratio(FractalSpec(n, k_lo), m_lo));
  r.rhs = Bracket(restricted_ratio(FractalSpec(n, k_hi), m_lo));
  r.verdict = Verdict::ReportOnly;
  return r;
}

struct RayleighRow {
  long K = 0;
  Bracket full;        ///< (sum block Tf integrals / sum block f-norms)^{1/p'}, full f
  Bracket restricted;  ///< same with f restricted to the chains
};

/// Rayleigh ratios ||T_S g|| / ||g|| in L^{p'}(w^{1-p'}) for g = f truncated
/// to blocks k <= K. By duality and self-adjointness these are the L^p(w)
/// ratios of the adjoint problem. T_S g on block k only sees block k, so the
/// numerator is a sum of per-block integrals (lower bounds, see direct_block_tf).
inline std::vector<RayleighRow> one_weight_rows(const AggregateSpec& agg, const std::vector<long>& K) {
  require_sorted_k(K);
  if (K.back() > agg.k_max()) throw std::invalid_argument("truncation K exceeds k_max");
  const long prec = agg.precision_bits();
  const ExactRational dual = agg.dual_exponent();
  const ExactRational inv = 1 / dual;
  std::vector<RayleighRow> rows;
  Bracket num_full(ExactRational(0)), num_restricted(ExactRational(0)), den(ExactRational(0));
  long k = 3;
  for (long target : K) {
    for (; k <= target; ++k) {
      num_full += direct_block_tf(agg, static_cast<int>(k), false);
      num_restricted += direct_block_tf(agg, static_cast<int>(k), true);
      den += direct_block_f_norm(agg, static_cast<int>(k));
    }
    rows.push_back({target, power(num_full / den, inv, prec), power(num_restricted / den, inv, prec)});
  }
  return rows;
}

inline CheckReport one_weight_probe(const AggregateSpec& agg, const std::vector<long>& K) {
  CheckReport r;
  r.claim = "one_weight_probe";
  r.params = agg_params(agg);
  r.params["K"] = K;
  const auto rows = one_weight_rows(agg, K);
  const long prec = agg.precision_bits();
  const ExactRational dual = agg.dual_exponent();
  Json table = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.push_back(Json{{"K", rows[i].K},
                         {"ratio_full", bracket_json(rows[i].full)},
                         {"ratio_restricted", bracket_json(rows[i].restricted)}});
    if (i > 0) {
      const bool grows = rows[i - 1].full.hi() && *rows[i - 1].full.hi() < rows[i].full.lo();
      r.add(report_only("full-f ratio increases with K", Bracket(ExactRational(grows ? 1 : 0)), "", std::nullopt,
                        "K=" + std::to_string(rows[i].K)));
    }
  }
  // One block: the ratio^{p'} is at least c_n k^{p'} (Lemma 2 on every chain cube).
  const int k = 3;
  const Bracket single = direct_block_tf(agg, k, false) / direct_block_f_norm(agg, k);
  const Bracket bound = lower_bound_constant(agg.n(), dual, prec) * power(ExactRational(k), dual, prec);
  r.add(bracket_le("one block: c_n k^{p'} <= ratio^{p'}", bound, single, false, "k=3"));
  // Indicator of 2^k + Q_1^3: T_S g is constant on 2^k + Gamma(k), so the ratio is a finite closed form.
  {
    const FractalSpec spec = agg.block_spec(k);
    const DyadicCube cell = q1_cube(spec, 3);
    const ExactRational a = a_k(spec);
    const int n = agg.n();
    ExactRational value(0);
    for (long level = 0; level <= 2L * k; ++level) value += pow2(level * n) * cell.volume();
    SimpleFunction g(n);
    g.add_piece(cell.shifted(agg.block_shift(k)), 1);
    const TowerFamily fam(n, agg.k_max());
    const Point x = block_point(agg, k, offset_point(q1_cube(spec, 5), 1));
    r.add(exact_compare("T_S g on the chain == closed value", sparse_apply(fam, g, x), "==", value, x.str()));
    // sum_{m>=3} |Q_1^m| (A_k r^m)^{1-p'} = A^{1-p'} rho^3/(1-rho), rho = 2^{-kn} r^{1-p'}
    const Bracket rho = power(spec.density_ratio(), 1 - dual, prec) * pow2(-k * n);
    auto geometric = [](const ExactRational& q) -> ExactRational { return pow_rational(q, 3) / (1 - q); };
    if (!rho.hi() || *rho.hi() >= 1) throw std::logic_error("indicator probe: ratio not below 1");
    const Bracket tail(geometric(rho.lo()), geometric(*rho.hi()));
    const Bracket numerator = power(value, dual, prec) * power(a, 1 - dual, prec) * tail;
    const Bracket norm = power(a * spec.frozen_density(3), 1 - dual, prec) * cell.volume();
    const Bracket ratio = power(numerator / norm, 1 / dual, prec);
    r.add(report_only("indicator of 2^k + Q_1^3: ratio", ratio, "", std::nullopt, cell.str()));
    r.extra["indicator_ratio"] = bracket_json(ratio);
  }
  r.extra["table"] = table;
  r.lhs = rows.front().full;
  r.rhs = rows.back().full;
  r.bracket = rows.back().full;
  r.notes.push_back("ratios measured in L^{p'}(w^{1-p'}); numerators are certified lower bounds");
  r.settle();
  r.verdict = r.verdict == Verdict::Fail ? Verdict::Fail : Verdict::ReportOnly;
  return r;
}

/// Sampled ratio  integral (Mf)^p w  /  integral |f|^p Mw  for f simple with
/// support in supp(w). Mf is bracketed at one point per chain cube
/// (m <= M_cut); Mw at one point per piece of f. A finiteness probe only.
inline CheckReport fefferman_stein_probe(const AggregateSpec& agg, const SimpleFunction& f, const std::string& label) {
  CheckReport r;
  r.claim = "fefferman_stein_probe";
  r.params = agg_params(agg);
  r.params["f"] = label;
  r.verdict = Verdict::ReportOnly;
  if (f.pieces().empty() && f.tails().empty()) {
    r.notes.push_back("f = 0: 0/0, skipped");
    return r;
  }
  if (!f.tails().empty()) throw std::invalid_argument("probe takes functions without chain tails");
  const long prec = agg.precision_bits();
  const AggregateMeasure w{agg};
  SimpleFunction abs_f(agg.n());
  for (const auto& p : f.pieces()) {
    if (!w.density_at(p.cube.corner())) throw std::invalid_argument("piece " + p.cube.str() + " leaves supp(w)");
    abs_f.add_piece(p.cube, abs(p.density));
  }
  Bracket numerator(ExactRational(0));
  for (int k = 3; k <= agg.k_max(); ++k) {
    const FractalSpec spec = agg.block_spec(k);
    for (long m = 3; m <= agg.m_cut(); ++m) {
      const DyadicCube c = q1_cube(spec, m).shifted(agg.block_shift(k));
      const Point x = offset_point(c, 1);
      const Bracket mf = maximal_bracket(abs_f, x).value;
      numerator += power(mf, agg.p(), prec) * (*w.density_at(x) * c.volume());
    }
  }
  Bracket denominator(ExactRational(0));
  for (const auto& p : abs_f.pieces()) {
    const Bracket mw = maximal_bracket(w, offset_point(p.cube, 1)).value;
    denominator += mw * power(p.density, agg.p(), prec) * p.cube.volume();
  }
  const Bracket ratio = numerator / denominator;
  r.add(report_only("sampled ratio", ratio));
  r.lhs = numerator;
  r.rhs = denominator;
  r.bracket = ratio;
  r.notes.push_back("integrals sampled at one point per cube; not a certified integral");
  return r;
}

/// f = indicator of 2^k + Q_1^m.
inline SimpleFunction frozen_indicator(const AggregateSpec& agg, int k, long m) {
  SimpleFunction g(agg.n());
  g.add_piece(q1_cube(agg.block_spec(k), m).shifted(agg.block_shift(k)), 1);
  return g;
}

/// f truncated to blocks k <= K and chain cubes m <= M_cut, with each factor
/// k^{-eps} replaced by the lower end of its enclosure.
inline SimpleFunction truncated_f(const AggregateSpec& agg, int K) {
  SimpleFunction g(agg.n());
  for (int k = 3; k <= std::min(K, agg.k_max()); ++k) {
    const FractalSpec spec = agg.block_spec(k);
    const ExactRational factor = SymbolicPower{k, -agg.epsilon()}.enclose(agg.precision_bits()).lo();
    for (long m = 3; m <= agg.m_cut(); ++m) {
      g.add_piece(q1_cube(spec, m).shifted(agg.block_shift(k)), factor * a_k(spec) * spec.frozen_density(m));
    }
  }
  return g;
}

}  // namespace mwsparse
