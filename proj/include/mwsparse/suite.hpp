#pragma once

// Run configuration, spec (de)serialization and the registry of checks. Jobs
// run concurrently; results come back in registry order.

#include <cstdint>
#include <functional>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include "mwsparse/probes.hpp"

#ifndef MWSPARSE_VERSION
#define MWSPARSE_VERSION "0.1.0"
#endif

namespace mwsparse {

inline constexpr const char* kVersion = MWSPARSE_VERSION;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  int n = 1;
  int k = 3;              ///< single-k checks (eq2, lemma1, lemma2)
  int k_max = 6;          ///< aggregate weight and tower family
  long m_min = 3;
  long m_max = 6;
  ExactRational p{2};
  ExactRational epsilon{3, 4};
  long precision_bits = 128;
  int samples = 100;
  std::uint64_t seed = 20240601;
  long m_cut = 8;
  long max_generation = 5;
  int trials = 20;
  std::vector<long> K{10, 20, 40, 80, 160};

  void validate() const {
    if (n < 1 || n > 3) throw ConfigError("n must be in [1, 3]");
    if (k < 3) throw ConfigError("k must be >= 3");
    if (k_max < 3) throw ConfigError("k_max must be >= 3");
    if (m_min < 3 || m_max < m_min) throw ConfigError("m range must satisfy 3 <= m_min <= m_max");
    if (p <= 1) throw ConfigError("p must exceed 1");
    const ExactRational inv_dual = (p - 1) / p;
    if (!(inv_dual < epsilon && epsilon < 1)) {
      throw ConfigError("epsilon must lie in (1/p', 1) = (" + inv_dual.get_str() + ", 1)");
    }
    if (precision_bits < 64) throw ConfigError("precision_bits must be >= 64");
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (m_cut < 3) throw ConfigError("M_cut must be >= 3");
    if (max_generation < 1) throw ConfigError("max_generation must be >= 1");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    try {
      require_sorted_k(K);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  FractalSpec fractal() const { return FractalSpec(n, k); }
  AggregateSpec aggregate() const { return AggregateSpec(n, k_max, p, epsilon, m_cut, precision_bits); }
};

inline Json to_json(const RunConfig& c) {
  return Json{{"n", c.n},
              {"k", c.k},
              {"k_max", c.k_max},
              {"m", std::to_string(c.m_min) + ".." + std::to_string(c.m_max)},
              {"p", c.p.get_str()},
              {"epsilon", c.epsilon.get_str()},
              {"precision_bits", c.precision_bits},
              {"samples", c.samples},
              {"seed", c.seed},
              {"M_cut", c.m_cut},
              {"max_generation", c.max_generation},
              {"trials", c.trials},
              {"K", c.K}};
}

inline Json to_json(const FractalSpec& s) { return Json{{"n", s.n()}, {"k", s.k()}}; }

inline Json to_json(const AggregateSpec& a) { return agg_params(a); }

inline AggregateSpec aggregate_from_json(const Json& j) {
  return AggregateSpec(j.at("n").get<int>(), j.at("k_max").get<int>(), parse_rational(j.at("p").get<std::string>()),
                       parse_rational(j.at("epsilon").get<std::string>()), j.value("M_cut", 8L),
                       j.value("precision_bits", 128L));
}

inline FractalSpec fractal_from_json(const Json& j) { return FractalSpec(j.at("n").get<int>(), j.at("k").get<int>()); }

struct Job {
  std::string claim;
  std::function<CheckReport()> run;
};

/// Runs every job on its own thread; a job that throws becomes a Fail report.
inline std::vector<CheckReport> run_jobs(const std::vector<Job>& jobs) {
  std::vector<std::future<CheckReport>> futures;
  futures.reserve(jobs.size());
  for (const auto& job : jobs) {
    futures.push_back(std::async(std::launch::async, [&job] {
      try {
        return timed(job.run);
      } catch (const std::exception& e) {
        CheckReport r;
        r.claim = job.claim;
        r.verdict = Verdict::Fail;
        r.notes.push_back(std::string("error: ") + e.what());
        r.counterwitness = Detail{"exception", Verdict::Fail, "", std::nullopt, std::nullopt, e.what()};
        return r;
      }
    }));
  }
  std::vector<CheckReport> out;
  out.reserve(jobs.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

// Job lists per CLI target ------------------------------------------------------------

inline std::vector<Job> eq2_jobs(const RunConfig& c) {
  std::vector<Job> jobs;
  const FractalSpec spec = c.fractal();
  for (long i = 1; i <= 5; ++i) {
    for (long j = 1; j <= spec.k(); ++j) jobs.push_back({"eq2", [spec, i, j] { return check_eq2(spec, i, j); }});
  }
  return jobs;
}

inline std::vector<Job> lemma2_jobs(const RunConfig& c) {
  std::vector<Job> jobs;
  const FractalSpec spec = c.fractal();
  for (long m = c.m_min; m <= c.m_max; ++m) jobs.push_back({"lemma2", [spec, m] { return check_lemma2(spec, m); }});
  return jobs;
}

inline std::vector<Job> lemma1_jobs(const RunConfig& c) {
  const FractalSpec spec = c.fractal();
  return {{"lemma1", [spec, c] { return check_lemma1(spec, c.samples, c.max_generation, c.seed); }}};
}

inline std::vector<Job> lemma3_jobs(const RunConfig& c) {
  const AggregateSpec agg = c.aggregate();
  return {{"lemma3", [agg, c] { return check_lemma3(agg, std::max(50, c.samples / 2), c.seed); }},
          {"lemma3_eq4", [c] { return check_eq4_arithmetic(c.n, 30, c.k_max); }}};
}

inline std::vector<Job> sparsity_jobs(const RunConfig& c) {
  return {{"sparsity", [c] { return check_sparsity(TowerFamily(c.n, c.k_max), 12); }}};
}

inline std::vector<Job> selfadjoint_jobs(const RunConfig& c) {
  return {{"selfadjoint", [c] { return check_self_adjoint(c.n, c.trials, c.seed); }}};
}

/// Every check and probe; the order here is the report order.
inline std::vector<Job> all_jobs(const RunConfig& c) {
  std::vector<Job> jobs;
  auto append = [&jobs](std::vector<Job> more) {
    for (auto& j : more) jobs.push_back(std::move(j));
  };
  append(eq2_jobs(c));
  append(lemma2_jobs(c));
  const FractalSpec spec = c.fractal();
  jobs.push_back({"lemma2_aux_necessity", [spec] { return check_lemma2_necessity(spec); }});
  jobs.push_back({"normalization", [spec] { return check_normalization(spec); }});
  jobs.push_back({"mass_conservation", [spec] { return check_mass_conservation(spec, 10); }});
  append(sparsity_jobs(c));
  append(lemma1_jobs(c));
  append(lemma3_jobs(c));
  const AggregateSpec agg = c.aggregate();
  const AggregateSpec wide(c.n, static_cast<int>(c.K.back()), c.p, c.epsilon, c.m_cut, c.precision_bits);
  jobs.push_back({"f_norm_convergent", [wide, c] { return check_f_norm(wide, c.K, 12); }});
  jobs.push_back({"tf_lower_divergent", [wide, c] { return check_tf_lower(wide, c.K, 12); }});
  for (int k = 3; k <= std::min(4, c.k_max); ++k) {
    for (long m = 3; m <= 5; ++m) {
      jobs.push_back({"translation_identity", [agg, k, m] { return check_translation(agg, k, m); }});
    }
  }
  append(selfadjoint_jobs(c));
  jobs.push_back({"restricted_variant_probe", [c] { return restricted_variant_scan(c.n, 3, 6, 3, 6); }});
  const AggregateSpec probe_agg(c.n, std::max(c.k_max, 12), c.p, c.epsilon, c.m_cut, c.precision_bits);
  jobs.push_back({"one_weight_probe", [probe_agg] { return one_weight_probe(probe_agg, {4, 6, 8, 10, 12}); }});
  jobs.push_back({"fefferman_stein_probe", [agg] {
                    return fefferman_stein_probe(agg, frozen_indicator(agg, 3, 3), "indicator of 8 + Q_1^3");
                  }});
  jobs.push_back({"fefferman_stein_probe", [agg] {
                    return fefferman_stein_probe(agg, truncated_f(agg, 4), "f truncated at K = 4");
                  }});
  return jobs;
}

inline std::vector<Job> jobs_for(const std::string& target, const RunConfig& c) {
  if (target == "eq2") return eq2_jobs(c);
  if (target == "lemma1") return lemma1_jobs(c);
  if (target == "lemma2") return lemma2_jobs(c);
  if (target == "lemma3") return lemma3_jobs(c);
  if (target == "sparsity") return sparsity_jobs(c);
  if (target == "selfadjoint") return selfadjoint_jobs(c);
  if (target == "all") return all_jobs(c);
  throw ConfigError("unknown verify target '" + target + "'");
}

inline bool any_fail(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    if (r.verdict == Verdict::Fail) return true;
  }
  return false;
}

}  // namespace mwsparse
