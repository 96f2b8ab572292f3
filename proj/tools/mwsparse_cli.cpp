// mwsparse: run the verification suite from the command line.
//
//   mwsparse verify <eq2|lemma1|lemma2|lemma3|sparsity|selfadjoint|all> [options]
//   mwsparse norms --K 10,20,40,80 [options]
//   mwsparse report [--out DIR] [options]
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 bad configuration,
// 3 output could not be written.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwsparse/mwsparse.hpp"

namespace {

using namespace mwsparse;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RawOptions {
  int n = 1;
  int k = 3;
  int k_max = 6;
  std::string m = "3..6";
  std::string p = "2";
  std::string epsilon = "3/4";
  long precision = 128;
  int samples = 100;
  std::uint64_t seed = 20240601;
  long m_cut = 8;
  long max_generation = 5;
  int trials = 20;
  std::string K = "10,20,40,80,160";
  std::string format = "json";
  std::string out;
};

std::pair<long, long> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      const long v = std::stol(text);
      return {v, v};
    }
    return {std::stol(text.substr(0, dots)), std::stol(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("bad range '" + text + "' (expected a or a..b)");
  }
}

std::vector<long> parse_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stol(item));
    } catch (const std::exception&) {
      throw ConfigError("bad K value '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("K list is empty");
  return out;
}

RunConfig make_config(const RawOptions& o) {
  RunConfig c;
  c.n = o.n;
  c.k = o.k;
  c.k_max = o.k_max;
  std::tie(c.m_min, c.m_max) = parse_range(o.m);
  try {
    c.p = parse_rational(o.p);
    c.epsilon = parse_rational(o.epsilon);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.precision_bits = o.precision;
  c.samples = o.samples;
  c.seed = o.seed;
  c.m_cut = o.m_cut;
  c.max_generation = o.max_generation;
  c.trials = o.trials;
  c.K = parse_list(o.K);
  if (o.format != "json" && o.format != "csv") throw ConfigError("format must be json or csv");
  c.validate();
  return c;
}

void add_common(CLI::App& app, RawOptions& o) {
  app.add_option("--n", o.n, "dimension");
  app.add_option("--k", o.k, "construction parameter k for single-k checks (>= 3)");
  app.add_option("--k-max", o.k_max, "number of blocks in the aggregate weight");
  app.add_option("--m", o.m, "generation range, e.g. 3..6");
  app.add_option("--p", o.p, "exponent p > 1 (rational, e.g. 2 or 3/2)");
  app.add_option("--epsilon", o.epsilon, "epsilon in (1/p', 1)");
  app.add_option("--precision", o.precision, "interval precision in bits (>= 64)");
  app.add_option("--samples", o.samples, "sample count for the maximal-function checks");
  app.add_option("--seed", o.seed, "seed for all sampling");
  app.add_option("--m-cut", o.m_cut, "generation cut for materialized functions");
  app.add_option("--max-generation", o.max_generation, "deepest frozen generation sampled");
  app.add_option("--trials", o.trials, "random pairs for the symmetry check");
  app.add_option("--K", o.K, "comma-separated truncation list");
  app.add_option("--format", o.format, "json or csv");
  app.add_option("--out", o.out, "output file (verify, norms) or directory (report)");
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_records(const std::vector<CheckReport>& reports) {
  std::string out = "claim,params,verdict,lhs,rhs,bracket_lo,bracket_hi\n";
  for (const auto& r : reports) {
    const Json j = to_json(r, false, false);
    auto field = [&](const char* key) {
      const Json& v = j[key];
      return v.is_null() ? std::string() : v.is_string() ? v.get<std::string>() : v.dump();
    };
    out += r.claim + "," + csv_escape(r.params.dump()) + "," + to_string(r.verdict) + "," + csv_escape(field("lhs")) +
           "," + csv_escape(field("rhs")) + "," + csv_escape(field("bracket_lo")) + "," +
           csv_escape(field("bracket_hi")) + "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << content;
  os.close();
  if (!os) throw IoError("failed writing " + path.string());
}

int cmd_verify(const std::string& target, const RunConfig& cfg, const RawOptions& o) {
  const auto reports = run_jobs(jobs_for(target, cfg));
  for (const auto& r : reports) std::cout << summary_line(r) << "\n";
  std::size_t fails = 0;
  for (const auto& r : reports) fails += r.verdict == Verdict::Fail;
  std::cout << reports.size() << " records, " << fails << " failed\n";
  if (!o.out.empty()) {
    std::string content;
    if (o.format == "csv") {
      content = csv_records(reports);
    } else {
      for (const auto& r : reports) content += to_json(r).dump() + "\n";
    }
    write_file(o.out, content);
  }
  return fails ? kExitFail : 0;
}

int cmd_norms(const RunConfig& cfg, const RawOptions& o) {
  const AggregateSpec agg(cfg.n, static_cast<int>(std::max<long>(cfg.K.back(), 3)), cfg.p, cfg.epsilon, cfg.m_cut,
                          cfg.precision_bits);
  const PartialSumTable t = partial_sum_table(agg, cfg.K);
  const std::string content = o.format == "json" && !o.out.empty() ? to_json(t).dump(2) + "\n" : to_csv(t);
  if (o.out.empty()) {
    std::cout << content;
  } else {
    write_file(o.out, content);
  }
  std::cerr << "fitted exponent " << t.fitted_exponent << " vs (1-eps)p' = " << t.target_exponent.get_d() << "\n";
  return 0;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

int cmd_report(const RunConfig& cfg, const RawOptions& o) {
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("mwsparse-report") : std::filesystem::path(o.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto reports = run_jobs(all_jobs(cfg));
  const AggregateSpec agg(cfg.n, static_cast<int>(cfg.K.back()), cfg.p, cfg.epsilon, cfg.m_cut, cfg.precision_bits);
  const PartialSumTable table = partial_sum_table(agg, cfg.K);
  const AggregateSpec probe_agg(cfg.n, std::max(cfg.k_max, 12), cfg.p, cfg.epsilon, cfg.m_cut, cfg.precision_bits);
  std::string rayleigh = "K,ratio_full_lo,ratio_full_hi,ratio_restricted_lo,ratio_restricted_hi\n";
  for (const auto& row : one_weight_rows(probe_agg, {4, 6, 8, 10, 12})) {
    rayleigh += std::to_string(row.K) + "," + std::to_string(row.full.lo_double()) + "," +
                std::to_string(row.full.hi_double()) + "," + std::to_string(row.restricted.lo_double()) + "," +
                std::to_string(row.restricted.hi_double()) + "\n";
  }
  write_file(dir / "norms.csv", to_csv(table));
  write_file(dir / "rayleigh.csv", rayleigh);
  if (o.format == "json") {
    Json bundle;
    bundle["tool"] = "mwsparse";
    bundle["version"] = kVersion;
    bundle["config"] = to_json(cfg);
    bundle["records"] = Json::array();
    Json timing = Json::array();
    for (const auto& r : reports) {
      bundle["records"].push_back(to_json(r, true, false));
      timing.push_back(Json{{"claim", r.claim}, {"runtime_ms", r.runtime_ms}});
    }
    bundle["tables"]["norms"] = to_json(table);
    bundle["run"] = Json{{"timestamp", utc_timestamp()}, {"runtime_ms", timing}};
    write_file(dir / "report.json", bundle.dump(2) + "\n");
  }
  std::size_t fails = 0;
  for (const auto& r : reports) fails += r.verdict == Verdict::Fail;
  std::cout << reports.size() << " records, " << fails << " failed; written to " << dir.string() << "\n";
  return fails ? kExitFail : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic sparse operator and fractal weight verification"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags");
  app.require_subcommand(1);
  RawOptions o;
  add_common(app, o);

  std::string target;
  auto* verify = app.add_subcommand("verify", "run one group of checks");
  verify->add_option("target", target, "eq2|lemma1|lemma2|lemma3|sparsity|selfadjoint|all")
      ->required()
      ->check(CLI::IsMember({"eq2", "lemma1", "lemma2", "lemma3", "sparsity", "selfadjoint", "all"}));
  auto* norms = app.add_subcommand("norms", "partial-sum table for the norm computations");
  auto* report = app.add_subcommand("report", "all checks and probes as one bundle");
  // options are declared on the main app; subcommands pass them through
  for (auto* sub : {verify, norms, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const RunConfig cfg = make_config(o);
    if (verify->parsed()) return cmd_verify(target, cfg, o);
    if (norms->parsed()) return cmd_norms(cfg, o);
    return cmd_report(cfg, o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}
