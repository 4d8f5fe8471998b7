#include "prefext/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <ostream>

#include "prefext/analytics.hpp"
#include "prefext/config.hpp"
#include "prefext/diagnostics.hpp"
#include "prefext/error.hpp"
#include "prefext/experiments.hpp"
#include "prefext/extremes.hpp"
#include "prefext/spectral.hpp"

namespace prefext::cli {

namespace {

using nlohmann::json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

/// Accepts "1000" as well as "1e6".
std::uint64_t parse_count(const std::string& text, const std::string& key) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + text + "'");
  }
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e18) {
    throw ConfigError(key, "must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out_path;
  std::string format = "csv";
  std::uint32_t l = 1;
  double beta = 1.0;
  std::string loop_mode;
  std::string initial;
  double alpha = 1.0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* l_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* loop_opt = nullptr;
  CLI::Option* initial_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
};

void add_common(CLI::App* app, Common& c, bool model, bool stopping) {
  app->add_option("--config", c.config_path, "TOML or JSON settings file (.json selects JSON)");
  c.seed_opt = app->add_option("--seed", c.seed, "Master seed (overrides SEED and the config file)");
  c.threads_opt = app->add_option("--threads", c.threads, "Worker threads");
  app->add_option("--out", c.out_path, "Output file (default: stdout)");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  if (model) {
    c.l_opt = app->add_option("--l", c.l, "Edges per new vertex");
    c.beta_opt = app->add_option("--beta", c.beta, "Attachment offset beta");
    c.loop_opt = app->add_option("--loop-mode", c.loop_mode, "model0 or model1");
    c.initial_opt = app->add_option("--initial", c.initial, "Initial weights D_k(0), comma separated");
  }
  if (stopping) c.alpha_opt = app->add_option("--alpha", c.alpha, "Tail index of N");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg;
  if (!c.config_path.empty()) apply_config_file(cfg, c.config_path);
  if (const char* env = std::getenv("SEED"); env != nullptr && *env != '\0') {
    cfg.seed = parse_count(env, "SEED");
  }
  if (c.seed_opt && c.seed_opt->count()) cfg.seed = c.seed;
  if (c.threads_opt && c.threads_opt->count()) cfg.threads = c.threads;
  if (c.l_opt && c.l_opt->count()) cfg.l = c.l;
  if (c.beta_opt && c.beta_opt->count()) cfg.beta = c.beta;
  if (c.loop_opt && c.loop_opt->count()) cfg.loop_mode = parse_loop_mode(c.loop_mode);
  if (c.initial_opt && c.initial_opt->count()) cfg.initial_weights = parse_number_list(c.initial, "initial_weights");
  if (c.alpha_opt && c.alpha_opt->count()) cfg.stopping.alpha = c.alpha;
  cfg.validate();
  return cfg;
}

/// Output sink with the reproducibility header.
class Output {
 public:
  Output(const Common& c, std::ostream& fallback) : format_(c.format) {
    if (!c.out_path.empty()) {
      file_ = std::make_unique<std::ofstream>(c.out_path);
      if (!*file_) throw std::runtime_error("cannot open output file '" + c.out_path + "'");
    }
    os_ = file_ ? file_.get() : &fallback;
  }

  bool json_format() const { return format_ == "json"; }
  std::ostream& os() { return *os_; }

  void csv_header(const std::string& command, const RunConfig& cfg, const json& options) {
    *os_ << "# prefext " << PREFEXT_VERSION << " command=" << command << " config=" << echo_json(cfg)
         << " options=" << options.dump() << "\n";
  }

  static json meta(const std::string& command, const RunConfig& cfg, const json& options) {
    return json{{"version", PREFEXT_VERSION},
                {"command", command},
                {"config", json::parse(echo_json(cfg))},
                {"options", options}};
  }

  void finish() {
    os_->flush();
    if (!*os_) throw std::runtime_error("write to output failed");
  }

 private:
  std::string format_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::size_t r = 4;
  std::string reps = "1000";
  bool full = false;
  bool snapshot = false;
};

void run_simulate(const Common& c, const SimulateOpts& o, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  ReplicationOptions ro;
  ro.r = o.r;
  ro.reps = parse_count(o.reps, "reps");
  ro.seed = cfg.seed;
  ro.threads = cfg.threads;
  ro.full = o.full;
  ro.snapshot = o.snapshot;
  const json options{{"r", o.r}, {"reps", ro.reps}, {"full", o.full}, {"snapshot", o.snapshot}};
  Output out(c, stdout_);
  auto& os = out.os();
  if (out.json_format()) {
    os << "{\"meta\":" << Output::meta("simulate", cfg, options).dump() << ",\"records\":[";
    bool first = true;
    run_replications(cfg.model(), cfg.stopping, ro, [&](const ReplicationRecord& rec) {
      json j{{"index", rec.index}, {"n", rec.n}, {"norm1", rec.norm1},
             {"max_weight", jnum(rec.max_weight)}, {"prefix", rec.prefix}};
      if (o.snapshot) j["snapshot"] = rec.snapshot;
      os << (first ? "\n" : ",\n") << j.dump();
      first = false;
    });
    os << "\n]}\n";
  } else {
    out.csv_header("simulate", cfg, options);
    os << "index,n,norm1,max_weight";
    for (std::size_t k = 1; k <= o.r; ++k) os << ",d" << k;
    if (o.snapshot) os << ",weights";
    os << "\n";
    run_replications(cfg.model(), cfg.stopping, ro, [&](const ReplicationRecord& rec) {
      os << rec.index << ',' << rec.n << ',' << num(rec.norm1) << ',' << num(rec.max_weight);
      for (double d : rec.prefix) os << ',' << num(d);
      if (o.snapshot) {
        os << ',';
        for (std::size_t i = 0; i < rec.snapshot.size(); ++i) os << (i ? ";" : "") << num(rec.snapshot[i]);
      }
      os << '\n';
    });
  }
  out.finish();
}

void write_ranks(Output& out, const std::string& command, const RunConfig& cfg, const json& options,
                 const std::vector<std::pair<std::size_t, double>>& ranks) {
  auto& os = out.os();
  if (out.json_format()) {
    json rows = json::array();
    for (const auto& [rank, deg] : ranks) rows.push_back({rank, deg});
    os << json{{"meta", Output::meta(command, cfg, options)}, {"ranks", rows}}.dump() << "\n";
  } else {
    out.csv_header(command, cfg, options);
    os << "rank,degree\n";
    for (const auto& [rank, deg] : ranks) os << rank << ',' << num(deg) << '\n';
  }
  out.finish();
}

void run_zipf(const Common& c, const std::string& n_text, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const std::uint64_t n = parse_count(n_text, "n");
  const ModelConfig model = cfg.model();
  Stream rng = Stream::derive(cfg.seed, 0);
  UrnState urn(model);
  run_to(urn, n, rng);
  auto w = urn.graph_weights();
  for (double& d : w) d -= model.beta;
  Output out(c, stdout_);
  write_ranks(out, "zipf", cfg, json{{"n", n}}, zipf_ranks(w));
}

void run_zipf_ingest(const Common& c, const std::string& input, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const auto ranks = zipf_from_edgelist(input);
  Output out(c, stdout_);
  write_ranks(out, "zipf-ingest", cfg, json{{"input", input}}, ranks);
}

struct MomentOpts {
  std::string k;
  std::vector<std::string> verify;
  std::size_t sum_r = 0;
  double kappa = 0.0;
};

void run_moments(const Common& c, const MomentOpts& o, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const ModelConfig model = cfg.model();
  json options;
  json result;
  std::vector<double> k;
  if (o.sum_r > 0) {
    options = {{"sum_r", o.sum_r}, {"kappa", o.kappa}};
    result["value"] = sum_moment(o.sum_r, o.kappa, model);
  } else {
    if (o.k.empty()) throw ConfigError("k", "pass --k or --sum-r");
    k = parse_number_list(o.k, "k");
    options = {{"k", k}};
    result["value"] = mixed_moment({k, model});
  }
  if (!o.verify.empty()) {
    if (o.sum_r > 0) throw ConfigError("verify", "only available with --k");
    const auto n = parse_count(o.verify.at(0), "verify");
    const auto reps = parse_count(o.verify.at(1), "verify");
    if (n < 1 || reps < 1) throw ConfigError("verify", "n and reps must be >= 1");
    const auto mc = moment_mc(model, k, n, reps, cfg.seed, cfg.threads);
    options["verify"] = {n, reps};
    result["mc_mean"] = mc.mean;
    result["mc_se"] = mc.se;
    result["z"] = mc.se > 0 ? (mc.mean - result["value"].get<double>()) / mc.se : 0.0;
  }
  Output out(c, stdout_);
  auto& os = out.os();
  if (out.json_format()) {
    result["meta"] = Output::meta("moments", cfg, options);
    os << result.dump() << "\n";
  } else {
    out.csv_header("moments", cfg, options);
    os << "value";
    if (result.contains("mc_mean")) os << ",mc_mean,mc_se,z";
    os << "\n" << num(result["value"].get<double>());
    if (result.contains("mc_mean")) {
      os << ',' << num(result["mc_mean"].get<double>()) << ',' << num(result["mc_se"].get<double>())
         << ',' << num(result["z"].get<double>());
    }
    os << "\n";
  }
  out.finish();
}

struct SpectralOpts {
  std::size_t r = 4;
  std::string event = "descending";
  std::string method = "quad";
  std::string samples = "1000000";
  std::string orientation = "forward";
};

void run_spectral(const Common& c, const SpectralOpts& o, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const auto ev = parse_event(o.event);
  const auto params = spectral_params(o.r, cfg.model());
  const SpectralMethod method =
      o.method == "mc" ? SpectralMethod::monte_carlo(parse_count(o.samples, "samples"), cfg.seed, cfg.threads)
                       : SpectralMethod::quadrature();
  const auto orient = o.orientation == "stick" ? Orientation::StickOrder : Orientation::Forward;
  const auto res = spectral_prob(ev, params, method, orient);
  const json options{{"r", o.r}, {"event", describe(ev)}, {"method", o.method}, {"orientation", o.orientation}};
  const std::string method_name = res.method == SpectralMethodKind::MonteCarlo ? "mc" : "quad";
  Output out(c, stdout_);
  auto& os = out.os();
  if (out.json_format()) {
    json params_json = json::array();
    for (std::size_t k = o.r; k >= 2; --k) params_json.push_back({{"k", k}, {"a", params.pair(k).a}, {"b", params.pair(k).b}});
    os << json{{"value", res.value}, {"se", res.se}, {"method", method_name}, {"samples", res.samples},
               {"params", params_json}, {"meta", Output::meta("spectral", cfg, options)}}
              .dump()
       << "\n";
  } else {
    out.csv_header("spectral", cfg, options);
    os << "r,event,method,samples,value,se\n"
       << o.r << ',' << describe(ev) << ',' << method_name << ',' << res.samples << ',' << num(res.value)
       << ',' << num(res.se) << "\n";
  }
  out.finish();
}

const char* kExtremeColumns =
    "l,beta,alpha,t,r,event,reps,hits,empirical,ci_low,ci_high,approx,tail_factor,moment_factor,"
    "spectral_factor,spectral_se";

json extreme_row(const ModelConfig& m, const StoppingLaw& law, const ExtremeEventSpec& ev,
                 const EmpiricalEstimate* emp, const ApproximationReport* rep) {
  json j{{"l", m.l}, {"beta", m.beta}, {"alpha", law.alpha}, {"t", ev.t}, {"r", ev.r},
         {"event", describe(ev.sphere_event)}};
  j["reps"] = emp ? emp->reps : 0;
  j["hits"] = emp ? emp->hits : 0;
  j["empirical"] = emp ? jnum(emp->prob) : json(nullptr);
  j["ci_low"] = emp ? jnum(emp->ci_low) : json(nullptr);
  j["ci_high"] = emp ? jnum(emp->ci_high) : json(nullptr);
  j["approx"] = rep ? jnum(rep->approx_prob) : json(nullptr);
  j["tail_factor"] = rep ? jnum(rep->tail_factor) : json(nullptr);
  j["moment_factor"] = rep ? jnum(rep->moment_factor) : json(nullptr);
  j["spectral_factor"] = rep ? jnum(rep->spectral_factor) : json(nullptr);
  j["spectral_se"] = rep ? jnum(rep->spectral_se) : json(nullptr);
  return j;
}

void write_extreme_csv_row(std::ostream& os, const json& j) {
  bool first = true;
  for (const char* key : {"l", "beta", "alpha", "t", "r", "event", "reps", "hits", "empirical", "ci_low",
                          "ci_high", "approx", "tail_factor", "moment_factor", "spectral_factor",
                          "spectral_se"}) {
    if (!first) os << ',';
    first = false;
    const auto& v = j.at(key);
    if (v.is_null()) {
      os << "";
    } else if (v.is_string()) {
      os << v.get<std::string>();
    } else if (v.is_number_float()) {
      os << num(v.get<double>());
    } else {
      os << v.dump();
    }
  }
  os << '\n';
}

struct ExtremeOpts {
  double t = 150.0;
  std::size_t r = 4;
  std::string event = "descending";
  std::string reps = "100000";
  bool no_approx = false;
};

void run_extreme(const Common& c, const ExtremeOpts& o, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const ModelConfig model = cfg.model();
  ExtremeEventSpec ev{o.r, o.t, parse_event(o.event)};
  const auto reps = parse_count(o.reps, "reps");
  const auto emp = empirical_extreme_prob(ev, model, cfg.stopping, reps, cfg.seed, cfg.threads);
  // The limit approximation needs beta > 0, t >= 1 and quadrature-friendly events.
  std::optional<ApproximationReport> rep;
  if (!o.no_approx && model.beta > 0.0 && o.t >= 1.0) {
    const bool custom = std::holds_alternative<event::Custom>(ev.sphere_event);
    if (!custom && ev.r <= 4) rep = breiman_approx(ev, model, cfg.stopping);
  }
  const json options{{"t", o.t}, {"r", o.r}, {"event", o.event}, {"reps", reps}};
  const json row = extreme_row(model, cfg.stopping, ev, &emp, rep ? &*rep : nullptr);
  Output out(c, stdout_);
  auto& os = out.os();
  if (out.json_format()) {
    os << json{{"result", row}, {"meta", Output::meta("extreme", cfg, options)}}.dump() << "\n";
  } else {
    out.csv_header("extreme", cfg, options);
    os << kExtremeColumns << "\n";
    write_extreme_csv_row(os, row);
  }
  out.finish();
}

void run_table1(const Common& c, const std::string& reps_text, std::ostream& stdout_) {
  RunConfig cfg = resolve(c);
  const auto reps = parse_count(reps_text, "reps");
  if (reps < 1) throw ConfigError("reps", "must be >= 1");
  struct Row {
    std::uint32_t l;
    double beta;
    double t;
  };
  const Row rows[] = {{1, 1.0, 150.0}, {3, 1.0, 500.0}, {3, 3.0, 500.0}};
  const json options{{"reps", reps}, {"r", 4}, {"event", "descending"}};
  Output out(c, stdout_);
  auto& os = out.os();
  json results = json::array();
  if (!out.json_format()) {
    out.csv_header("table1", cfg, options);
    os << kExtremeColumns << "\n";
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const ModelConfig model = ModelConfig::standard(rows[i].l, rows[i].beta);
    const ExtremeEventSpec ev{4, rows[i].t, event::Descending{}};
    const auto rep = breiman_approx(ev, model, cfg.stopping);
    const auto emp = empirical_extreme_prob(ev, model, cfg.stopping, reps, cfg.seed + i, cfg.threads);
    const json row = extreme_row(model, cfg.stopping, ev, &emp, &rep);
    if (out.json_format()) {
      results.push_back(row);
    } else {
      write_extreme_csv_row(os, row);
      os.flush();
    }
  }
  if (out.json_format()) {
    os << json{{"rows", results}, {"meta", Output::meta("table1", cfg, options)}}.dump() << "\n";
  }
  out.finish();
}

bool run_diagnose(const Common& c, double scale, std::ostream& stdout_) {
  const RunConfig cfg = resolve(c);
  const auto results = run_diagnostics(cfg.seed, scale, cfg.threads);
  bool all = true;
  for (const auto& r : results) all = all && r.passed;
  const json options{{"scale", scale}};
  Output out(c, stdout_);
  auto& os = out.os();
  if (out.json_format()) {
    json arr = json::array();
    for (const auto& r : results) arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    os << json{{"passed", all}, {"results", arr}, {"meta", Output::meta("diagnose", cfg, options)}}.dump(2)
       << "\n";
  } else {
    out.csv_header("diagnose", cfg, options);
    os << "name,passed,detail\n";
    for (const auto& r : results) os << r.name << ',' << (r.passed ? "true" : "false") << ",\"" << r.detail << "\"\n";
  }
  out.finish();
  return all;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Preferential attachment extremes: simulation and closed-form analytics", "prefext"};
  app.set_version_flag("--version", std::string("prefext ") + PREFEXT_VERSION);
  app.require_subcommand(1);

  Common simulate_c, zipf_c, ingest_c, moments_c, spectral_c, extreme_c, table_c, diag_c;

  SimulateOpts sim_o;
  auto* simulate = app.add_subcommand("simulate", "Replications of D^r(N) (CSV: one row per replication)");
  add_common(simulate, simulate_c, true, true);
  simulate->add_option("--r", sim_o.r, "Tracked prefix length")->check(CLI::PositiveNumber);
  simulate->add_option("--reps", sim_o.reps, "Replications");
  simulate->add_flag("--full", sim_o.full, "Simulate the whole graph (fills max_weight)");
  simulate->add_flag("--snapshot", sim_o.snapshot, "Emit every weight D_k(N)");

  std::string zipf_n = "100000";
  auto* zipf = app.add_subcommand("zipf", "Ranked in-degrees of one simulated graph");
  add_common(zipf, zipf_c, true, false);
  zipf->add_option("--n", zipf_n, "Graph steps");

  std::string ingest_path;
  auto* ingest = app.add_subcommand("zipf-ingest", "Ranked in-degrees of an edge list file");
  add_common(ingest, ingest_c, false, false);
  ingest->add_option("--input", ingest_path, "Edge list: 'source target' per line, '#' comments")->required();

  MomentOpts mom_o;
  auto* moments = app.add_subcommand("moments", "Mixed moments E[prod zeta_i^k_i] or E[|zeta^r|_1^kappa]");
  add_common(moments, moments_c, true, false);
  moments->add_option("--k", mom_o.k, "Exponents, e.g. 1,1,0,2");
  moments->add_option("--verify", mom_o.verify, "Monte Carlo check: graph steps n and replications")
      ->expected(2);
  moments->add_option("--sum-r", mom_o.sum_r, "Moment of the sum of the first r limits instead");
  moments->add_option("--kappa", mom_o.kappa, "Exponent for --sum-r");

  SpectralOpts spec_o;
  auto* spectral = app.add_subcommand("spectral", "Spectral probability S(A*) of a sphere event");
  add_common(spectral, spectral_c, true, false);
  spectral->add_option("--r", spec_o.r, "Dimension (>= 2)");
  spectral->add_option("--event", spec_o.event, "descending | full | empty | coord:i:c");
  spectral->add_option("--method", spec_o.method, "mc or quad")->check(CLI::IsMember({"mc", "quad"}));
  spectral->add_option("--samples", spec_o.samples, "Monte Carlo samples");
  spectral->add_option("--orientation", spec_o.orientation, "forward (D_1..D_r) or stick (D_r..D_1)")
      ->check(CLI::IsMember({"forward", "stick"}));

  ExtremeOpts ext_o;
  auto* extreme = app.add_subcommand("extreme", "Empirical extreme-event probability and its approximation");
  add_common(extreme, extreme_c, true, true);
  extreme->add_option("--t", ext_o.t, "Threshold on |D^r(N)|_1");
  extreme->add_option("--r", ext_o.r, "Prefix length")->check(CLI::PositiveNumber);
  extreme->add_option("--event", ext_o.event, "descending | full | empty | coord:i:c");
  extreme->add_option("--reps", ext_o.reps, "Replications");
  extreme->add_flag("--no-approx", ext_o.no_approx, "Skip the limit approximation");

  std::string table_reps = "1000000";
  auto* table1 = app.add_subcommand("table1", "Empirical vs approximate probabilities for three settings");
  add_common(table1, table_c, false, true);
  table1->add_option("--reps", table_reps, "Replications per row");

  double diag_scale = 1.0;
  auto* diagnose = app.add_subcommand("diagnose", "Named property suite with pass/fail output");
  add_common(diagnose, diag_c, false, false);
  diagnose->add_option("--scale", diag_scale, "Multiplier for replication counts");
  diag_c.format = "json";

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) run_simulate(simulate_c, sim_o, out);
    if (zipf->parsed()) run_zipf(zipf_c, zipf_n, out);
    if (ingest->parsed()) run_zipf_ingest(ingest_c, ingest_path, out);
    if (moments->parsed()) run_moments(moments_c, mom_o, out);
    if (spectral->parsed()) run_spectral(spectral_c, spec_o, out);
    if (extreme->parsed()) run_extreme(extreme_c, ext_o, out);
    if (table1->parsed()) run_table1(table_c, table_reps, out);
    if (diagnose->parsed() && !run_diagnose(diag_c, diag_scale, out)) return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace prefext::cli
