#include <osplit/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace osplit;
using osplit::cli::RunConfig;

struct Flags {
  std::string input, method, out, config, summary, assignment, fdr_rule;
  std::vector<double> gamma;
  double alpha = 0, zeta = 0, eta = 0, effect_lo = 0, effect_hi = 0, grid_step = 0, corr = 0;
  std::size_t replications = 0, n_units = 0, n_covariates = 0, n_outcomes = 0, pairs = 0,
              exact_limit = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct Options {
  CLI::Option* input = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* alpha = nullptr;
  CLI::Option* method = nullptr;
  CLI::Option* zeta = nullptr;
  CLI::Option* eta = nullptr;
  CLI::Option* effect_lo = nullptr;
  CLI::Option* effect_hi = nullptr;
  CLI::Option* replications = nullptr;
  CLI::Option* grid_step = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* config = nullptr;
  CLI::Option* summary = nullptr;
  CLI::Option* exact_limit = nullptr;
  CLI::Option* fdr_rule = nullptr;
  CLI::Option* n_units = nullptr;
  CLI::Option* n_covariates = nullptr;
  CLI::Option* n_outcomes = nullptr;
  CLI::Option* pairs = nullptr;
  CLI::Option* assignment = nullptr;
  CLI::Option* corr = nullptr;
};

void add_common(CLI::App* app, Flags& f, Options& o) {
  o.gamma = app->add_option("--gamma", f.gamma, "Sensitivity parameter(s), each >= 1")->delimiter(',');
  o.alpha = app->add_option("--alpha", f.alpha, "Significance level (default 0.05)");
  o.seed = app->add_option("--seed", f.seed, "Master seed (default 0)");
  o.out = app->add_option("--out", f.out, "Output directory (default .)");
  o.threads = app->add_option("--threads", f.threads, "Worker threads (default 1)");
  o.config = app->add_option("--config", f.config, "JSON config; flags override its values");
  o.eta = app->add_option("--eta", f.eta, "Fraction of affected outcomes (default 0.1)");
}

void add_testing(CLI::App* app, Flags& f, Options& o) {
  o.input = app->add_option("--input", f.input, "Matched-pair CSV");
  o.method = app->add_option("--method", f.method, "fwer | fdr | naive (default fdr)");
  o.exact_limit = app->add_option("--exact-limit", f.exact_limit,
                                  "Largest sample tested with the exact null (default 20)");
  o.fdr_rule = app->add_option("--fdr-analysis", f.fdr_rule, "bh | holm (default bh)");
}

void add_plasmode(CLI::App* app, Flags& f, Options& o) {
  o.effect_lo = app->add_option("--effect-lo", f.effect_lo, "Lower effect bound in SD units (default 0.2)");
  o.effect_hi = app->add_option("--effect-hi", f.effect_hi, "Upper effect bound in SD units (default 0.5)");
  o.replications = app->add_option("--replications", f.replications, "Plasmode datasets M (default 1000)");
  o.grid_step = app->add_option("--grid-step", f.grid_step, "Split grid step (default 0.01)");
}

void apply_flags(RunConfig& cfg, const Flags& f, const Options& o) {
  auto set = [](CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
  if (set(o.input)) cfg.input_path = f.input;
  if (set(o.gamma)) cfg.gamma_list = f.gamma;
  if (set(o.alpha)) cfg.alpha = f.alpha;
  if (set(o.method)) cfg.method = parse_method(f.method);
  if (set(o.zeta)) cfg.zeta = f.zeta;
  if (set(o.eta)) cfg.plasmode.eta = f.eta;
  if (set(o.effect_lo)) cfg.plasmode.effect_lo = f.effect_lo;
  if (set(o.effect_hi)) cfg.plasmode.effect_hi = f.effect_hi;
  if (set(o.replications)) cfg.plasmode.n_replications = f.replications;
  if (set(o.grid_step)) cfg.grid_step = f.grid_step;
  if (set(o.seed)) cfg.master_seed = f.seed;
  if (set(o.out)) cfg.output_dir = f.out;
  if (set(o.threads)) cfg.threads = f.threads;
  if (set(o.summary)) cfg.summary_path = f.summary;
  if (set(o.exact_limit)) cfg.exact_limit = f.exact_limit;
  if (set(o.fdr_rule)) {
    if (f.fdr_rule == "bh") cfg.fdr_rule = FdrAnalysisRule::BenjaminiHochberg;
    else if (f.fdr_rule == "holm") cfg.fdr_rule = FdrAnalysisRule::Holm;
    else throw Error(ErrorCode::ConfigInvalid, "unknown --fdr-analysis '" + f.fdr_rule + "'");
  }
  if (set(o.n_units)) cfg.dgp.n_units = f.n_units;
  if (set(o.n_covariates)) cfg.dgp.n_covariates = f.n_covariates;
  if (set(o.n_outcomes)) cfg.dgp.n_outcomes = f.n_outcomes;
  if (set(o.pairs)) cfg.n_pairs = f.pairs;
  if (set(o.assignment)) cfg.dgp.assignment_mode = parse_assignment_mode(f.assignment);
  if (set(o.corr)) cfg.dgp.outcome_correlation = f.corr;
}

std::string strip_code(const Error& e) {
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  std::string m = e.what();
  return m.rfind(prefix, 0) == 0 ? m.substr(prefix.size()) : m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal sample-split multiple testing for matched pairs"};
  app.require_subcommand(1);
  Flags f;
  std::map<CLI::App*, Options> opts;

  auto* optimize = app.add_subcommand("optimize", "Power curve over split fractions per gamma");
  auto* analyze = app.add_subcommand("analyze", "Two-stage test of the observed data per gamma");
  auto* power = app.add_subcommand("power-curve", "Plot-ready power curves for all gammas");
  auto* simulate = app.add_subcommand("simulate", "Simulate a population and emit matched pairs");
  auto* bench = app.add_subcommand("bench", "Run a benchmark scenario grid");

  for (auto* sub : {optimize, analyze, power, simulate, bench}) add_common(sub, f, opts[sub]);
  for (auto* sub : {optimize, analyze, power}) add_testing(sub, f, opts[sub]);
  for (auto* sub : {optimize, power}) add_plasmode(sub, f, opts[sub]);
  opts[analyze].zeta = analyze->add_option("--zeta", f.zeta, "Analysis fraction; overrides --summary");
  opts[analyze].summary = analyze->add_option("--summary", f.summary, "optimize_summary.json to take zeta* from");
  opts[simulate].n_units = simulate->add_option("--units", f.n_units, "Population size N (default 5000)");
  opts[simulate].n_covariates = simulate->add_option("--covariates", f.n_covariates, "Covariates D (default 5)");
  opts[simulate].n_outcomes = simulate->add_option("--outcomes", f.n_outcomes, "Outcomes K (default 10)");
  opts[simulate].pairs = simulate->add_option("--pairs", f.pairs, "Matched pairs I (default 200)");
  opts[simulate].assignment = simulate->add_option("--assignment", f.assignment, "pair-biased | marginal");
  opts[simulate].corr = simulate->add_option("--correlation", f.corr, "Outcome noise correlation (default 0.3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  RunConfig cfg;
  CLI::App* chosen = bench;
  cfg.command = cli::Command::Bench;
  if (optimize->parsed()) chosen = optimize, cfg.command = cli::Command::Optimize;
  else if (analyze->parsed()) chosen = analyze, cfg.command = cli::Command::Analyze;
  else if (power->parsed()) chosen = power, cfg.command = cli::Command::PowerCurve;
  else if (simulate->parsed()) chosen = simulate, cfg.command = cli::Command::Simulate;
  const Options& o = opts[chosen];
  try {
    if (o.config->count() > 0) {
      const auto j = cli::read_json_file(f.config);
      if (cfg.command == cli::Command::Bench) cfg.scenario = cli::scenario_from_json(j);
      else cli::apply_config_json(cfg, j);
    } else if (cfg.command == cli::Command::Bench) {
      throw Error(ErrorCode::ConfigInvalid, "bench needs --config <scenario.json>");
    }
    apply_flags(cfg, f, o);
    if (cfg.command == cli::Command::Bench) {
      if (o.seed->count() > 0) cfg.scenario.seed = cfg.master_seed;
      if (o.alpha->count() > 0) cfg.scenario.alpha = cfg.alpha;
      if (o.eta->count() > 0) cfg.scenario.eta = cfg.plasmode.eta;
      if (o.gamma->count() > 0) cfg.scenario.gammas = cfg.gamma_list;
    }
    for (const auto& p : cli::run(cfg)) std::cout << p.string() << '\n';
  } catch (const Error& e) {
    std::cerr << cli::error_json(to_string(e.code()), strip_code(e)) << '\n';
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << cli::error_json("ConfigInvalid", e.what()) << '\n';
    return 3;
  }
  return 0;
}
