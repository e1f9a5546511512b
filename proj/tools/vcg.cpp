// Command-line front door: wires configs to the solver, simulator and
// analysis routines. Machine-readable output is JSON or CSV; `table` is for
// humans.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "vcg/analysis.hpp"
#include "vcg/equilibrium.hpp"
#include "vcg/io.hpp"
#include "vcg/messages.hpp"
#include "vcg/model.hpp"
#include "vcg/simulate.hpp"

namespace {

struct RunConfig {
  // model
  int n = 10;
  double gamma = 2.0;
  double t_max = 0.0;  // 0 = derive n + gamma + 1
  std::string cost = "linear";
  double kappa = 0.1;
  int t_grid = 400;
  std::string env = "a-ur";
  // solver
  double damping = 0.5;
  int max_iter = 10000;
  double tol = 1e-6;
  std::string seed_profile = "truthful";
  double off_path = 0.0;
  // simulation
  int agents = 1000;
  std::uint64_t seed = 1;
  bool paired = false;
  // io
  std::string input;
  std::string output;
  std::string format = "table";
  bool dollars = false;
  bool no_timestamp = false;
};

vcg::ModelParams make_params(const RunConfig& cfg) {
  vcg::CostSpec cost;
  if (cfg.cost == "zero")
    cost = vcg::CostSpec::zero();
  else if (cfg.cost == "linear")
    cost = vcg::CostSpec::linear(cfg.kappa);
  else if (cfg.cost == "quadratic")
    cost = vcg::CostSpec::quadratic(cfg.kappa);
  else
    throw std::invalid_argument("unknown cost variant '" + cfg.cost + "'");
  const double t_max = cfg.t_max > 0.0 ? cfg.t_max : cfg.n + cfg.gamma + 1.0;
  return vcg::ModelParams(vcg::StateSpace(cfg.n), cfg.gamma, cost,
                          vcg::TypeDistribution::uniform(t_max));
}

std::ostream& open_output(const RunConfig& cfg, std::ofstream& file) {
  if (cfg.output.empty()) return std::cout;
  file.open(cfg.output);
  if (!file) throw std::runtime_error("cannot open " + cfg.output + " for writing");
  return file;
}

std::vector<vcg::ReportRecord> read_records(const RunConfig& cfg) {
  if (cfg.input.empty()) return vcg::ingest_csv(std::cin);
  std::ifstream in(cfg.input);
  if (!in) throw std::runtime_error("cannot open " + cfg.input);
  return vcg::ingest_csv(in);
}

void table_header(const RunConfig& cfg, std::ostream& out) {
  if (cfg.format != "table" || cfg.no_timestamp) return;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", std::localtime(&now));
  out << "# generated " << buf << "\n";
}

double display(double payoff, const RunConfig& cfg) {
  // payment rule: reported number divided by 2; model units stay unscaled
  return cfg.dollars ? payoff / 2.0 : payoff;
}

vcg::SolveResult solve(const RunConfig& cfg, const vcg::ModelParams& params,
                       const vcg::TGrid& grid) {
  vcg::SolveOptions opts;
  opts.damping = cfg.damping;
  opts.max_iter = cfg.max_iter;
  opts.tol = cfg.tol;
  opts.off_path = cfg.off_path;
  return vcg::solve_fixed_point(vcg::Environment::parse(cfg.env), params, grid, opts,
                                cfg.seed_profile);
}

int cmd_solve(const RunConfig& cfg) {
  const auto params = make_params(cfg);
  const vcg::TGrid grid(params.dist, cfg.t_grid);
  const auto res = solve(cfg, params, grid);

  std::ofstream file;
  auto& out = open_output(cfg, file);
  if (cfg.format == "table") {
    table_header(cfg, out);
    out << "environment " << cfg.env << ", converged " << (res.report.converged ? "yes" : "no")
        << ", iterations " << res.report.iterations << "\n"
        << "belief residual " << res.report.belief_residual << ", incentive residual "
        << res.report.incentive_residual << "\n"
        << "liar mass " << res.report.liar_mass << ", expected earnings "
        << display(vcg::expected_earnings(res.profile, grid), cfg) << "\n";
  } else {
    vcg::json j;
    j["params"] = vcg::params_to_json(params);
    j["profile"] = vcg::profile_to_json(res.profile, grid);
    j["beliefs"] = vcg::beliefs_to_json(res.beliefs);
    j["report"] = vcg::report_to_json(res.report);
    out << j.dump(2) << "\n";
  }
  return 0;  // non-convergence is data, not an error
}

int cmd_simulate(const RunConfig& cfg) {
  const auto params = make_params(cfg);
  const vcg::TGrid grid(params.dist, cfg.t_grid);

  vcg::SimConfig sim;
  sim.n_agents = cfg.agents;
  sim.seed = cfg.seed;
  sim.environment = vcg::Environment::parse(cfg.env);
  sim.validate();

  std::vector<vcg::ReportRecord> records;
  if (cfg.paired) {
    auto cr = cfg;
    cr.env = sim.environment.anonymous() ? "a-r" : "na-r";
    auto cur = cfg;
    cur.env = sim.environment.anonymous() ? "a-ur" : "na-ur";
    const auto restricted = solve(cr, params, grid);
    const auto unrestricted = solve(cur, params, grid);
    sim.environment = vcg::Environment::parse(cr.env);
    records = vcg::paired_session(restricted.profile, unrestricted.profile, params, grid, sim);
  } else {
    const auto res = solve(cfg, params, grid);
    records = vcg::simulate_population(res.profile, params, grid, sim);
  }

  std::ofstream file;
  auto& out = open_output(cfg, file);
  vcg::emit_csv(records, out);
  return 0;
}

int cmd_classify(const RunConfig& cfg) {
  const auto records = read_records(cfg);
  const vcg::StateSpace states(cfg.n);
  const auto types = vcg::classify_subjects(records);

  std::ofstream file;
  auto& out = open_output(cfg, file);
  out << vcg::kCsvHeader << ",message_kind,interval,subject_label\n";
  for (const auto& r : records) {
    const auto label = vcg::classify_message(r.message, r.true_state, states);
    std::ostringstream row;
    vcg::emit_csv({r}, row);
    std::string line = row.str();
    line = line.substr(line.find('\n') + 1);           // drop the header
    line.erase(line.find_last_not_of('\n') + 1);       // and the trailing newline
    out << line << ',' << vcg::kind_token(label.kind) << ','
        << (label.interval_flag ? "yes" : "no") << ','
        << vcg::subject_label_token(types.at(r.subject_id).label) << "\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  const auto params = make_params(cfg);
  const vcg::TGrid grid(params.dist, cfg.t_grid);
  // the example constructions live in the non-anonymous unrestricted game
  const bool example_seed = cfg.seed_profile == "example1" || cfg.seed_profile == "example2" ||
                            cfg.seed_profile == "interval";
  const auto env = example_seed ? vcg::Environment::na_ur() : vcg::Environment::parse(cfg.env);

  std::ofstream file;
  auto& out = open_output(cfg, file);
  vcg::json j;
  if (cfg.seed_profile == "example2" || cfg.seed_profile == "interval") {
    const auto profile = vcg::seed_profile("interval", env, params, grid);
    const auto beliefs = vcg::posterior_beliefs(profile, params, grid, cfg.off_path);
    const auto rep = vcg::verify_example2(profile, beliefs, params, grid);
    j["is_equilibrium"] = rep.is_equilibrium;
    j["truth_tellers_ok"] = rep.truth_tellers_ok;
    j["liars_ok"] = rep.liars_ok;
    j["detail"] = rep.detail;
  } else {
    const auto profile = vcg::seed_profile(cfg.seed_profile, env, params, grid);
    vcg::BeliefMap beliefs;
    if (cfg.seed_profile == "example1") {
      // degenerate belief system of the pooling construction
      beliefs.off_path = 0.0;
      beliefs.set(vcg::Message::full(cfg.n), 1.0);
    } else {
      beliefs = vcg::posterior_beliefs(profile, params, grid, cfg.off_path);
    }
    const auto rep = vcg::check_equilibrium(profile, beliefs, params, grid, cfg.tol);
    j = vcg::report_to_json(rep);
  }
  if (cfg.format == "table") {
    table_header(cfg, out);
    for (const auto& [key, value] : j.items()) out << key << " " << value.dump() << "\n";
  } else {
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_analyze(const RunConfig& cfg) {
  const auto records = read_records(cfg);
  const auto summary = vcg::summarize(records);
  const auto types = vcg::classify_subjects(records);
  std::map<std::string, int> counts;
  for (const auto& [id, type] : types) ++counts[vcg::subject_label_token(type.label)];

  std::ofstream file;
  auto& out = open_output(cfg, file);
  if (cfg.format == "table") {
    table_header(cfg, out);
    out << "records " << summary.n << "\n";
    if (!std::isnan(summary.avg_report_restricted))
      out << "avg report (restricted) " << display(summary.avg_report_restricted, cfg) << "\n";
    if (!std::isnan(summary.avg_report_unrestricted))
      out << "avg report (unrestricted) " << display(summary.avg_report_unrestricted, cfg) << "\n";
    out << "vague share " << summary.vague_share << "\n"
        << "avg message length " << summary.avg_length << "\n";
    for (const auto& [token, count] : counts) out << token << " " << count << "\n";
    try {
      for (const auto& [len, p] : vcg::length_cdf(records))
        out << "cdf length<=" << len << " " << p << "\n";
    } catch (const std::runtime_error&) {
      // no unrestricted records: skip the CDF block
    }
  } else {
    vcg::json j;
    j["summary"] = vcg::summary_to_json(summary);
    j["typology"] = counts;
    try {
      vcg::json cdf = vcg::json::array();
      for (const auto& [len, p] : vcg::length_cdf(records)) cdf.push_back({len, p});
      j["length_cdf"] = cdf;
    } catch (const std::runtime_error&) {
    }
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_hypotheses(const RunConfig& cfg) {
  const auto params = make_params(cfg);
  const vcg::TGrid grid(params.dist, cfg.t_grid);

  vcg::SolvedEnvironments solved;
  solved.a_r = vcg::solve_anonymous_restricted(params, grid);
  solved.a_ur = vcg::solve_anonymous_unrestricted(params, grid);
  auto with_env = [&](const char* env) {
    auto c = cfg;
    c.env = env;
    return solve(c, params, grid);
  };
  solved.na_r = with_env("na-r");
  solved.na_ur = with_env("na-ur");
  const auto report = vcg::check_hypotheses(solved, params, grid);

  std::ofstream file;
  auto& out = open_output(cfg, file);
  if (cfg.format == "table") {
    table_header(cfg, out);
    for (const auto& e : report.entries)
      out << e.id << " " << (e.checked ? (e.satisfied ? "satisfied" : "violated") : "not checked")
          << " (" << e.detail << ")\n";
  } else {
    out << vcg::hypotheses_to_json(report).dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"solver, simulator and analysis toolkit for the vague-communication cheating game"};
  app.require_subcommand(1);

  const char* env_config = std::getenv("VCG_CONFIG");
  app.set_config("--config", env_config ? env_config : "")->configurable(false);

  app.add_option("--n", cfg.n, "number of states");
  app.add_option("--gamma", cfg.gamma, "social identity weight");
  app.add_option("--t-max", cfg.t_max, "upper bound of the aversion type support (default n+gamma+1)");
  app.add_option("--cost", cfg.cost, "cost variant: zero|linear|quadratic");
  app.add_option("--kappa", cfg.kappa, "cost slope / curvature");
  app.add_option("--t-grid", cfg.t_grid, "type grid resolution");
  app.add_option("--env", cfg.env, "environment: a-r|a-ur|na-r|na-ur");
  app.add_option("--damping", cfg.damping, "belief damping factor in (0,1]");
  app.add_option("--max-iter", cfg.max_iter, "iteration cap");
  app.add_option("--tol", cfg.tol, "belief residual tolerance");
  app.add_option("--seed-profile", cfg.seed_profile,
                 "truthful|example1|interval|example2|anonymous-solution");
  app.add_option("--off-path", cfg.off_path, "posterior for never-sent messages");
  app.add_option("--agents", cfg.agents, "simulated population size");
  app.add_option("--seed", cfg.seed, "rng seed");
  app.add_flag("--paired", cfg.paired, "simulate paired restricted/unrestricted sessions");
  app.add_option("--input", cfg.input, "input CSV (default stdin)");
  app.add_option("--output", cfg.output, "output file (default stdout)");
  app.add_option("--format", cfg.format, "csv|json|table")
      ->check(CLI::IsMember({"csv", "json", "table"}));
  app.add_flag("--dollars", cfg.dollars, "display payoffs divided by 2");
  app.add_flag("--no-timestamp", cfg.no_timestamp, "omit the timestamp header line");

  auto* c_solve = app.add_subcommand("solve", "solve an environment for an equilibrium");
  auto* c_sim = app.add_subcommand("simulate", "sample a population from a solved profile");
  auto* c_classify = app.add_subcommand("classify", "label records with message kinds and typology");
  auto* c_verify = app.add_subcommand("verify", "check equilibrium conditions for a seed profile");
  auto* c_analyze = app.add_subcommand("analyze", "summary statistics for a record CSV");
  auto* c_hyp = app.add_subcommand("hypotheses", "evaluate H1-H4 on solved profiles");
  for (auto* sub : {c_solve, c_sim, c_classify, c_verify, c_analyze, c_hyp}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_solve->parsed()) return cmd_solve(cfg);
    if (c_sim->parsed()) return cmd_simulate(cfg);
    if (c_classify->parsed()) return cmd_classify(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_analyze->parsed()) return cmd_analyze(cfg);
    if (c_hyp->parsed()) return cmd_hypotheses(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
