// Acceptance suite: one pass/fail line per criterion, exit status reflects
// the overall result. Takes the fixture data directory as its only argument.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcg/analysis.hpp"
#include "vcg/equilibrium.hpp"
#include "vcg/messages.hpp"
#include "vcg/model.hpp"
#include "vcg/simulate.hpp"

using namespace vcg;
using json = nlohmann::json;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << detail << "\n";
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. OVM oracle equivalence for N in 2..12, under 5 s.
void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (int n = 2; n <= 12 && ok; ++n) {
    const StateSpace states(n);
    for (int i = 1; i <= n && ok; ++i) {
      const Message m = ovm(i, states);
      const auto oracle = ovm_bruteforce(i, states);
      bool maximizer = false;
      for (const auto& j : oracle.all_maximizers)
        if (j == m) maximizer = true;
      if (std::abs(m.mean() - oracle.best_mean) >= 1e-12 || !maximizer) {
        ok = false;
        detail = "mismatch at N=" + std::to_string(n) + " i=" + std::to_string(i);
      }
    }
  }
  const double elapsed = seconds_since(start);
  if (ok && elapsed >= 5.0) {
    ok = false;
    detail = "too slow (" + std::to_string(elapsed) + " s)";
  }
  if (ok)
    detail = "ovm matches the brute-force oracle for all N in 2..12 (" +
             std::to_string(elapsed) + " s)";
  report(1, ok, detail);
}

// 2. Example 1: all-Omega profile, boundary gamma = (N-1)/2.
void criterion_2() {
  const StateSpace states(10);
  auto make = [&](double gamma) {
    return ModelParams(states, gamma, CostSpec::linear(0.1), TypeDistribution::uniform(16.0));
  };
  TGrid grid(TypeDistribution::uniform(16.0), 400);

  StrategyProfile profile(Environment::na_ur(), 10, grid.size());
  const Message omega = Message::full(10);
  for (int i = 1; i <= 10; ++i)
    for (int c = 0; c < grid.size(); ++c) profile.set_pure(i, c, omega);
  BeliefMap beliefs;
  beliefs.off_path = 0.0;
  beliefs.set(omega, 1.0);

  const auto at5 = check_equilibrium(profile, beliefs, make(5.0), grid, 1e-9);
  const auto at4 = check_equilibrium(profile, beliefs, make(4.0), grid, 1e-9);
  const auto br10 = best_response(10, grid.cells[0].t_lo, beliefs, Environment::na_ur(), make(4.0));
  const auto above = check_equilibrium(profile, beliefs, make(4.51), grid, 1e-9);
  const auto below = check_equilibrium(profile, beliefs, make(4.49), grid, 1e-9);

  const bool ok = at5.converged && at5.incentive_residual == 0.0 && !at4.converged &&
                  std::abs(at4.incentive_residual - 0.5) < 1e-12 && at4.worst_state == 10 &&
                  br10.size() == 1 && br10[0] == Message::singleton(10) && above.converged &&
                  !below.converged;
  std::ostringstream detail;
  detail << "equilibrium at gamma=5 (residual " << at5.incentive_residual
         << "), broken at gamma=4 by {10} from i=10 (residual " << at4.incentive_residual
         << "), boundary at (N-1)/2";
  report(2, ok, detail.str());
}

// 3. Anonymous comparative statics at default parameters.
void criterion_3() {
  auto p = ModelParams::defaults(10, 2.0);
  TGrid grid(p.dist, 400);
  auto ar = solve_anonymous_restricted(p, grid);
  auto aur = solve_anonymous_unrestricted(p, grid);
  const auto liars_r = liar_set(ar, grid);
  const auto liars_ur = liar_set(aur, grid);

  bool subset = true;
  for (const auto& cell : liars_ur)
    if (!liars_r.count(cell)) subset = false;
  bool strict = true;
  for (int i = 1; i < 10; ++i) {
    bool found = false;
    for (const auto& [state, c] : liars_r)
      if (state == i && !liars_ur.count({state, c})) found = true;
    if (!found) strict = false;
  }
  // truthful A-R cells stay truthful in A-UR
  bool truthful_nested = true;
  for (int i = 1; i <= 10; ++i)
    for (int c = 0; c < grid.size(); ++c)
      if (!liars_r.count({i, c}) && liars_ur.count({i, c})) truthful_nested = false;
  const double gap = expected_earnings(aur, grid) - expected_earnings(ar, grid);

  const bool ok = subset && strict && truthful_nested && gap > 0.0;
  std::ostringstream detail;
  detail << "liar sets strictly nested, earnings gap A-UR - A-R = " << gap;
  report(3, ok, detail.str());
}

// 4. NA-R fixed-point structure at default parameters.
void criterion_4() {
  auto p = ModelParams::defaults(10, 2.0);
  TGrid grid(p.dist, 400);
  SolveOptions opts;
  auto res = solve_fixed_point(Environment::na_r(), p, grid, opts, "truthful");

  bool ok = res.report.converged && res.report.belief_residual < 1e-6 &&
            res.report.iterations <= 10000 && res.report.liar_mass > 0.0;
  std::string why = ok ? "" : "no convergence";

  auto l = extract_threshold_l(res.profile);
  if (ok && (!l || *l <= 1 || *l >= 10)) {
    ok = false;
    why = "threshold l* out of (1, N)";
  }
  if (ok) {
    for (int i = *l; i <= 10 && ok; ++i)
      for (int c = 0; c < grid.size() && ok; ++c) {
        const auto& dist = res.profile.at(i, c);
        if (dist.size() != 1 || !(dist[0].first == Message::singleton(i))) {
          ok = false;
          why = "state above l* not truthful";
        }
      }
    for (int i = 1; i <= 10 && ok; ++i)
      for (int c = 0; c < grid.size() && ok; ++c)
        for (const auto& [j, prob] : res.profile.at(i, c))
          if (prob > 1e-12 && !j.contains(i) && j.min_member() <= i) {
            ok = false;
            why = "underreporting lie";
          }
  }
  auto ar = solve_anonymous_restricted(p, grid);
  if (ok) {
    const auto liars_na = liar_set(res.profile, grid);
    const auto liars_a = liar_set(ar, grid);
    for (const auto& cell : liars_na)
      if (!liars_a.count(cell)) {
        ok = false;
        why = "NA-R liar outside the A-R liar set";
      }
    if (expected_earnings(res.profile, grid) > expected_earnings(ar, grid) + 1e-9) {
      ok = false;
      why = "NA-R earnings exceed A-R";
    }
  }
  std::ostringstream detail;
  if (ok)
    detail << "converged in " << res.report.iterations << " iterations (residual "
           << res.report.belief_residual << "), l*=" << *l << ", liar mass "
           << res.report.liar_mass;
  else
    detail << why << " (residual " << res.report.belief_residual << ")";
  report(4, ok, detail.str());
}

// 5. gamma -> 0 degeneracy: NA best responses collapse to the anonymous forms.
void criterion_5() {
  auto p = ModelParams::defaults(10, 0.0);
  TGrid grid(p.dist, 100);
  SolveOptions opts;
  bool ok = true;
  for (auto env : {Environment::na_r(), Environment::na_ur()}) {
    auto res = solve_fixed_point(env, p, grid, opts, "truthful");
    if (!res.report.converged) ok = false;
    const Environment anon{Anonymity::Anonymous, env.restriction};
    for (int i = 1; i <= 10 && ok; ++i)
      for (int c = 0; c < grid.size() && ok; ++c) {
        const double t = grid.cells[c].t_mid;
        if (!(best_response(i, t, res.beliefs, env, p) ==
              best_response(i, t, res.beliefs, anon, p)))
          ok = false;
      }
  }
  report(5, ok, "gamma=0 best-response sets match the anonymous closed forms per cell");
}

// 6. Prop. 1 / H1: positive vague mass in both unrestricted outputs.
void criterion_6() {
  auto p = ModelParams::defaults(10, 2.0);
  TGrid grid(p.dist, 400);
  auto aur = solve_anonymous_unrestricted(p, grid);
  SolveOptions opts;
  auto naur = solve_fixed_point(Environment::na_ur(), p, grid, opts, "truthful");

  auto vague_mass = [&](const StrategyProfile& profile) {
    double mass = 0.0;
    for (int i = 1; i <= profile.n; ++i)
      for (int c = 0; c < profile.cells; ++c)
        for (const auto& [j, prob] : profile.at(i, c))
          if (is_vague(j)) mass += grid.cells[c].mass / profile.n * prob;
    return mass;
  };
  const double a = vague_mass(aur);
  const double na = naur.report.converged ? vague_mass(naur.profile) : 0.0;
  const bool ok = a > 0.0 && naur.report.converged && na > 0.0;
  std::ostringstream detail;
  detail << "vague mass A-UR=" << a << ", NA-UR=" << na
         << (naur.report.converged ? "" : " (NA-UR not converged)");
  report(6, ok, detail.str());
}

// 7. Monte Carlo consistency on the A-UR closed form.
void criterion_7() {
  const auto start = std::chrono::steady_clock::now();
  auto p = ModelParams::defaults(10, 2.0);
  TGrid grid(p.dist, 400);
  auto profile = solve_anonymous_unrestricted(p, grid);
  SimConfig cfg;
  cfg.environment = Environment::a_ur();
  cfg.n_agents = 100000;
  cfg.seed = 12345;

  const auto records = simulate_population(profile, p, grid, cfg);
  const auto again = simulate_population(profile, p, grid, cfg);
  std::ostringstream csv_a, csv_b;
  emit_csv(records, csv_a);
  emit_csv(again, csv_b);

  const double analytic = expected_earnings(profile, grid);
  const double empirical = summarize(records).avg_report_unrestricted;
  const double elapsed = seconds_since(start);

  const bool ok = std::abs(empirical - analytic) < 0.03 && csv_a.str() == csv_b.str() &&
                  elapsed < 10.0;
  std::ostringstream detail;
  detail << "empirical " << empirical << " vs analytic " << analytic << ", byte-identical rerun, "
         << elapsed << " s";
  report(7, ok, detail.str());
}

// 8. Classifier fidelity to the documented examples.
void criterion_8() {
  const StateSpace states(10);
  const auto a = classify_message(Message::from_members({6, 9, 10}, 10), std::nullopt, states);
  const auto b = classify_message(Message::from_members({6, 7, 8, 9, 10}, 10), std::nullopt, states);
  const auto c = classify_message(Message::from_members({8, 10}, 10), 8, states);
  const bool ok = a.kind == MessageKind::PseudoOptimal && b.kind != MessageKind::PseudoOptimal &&
                  b.interval_flag && c.kind == MessageKind::Optimal;
  report(8, ok,
         "{6;9;10} pseudo-optimal, {6;7;8;9;10} interval but not pseudo-optimal, "
         "{8;10} optimal at state 8");
}

// 9. Directional replication of H2 on paired simulated sessions.
void criterion_9() {
  auto p = ModelParams::defaults(10, 2.0);
  TGrid grid(p.dist, 400);
  auto ar = solve_anonymous_restricted(p, grid);
  auto aur = solve_anonymous_unrestricted(p, grid);
  SimConfig cfg;
  cfg.environment = Environment::a_r();
  cfg.n_agents = 10000;
  cfg.seed = 777;
  const auto records = paired_session(ar, aur, p, grid, cfg);

  int lies_r = 0, lies_ur = 0;
  std::map<std::string, Message> restricted_report;
  for (const auto& r : records) {
    const bool lie = !is_truthful(*r.true_state, r.message);
    if (r.stage == Restriction::Restricted) {
      lies_r += lie;
      restricted_report.emplace(r.subject_id, r.message);
    } else {
      lies_ur += lie;
    }
  }
  const auto types = classify_subjects(records);
  int conditional = 0;
  bool all_top = true;
  for (const auto& [id, type] : types)
    if (type.label == SubjectLabel::ConditionalLiar) {
      ++conditional;
      if (!(restricted_report.at(id) == Message::singleton(10))) all_top = false;
    }
  const bool ok = lies_r > lies_ur && conditional > 0 && all_top;
  std::ostringstream detail;
  detail << "lies restricted=" << lies_r << " > unrestricted=" << lies_ur << ", "
         << conditional << " conditional liars, all reporting {10} when restricted";
  report(9, ok, detail.str());
}

// 10. Bundled analysis fixture against hand-computed oracle values.
void criterion_10(const std::string& data_dir) {
  std::ifstream csv(data_dir + "/fixture.csv");
  std::ifstream expected_in(data_dir + "/fixture_expected.json");
  if (!csv || !expected_in) {
    report(10, false, "fixture files missing under " + data_dir);
    return;
  }
  const auto records = ingest_csv(csv);
  const json expected = json::parse(expected_in);
  auto frac = [&](const json& j) { return j[0].get<double>() / j[1].get<double>(); };

  const auto s = summarize(records);
  auto eq = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  bool ok = s.n == expected["n"].get<int>() &&
            eq(s.avg_report_restricted, frac(expected["avg_report_restricted"])) &&
            eq(s.avg_report_unrestricted, frac(expected["avg_report_unrestricted"])) &&
            eq(s.vague_share, frac(expected["vague_share"])) &&
            eq(s.avg_length, frac(expected["avg_length"]));

  std::map<std::string, int> counts;
  for (const auto& [id, type] : classify_subjects(records)) ++counts[subject_label_token(type.label)];
  for (const auto& [token, count] : expected["typology"].items())
    if (counts[token] != count.get<int>()) ok = false;

  const auto cdf = length_cdf(records);
  const auto& expected_cdf = expected["length_cdf"];
  if (cdf.size() != expected_cdf.size()) {
    ok = false;
  } else {
    for (std::size_t k = 0; k < cdf.size(); ++k) {
      if (cdf[k].first != expected_cdf[k][0].get<int>()) ok = false;
      if (cdf[k].second != expected_cdf[k][1].get<double>() / expected_cdf[k][2].get<double>())
        ok = false;
    }
  }
  report(10, ok, "summary statistics, typology and length CDF match the stored oracle");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <data-dir>\n";
    return 2;
  }
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10(argv[1]);
  if (failures > 0) {
    std::cout << failures << " criteria failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
