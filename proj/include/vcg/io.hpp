#pragma once

#include <fstream>

#include "json.hpp"
#include "vcg/analysis.hpp"
#include "vcg/equilibrium.hpp"

// JSON serialization for model parameters, strategy profiles, beliefs and
// equilibrium reports.

namespace vcg {

using json = nlohmann::json;

inline json params_to_json(const ModelParams& params) {
  json j;
  j["n"] = params.states.n;
  j["gamma"] = params.gamma;
  j["t_max"] = params.dist.t_max;
  j["cost.variant"] = params.cost.variant_name();
  j["cost.kappa"] = params.cost.kappa;
  j["dist.variant"] = params.dist.variant == TypeDistribution::Variant::Uniform ? "uniform" : "table";
  return j;
}

inline ModelParams params_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  const double gamma = j.at("gamma").get<double>();
  const double t_max = j.at("t_max").get<double>();
  const std::string cv = j.value("cost.variant", "linear");
  CostSpec cost;
  if (cv == "zero")
    cost = CostSpec::zero();
  else if (cv == "linear")
    cost = CostSpec::linear(j.value("cost.kappa", 0.1));
  else if (cv == "quadratic")
    cost = CostSpec::quadratic(j.value("cost.kappa", 0.1));
  else
    throw std::invalid_argument("params_from_json: unsupported cost variant '" + cv + "'");
  return ModelParams(StateSpace(n), gamma, cost, TypeDistribution::uniform(t_max));
}

inline json profile_to_json(const StrategyProfile& profile, const TGrid& grid) {
  json rows = json::array();
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [m, p] : profile.at(i, c)) {
        if (p <= 0.0) continue;
        rows.push_back({{"state", i},
                        {"t_mid", grid.cells[c].t_mid},
                        {"message", m.str()},
                        {"prob", p}});
      }
  return json{{"environment", profile.environment.str()},
              {"n", profile.n},
              {"cells", profile.cells},
              {"sigma", rows}};
}

inline StrategyProfile profile_from_json(const json& j, const TGrid& grid) {
  const int n = j.at("n").get<int>();
  const int cells = j.at("cells").get<int>();
  if (cells != grid.size())
    throw std::invalid_argument("profile_from_json: grid resolution mismatch");
  StrategyProfile profile(Environment::parse(j.at("environment").get<std::string>()), n, cells);
  for (const auto& row : j.at("sigma")) {
    const int i = row.at("state").get<int>();
    const int c = grid.cell_index(row.at("t_mid").get<double>());
    profile.at(i, c).emplace_back(Message::parse(row.at("message").get<std::string>(), n),
                                  row.at("prob").get<double>());
  }
  return profile;
}

inline json beliefs_to_json(const BeliefMap& beliefs) {
  json rows = json::array();
  for (const auto& [bits, rho] : beliefs.rho)
    rows.push_back({{"message", Message(bits).str()}, {"rho", rho}});
  return json{{"beliefs", rows}, {"off_path", beliefs.off_path}};
}

inline BeliefMap beliefs_from_json(const json& j, int n) {
  BeliefMap beliefs;
  beliefs.off_path = j.value("off_path", 0.0);
  for (const auto& row : j.at("beliefs"))
    beliefs.rho[Message::parse(row.at("message").get<std::string>(), n).bits()] =
        row.at("rho").get<double>();
  return beliefs;
}

inline json report_to_json(const EquilibriumReport& r) {
  return json{{"converged", r.converged},
              {"iterations", r.iterations},
              {"belief_residual", r.belief_residual},
              {"incentive_residual", r.incentive_residual},
              {"liar_mass", r.liar_mass},
              {"worst_state", r.worst_state},
              {"worst_message", r.worst_message.str()}};
}

inline json summary_to_json(const SummaryStats& s) {
  json j;
  if (!std::isnan(s.avg_report_restricted)) j["avg_report_restricted"] = s.avg_report_restricted;
  if (!std::isnan(s.avg_report_unrestricted))
    j["avg_report_unrestricted"] = s.avg_report_unrestricted;
  j["vague_share"] = s.vague_share;
  j["avg_length"] = s.avg_length;
  j["n"] = s.n;
  return j;
}

inline json hypotheses_to_json(const HypothesisReport& r) {
  json rows = json::array();
  for (const auto& e : r.entries)
    rows.push_back({{"id", e.id},
                    {"checked", e.checked},
                    {"satisfied", e.satisfied},
                    {"detail", e.detail}});
  return json{{"hypotheses", rows}};
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

inline void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace vcg
