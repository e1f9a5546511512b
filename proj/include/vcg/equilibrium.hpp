#pragma once

#include <map>
#include <set>
#include <utility>

#include "vcg/messages.hpp"
#include "vcg/model.hpp"

// Strategy profiles over a discretized type grid, Bayesian posterior beliefs,
// equilibrium verification, closed-form anonymous solvers, and a damped
// best-response fixed point for the non-anonymous environments.

namespace vcg {

// Discretization of the aversion type continuum [0, T] into equal-width
// cells; cell mass comes from the CDF, threshold claims hold at midpoints.
struct TGrid {
  struct Cell {
    double t_lo, t_hi, t_mid, mass;
  };

  std::vector<Cell> cells;
  TypeDistribution dist;

  TGrid(const TypeDistribution& d, int resolution) : dist(d) {
    if (resolution < 1) throw std::invalid_argument("TGrid: resolution must be positive");
    cells.reserve(resolution);
    const double width = d.t_max / resolution;
    for (int k = 0; k < resolution; ++k) {
      Cell c;
      c.t_lo = k * width;
      c.t_hi = (k + 1) * width;
      c.t_mid = 0.5 * (c.t_lo + c.t_hi);
      c.mass = d.cdf(c.t_hi) - d.cdf(c.t_lo);
      if (c.mass <= 0.0) throw std::invalid_argument("TGrid: cell with nonpositive mass");
      cells.push_back(c);
    }
  }

  int size() const { return static_cast<int>(cells.size()); }

  int cell_index(double t) const {
    const double width = dist.t_max / size();
    int k = static_cast<int>(t / width);
    return std::clamp(k, 0, size() - 1);
  }
};

// Mixed strategy sigma over (state, type cell) -> distribution over messages.
struct StrategyProfile {
  Environment environment;
  int n = 0;
  int cells = 0;
  // index (i - 1) * cells + cell
  std::vector<std::vector<std::pair<Message, double>>> sigma;

  StrategyProfile() = default;
  StrategyProfile(Environment env, int n_, int cells_)
      : environment(env), n(n_), cells(cells_), sigma(static_cast<std::size_t>(n_) * cells_) {}

  std::vector<std::pair<Message, double>>& at(int i, int cell) {
    return sigma[static_cast<std::size_t>(i - 1) * cells + cell];
  }
  const std::vector<std::pair<Message, double>>& at(int i, int cell) const {
    return sigma[static_cast<std::size_t>(i - 1) * cells + cell];
  }

  void set_pure(int i, int cell, const Message& j) { at(i, cell) = {{j, 1.0}}; }
};

struct BeliefMap {
  std::map<std::uint32_t, double> rho;
  double off_path = 0.0;

  double at(const Message& j) const {
    auto it = rho.find(j.bits());
    return it == rho.end() ? off_path : it->second;
  }

  void set(const Message& j, double value) { rho[j.bits()] = value; }
};

struct EquilibriumReport {
  bool converged = false;
  int iterations = 0;
  double belief_residual = 0.0;
  double incentive_residual = 0.0;
  double liar_mass = 0.0;
  // deviation achieving the incentive residual
  int worst_state = 0;
  int worst_cell = 0;
  Message worst_message = Message::singleton(1);
};

// Eq. (3): rho(J) = truthful sending mass / total sending mass; the uniform
// state prior cancels. Messages never sent get the off-path default.
inline BeliefMap posterior_beliefs(const StrategyProfile& profile, const ModelParams& params,
                                   const TGrid& grid, double off_path = 0.0) {
  std::map<std::uint32_t, std::pair<double, double>> flow;  // bits -> (truthful, total)
  for (int i = 1; i <= profile.n; ++i) {
    for (int c = 0; c < profile.cells; ++c) {
      const double mass = grid.cells[c].mass / params.states.n;
      for (const auto& [j, p] : profile.at(i, c)) {
        if (p <= 0.0) continue;
        auto& f = flow[j.bits()];
        f.second += mass * p;
        if (j.contains(i)) f.first += mass * p;
      }
    }
  }
  BeliefMap beliefs;
  beliefs.off_path = off_path;
  for (const auto& [bits, f] : flow)
    if (f.second > 0.0) beliefs.rho[bits] = f.first / f.second;
  return beliefs;
}

namespace detail {

inline std::vector<Message> message_set(const Environment& env, const StateSpace& states) {
  if (env.restricted()) {
    std::vector<Message> out;
    out.reserve(states.n);
    for (int j = 1; j <= states.n; ++j) out.push_back(Message::singleton(j));
    return out;
  }
  return enumerate_messages(states);
}

// Per-state decomposition of utility over a message set: truthful candidates
// are t-independent, lies share slope -1 in t.
struct StateResponse {
  Message best_truth = Message::singleton(1);
  double truth_value = 0.0;  // pi-bar + gamma * rho (gamma term absent when anonymous)
  Message best_lie = Message::singleton(1);
  double lie_value = -1e300;  // pi-bar - c + gamma * rho, excludes t
};

// Tie-break: higher pi-bar first, then smaller canonical bit pattern.
inline bool better_candidate(double v, double mean, std::uint32_t bits, double best_v,
                             double best_mean, std::uint32_t best_bits) {
  if (v > best_v + 1e-12) return true;
  if (v < best_v - 1e-12) return false;
  if (mean > best_mean + 1e-12) return true;
  if (mean < best_mean - 1e-12) return false;
  return bits < best_bits;
}

inline StateResponse state_response(int i, const std::vector<Message>& messages,
                                    const BeliefMap& beliefs, const Environment& env,
                                    const ModelParams& params) {
  StateResponse r;
  const double gamma = env.anonymous() ? 0.0 : params.gamma;
  double best_truth_mean = -1.0, best_lie_mean = -1.0;
  std::uint32_t truth_bits = 0, lie_bits = 0;
  r.truth_value = -1e300;
  for (const auto& j : messages) {
    const double mean = j.mean();
    const double social = gamma * beliefs.at(j);
    if (j.contains(i)) {
      const double v = mean + social;
      if (truth_bits == 0 ||
          better_candidate(v, mean, j.bits(), r.truth_value, best_truth_mean, truth_bits)) {
        r.best_truth = j;
        r.truth_value = v;
        best_truth_mean = mean;
        truth_bits = j.bits();
      }
    } else {
      const double v = mean - params.cost.eval(static_cast<double>(i), mean) + social;
      if (lie_bits == 0 ||
          better_candidate(v, mean, j.bits(), r.lie_value, best_lie_mean, lie_bits)) {
        r.best_lie = j;
        r.lie_value = v;
        best_lie_mean = mean;
        lie_bits = j.bits();
      }
    }
  }
  return r;
}

}  // namespace detail

// Eq. (4) argmax correspondence at a single type, ties within 1e-9.
inline std::vector<Message> best_response(int i, double t, const BeliefMap& beliefs,
                                          const Environment& env, const ModelParams& params) {
  const auto messages = detail::message_set(env, params.states);
  const double gamma = env.anonymous() ? 0.0 : params.gamma;
  double best = -1e300;
  std::vector<Message> out;
  for (const auto& j : messages) {
    const double u = utility_anonymous(i, j, t, params) + gamma * beliefs.at(j);
    if (u > best + 1e-9) {
      best = u;
      out.assign(1, j);
    } else if (u > best - 1e-9) {
      out.push_back(j);
    }
  }
  return out;
}

// Verifies the equilibrium conditions: optimality of every played message
// (checked over the cell's t-interval, not just the midpoint), normalization,
// and consistency of beliefs with recomputed posteriors. Failures are
// reported through the residuals, never thrown.
inline EquilibriumReport check_equilibrium(const StrategyProfile& profile,
                                           const BeliefMap& beliefs, const ModelParams& params,
                                           const TGrid& grid, double tol = 1e-6) {
  EquilibriumReport report;
  const auto messages = detail::message_set(profile.environment, params.states);
  const double gamma = profile.environment.anonymous() ? 0.0 : params.gamma;

  double norm_residual = 0.0;
  for (int i = 1; i <= profile.n; ++i) {
    const auto resp = detail::state_response(i, messages, beliefs, profile.environment, params);
    for (int c = 0; c < profile.cells; ++c) {
      const auto& cell = grid.cells[c];
      double total = 0.0;
      for (const auto& [j, p] : profile.at(i, c)) {
        total += p;
        if (p <= 1e-12) continue;
        const double mean = j.mean();
        const double social = gamma * beliefs.at(j);
        double shortfall = 1e300;
        for (double t : {cell.t_lo, cell.t_mid, cell.t_hi}) {
          const double best = std::max(resp.truth_value, resp.lie_value - t);
          const double u = j.contains(i)
                               ? mean + social
                               : mean - params.cost.eval(static_cast<double>(i), mean) - t + social;
          shortfall = std::min(shortfall, best - u);
        }
        if (shortfall > report.incentive_residual) {
          report.incentive_residual = shortfall;
          report.worst_state = i;
          report.worst_cell = c;
          report.worst_message = j;
        }
        if (!j.contains(i)) report.liar_mass += cell.mass / params.states.n * p;
      }
      norm_residual = std::max(norm_residual, std::abs(total - 1.0));
    }
  }

  const BeliefMap recomputed = posterior_beliefs(profile, params, grid, beliefs.off_path);
  for (const auto& [bits, rho] : recomputed.rho) {
    const double given = beliefs.at(Message(bits));
    report.belief_residual = std::max(report.belief_residual, std::abs(given - rho));
  }

  report.incentive_residual = std::max(report.incentive_residual, 0.0);
  report.converged = report.incentive_residual <= tol && report.belief_residual <= tol &&
                     norm_residual <= 1e-9;
  return report;
}

// Best precise lie: argmax over singletons {j}, j != i, of j - c(i, j).
inline BestLie best_precise_lie(int i, const ModelParams& params) {
  BestLie best{Message::singleton(i == 1 ? 2 : 1), -1e300};
  for (int j = 1; j <= params.states.n; ++j) {
    if (j == i) continue;
    const double v = j - params.cost.eval(static_cast<double>(i), static_cast<double>(j));
    if (v > best.value + 1e-12 || (v > best.value - 1e-12 && j > best.message.min_member())) {
      best = {Message::singleton(j), v};
    }
  }
  return best;
}

// A-R closed form: lie to the best precise target iff its value beats the
// truthful i by more than the cell-midpoint type.
inline StrategyProfile solve_anonymous_restricted(const ModelParams& params, const TGrid& grid) {
  StrategyProfile profile(Environment::a_r(), params.states.n, grid.size());
  for (int i = 1; i <= params.states.n; ++i) {
    const BestLie lie = best_precise_lie(i, params);
    for (int c = 0; c < grid.size(); ++c) {
      const bool lies = lie.value - grid.cells[c].t_mid > static_cast<double>(i);
      profile.set_pure(i, c, lies ? lie.message : Message::singleton(i));
    }
  }
  return profile;
}

// A-UR closed form: OVM against the best unrestricted lie, ties truthful.
inline StrategyProfile solve_anonymous_unrestricted(const ModelParams& params, const TGrid& grid) {
  StrategyProfile profile(Environment::a_ur(), params.states.n, grid.size());
  for (int i = 1; i <= params.states.n; ++i) {
    const Message truthful = ovm(i, params.states);
    const double truth_value = truthful.mean();
    const BestLie lie = best_lie(i, params);
    for (int c = 0; c < grid.size(); ++c) {
      const bool lies = lie.value - grid.cells[c].t_mid > truth_value;
      profile.set_pure(i, c, lies ? lie.message : truthful);
    }
  }
  return profile;
}

inline double expected_earnings(const StrategyProfile& profile, const TGrid& grid) {
  double total = 0.0;
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c))
        total += grid.cells[c].mass / profile.n * p * j.mean();
  return total;
}

// (state, cell) pairs that put positive probability on a lie.
inline std::set<std::pair<int, int>> liar_set(const StrategyProfile& profile, const TGrid& grid) {
  std::set<std::pair<int, int>> out;
  (void)grid;
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c))
        if (p > 1e-12 && !j.contains(i)) out.insert({i, c});
  return out;
}

// Smallest value ever used as a lie in a restricted profile.
inline std::optional<int> extract_threshold_l(const StrategyProfile& profile) {
  if (!profile.environment.restricted())
    throw std::invalid_argument("extract_threshold_l: restricted profile required");
  std::optional<int> l;
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c))
        if (p > 1e-9 && !j.contains(i) && (!l || j.min_member() < *l)) l = j.min_member();
  return l;
}

inline StrategyProfile seed_profile(const std::string& name, const Environment& env,
                                    const ModelParams& params, const TGrid& grid) {
  StrategyProfile profile(env, params.states.n, grid.size());
  if (name == "truthful") {
    for (int i = 1; i <= profile.n; ++i)
      for (int c = 0; c < profile.cells; ++c) profile.set_pure(i, c, Message::singleton(i));
  } else if (name == "example1") {
    if (env.restricted()) throw std::invalid_argument("seed example1 needs an unrestricted environment");
    const Message omega = Message::full(profile.n);
    for (int i = 1; i <= profile.n; ++i)
      for (int c = 0; c < profile.cells; ++c) profile.set_pure(i, c, omega);
  } else if (name == "interval") {
    if (env.restricted()) throw std::invalid_argument("seed interval needs an unrestricted environment");
    for (int i = 1; i <= profile.n; ++i)
      for (int c = 0; c < profile.cells; ++c)
        profile.set_pure(i, c, Message::interval(i, profile.n));
  } else if (name == "anonymous-solution") {
    profile = env.restricted() ? solve_anonymous_restricted(params, grid)
                               : solve_anonymous_unrestricted(params, grid);
    profile.environment = env;
  } else {
    throw std::invalid_argument("unknown seed profile '" + name + "'");
  }
  return profile;
}

struct SolveOptions {
  double damping = 0.5;
  int max_iter = 10000;
  double tol = 1e-6;
  double off_path = 0.0;
};

struct SolveResult {
  StrategyProfile profile;
  BeliefMap beliefs;
  EquilibriumReport report;
};

namespace detail {

// Lie payoffs decompose as base(j) + per-state constant, so all liars rank
// precise targets identically and the equal-payoff allocation reduces to a
// one-dimensional level search.
inline bool cost_decomposes(const CostSpec& cost) {
  return cost.variant == CostSpec::Variant::Zero || cost.variant == CostSpec::Variant::Linear;
}

inline double lie_base(int j, const CostSpec& cost) {
  return cost.variant == CostSpec::Variant::Linear ? j * (1.0 - cost.kappa)
                                                   : static_cast<double>(j);
}

struct RestrictedStep {
  std::vector<double> rho_hat;     // by state, index j - 1
  std::vector<double> thresholds;  // liar threshold per state i
  std::vector<double> weights;     // liar allocation over targets, index j - 1
};

// One consistent response round for the NA-R environment: thresholds from
// the current beliefs, liar mass spread over targets so that every used
// target yields the same lie payoff under the implied posteriors.
inline RestrictedStep na_restricted_step(const std::vector<double>& rho,
                                         const ModelParams& params, const TGrid& grid) {
  const int n = params.states.n;
  const double gamma = params.gamma;
  RestrictedStep step;
  step.rho_hat.assign(n, 1.0);
  step.thresholds.assign(n, 0.0);
  step.weights.assign(n, 0.0);

  std::vector<double> truth_mass(n, 0.0);
  double liar_total = 0.0;
  for (int i = 1; i <= n; ++i) {
    double best = -1e300;
    for (int j = 1; j <= n; ++j) {
      if (j == i) continue;
      const double g =
          j - params.cost.eval(static_cast<double>(i), static_cast<double>(j)) + gamma * rho[j - 1];
      best = std::max(best, g);
    }
    const double tau = std::max(0.0, best - (i + gamma * rho[i - 1]));
    step.thresholds[i - 1] = tau;
    const double f = grid.dist.cdf(tau);
    truth_mass[i - 1] = (1.0 - f) / n;
    liar_total += f / n;
  }

  if (gamma > 0.0 && cost_decomposes(params.cost) && liar_total > 1e-15) {
    std::vector<double> base(n);
    for (int j = 1; j <= n; ++j) base[j - 1] = lie_base(j, params.cost);
    const double base_max = base[n - 1];
    auto supply = [&](double v) {
      double s = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double d = v - base[j - 1];
        if (d <= 0.0) return 1e300;
        const double m = truth_mass[j - 1] * (gamma / d - 1.0);
        if (m > 0.0) s += m;
      }
      return s;
    };
    double lo = base_max, hi = base_max + gamma;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (supply(mid) > liar_total ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    double total_m = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double d = v - base[j - 1];
      const double m = d > 0.0 ? std::max(0.0, truth_mass[j - 1] * (gamma / d - 1.0)) : 0.0;
      step.weights[j - 1] = m;
      total_m += m;
      step.rho_hat[j - 1] = m > 0.0 ? std::clamp(d / gamma, 0.0, 1.0) : 1.0;
    }
    if (total_m > 0.0)
      for (double& w : step.weights) w /= total_m;
    // snap the exactly-indifferent used-target states to full truth-telling
    for (int j = 1; j <= n; ++j)
      if (step.weights[j - 1] > 0.0 && step.thresholds[j - 1] < 1e-9) step.thresholds[j - 1] = 0.0;
  } else {
    // pure-argmax allocation (gamma = 0 or non-decomposable cost)
    std::vector<double> inflow(n, 0.0);
    for (int i = 1; i <= n; ++i) {
      const double f = grid.dist.cdf(step.thresholds[i - 1]);
      if (f <= 0.0) continue;
      int target = -1;
      double best = -1e300;
      for (int j = 1; j <= n; ++j) {
        if (j == i) continue;
        const double g = j - params.cost.eval(static_cast<double>(i), static_cast<double>(j)) +
                         gamma * rho[j - 1];
        if (g > best + 1e-12 || (g > best - 1e-12 && j > target)) {
          best = g;
          target = j;
        }
      }
      inflow[target - 1] += f / n;
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
      step.rho_hat[j - 1] = truth_mass[j - 1] / (truth_mass[j - 1] + inflow[j - 1]);
      total += inflow[j - 1];
    }
    if (total > 0.0)
      for (int j = 1; j <= n; ++j) step.weights[j - 1] = inflow[j - 1] / total;
  }
  return step;
}

inline StrategyProfile build_restricted_profile(const Environment& env,
                                                const RestrictedStep& step,
                                                const ModelParams& params, const TGrid& grid) {
  const int n = params.states.n;
  StrategyProfile profile(env, n, grid.size());
  for (int i = 1; i <= n; ++i) {
    const double tau = step.thresholds[i - 1];
    // liar targets usable by state i, renormalized
    std::vector<std::pair<Message, double>> lies;
    double wsum = 0.0;
    for (int j = 1; j <= n; ++j)
      if (j != i && step.weights[j - 1] > 0.0) wsum += step.weights[j - 1];
    for (int j = 1; j <= n; ++j)
      if (j != i && step.weights[j - 1] > 0.0)
        lies.emplace_back(Message::singleton(j), step.weights[j - 1] / wsum);
    for (int c = 0; c < grid.size(); ++c) {
      const auto& cell = grid.cells[c];
      double frac = 0.0;
      if (tau > 0.0 && wsum > 0.0) {
        const double cut = std::clamp(tau, cell.t_lo, cell.t_hi);
        frac = (grid.dist.cdf(cut) - grid.dist.cdf(cell.t_lo)) / cell.mass;
      }
      auto& dist = profile.at(i, c);
      dist.clear();
      if (frac < 1e-15) {
        dist.emplace_back(Message::singleton(i), 1.0);
      } else if (frac > 1.0 - 1e-15) {
        for (const auto& [j, w] : lies) dist.emplace_back(j, w);
      } else {
        dist.emplace_back(Message::singleton(i), 1.0 - frac);
        for (const auto& [j, w] : lies) dist.emplace_back(j, frac * w);
      }
    }
  }
  return profile;
}

struct UnrestrictedStep {
  std::vector<double> rho_hat;  // by message, index bits - 1
  std::vector<Message> best_truth;
  std::vector<Message> best_lie;  // per-state argmax, used when weights are empty
  std::vector<double> thresholds;
  // equalized liar allocation over messages, parallel to rho_hat
  std::vector<double> weights;
};

inline double lie_base(const Message& j, const CostSpec& cost) {
  return cost.variant == CostSpec::Variant::Linear ? j.mean() * (1.0 - cost.kappa) : j.mean();
}

inline UnrestrictedStep na_unrestricted_step(const std::vector<double>& rho,
                                             const std::vector<Message>& messages,
                                             const ModelParams& params, const TGrid& grid,
                                             double off_path) {
  const int n = params.states.n;
  const double gamma = params.gamma;
  UnrestrictedStep step;
  step.best_truth.assign(n, Message::singleton(1));
  step.best_lie.assign(n, Message::singleton(1));
  step.thresholds.assign(n, 0.0);
  step.weights.assign(messages.size(), 0.0);

  BeliefMap current;
  current.off_path = off_path;
  for (const auto& j : messages) current.rho[j.bits()] = rho[j.bits() - 1];

  std::vector<double> truthful_flow(messages.size(), 0.0);
  std::vector<double> argmax_inflow(messages.size(), 0.0);
  double liar_total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const auto resp = state_response(i, messages, current, Environment::na_ur(), params);
    step.best_truth[i - 1] = resp.best_truth;
    step.best_lie[i - 1] = resp.best_lie;
    const double tau = std::max(0.0, resp.lie_value - resp.truth_value);
    step.thresholds[i - 1] = tau;
    const double f = grid.dist.cdf(tau);
    truthful_flow[resp.best_truth.bits() - 1] += (1.0 - f) / n;
    argmax_inflow[resp.best_lie.bits() - 1] += f / n;
    liar_total += f / n;
  }

  step.rho_hat.assign(messages.size(), off_path);
  if (gamma > 0.0 && cost_decomposes(params.cost) && liar_total > 1e-15) {
    // liars equalize base(J) + gamma * rho(J) across used targets; only
    // messages with truthful inflow can sustain a positive posterior
    auto supply = [&](double v) {
      double s = 0.0;
      for (const auto& j : messages) {
        const double truth = truthful_flow[j.bits() - 1];
        if (truth <= 0.0) continue;
        const double d = v - lie_base(j, params.cost);
        if (d <= 0.0) return 1e300;
        const double m = truth * (gamma / d - 1.0);
        if (m > 0.0) s += m;
      }
      return s;
    };
    double base_max = -1e300;
    for (const auto& j : messages)
      if (truthful_flow[j.bits() - 1] > 0.0)
        base_max = std::max(base_max, lie_base(j, params.cost));
    double lo = base_max, hi = base_max + gamma;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (supply(mid) > liar_total ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    double total_m = 0.0;
    for (const auto& j : messages) {
      const std::size_t k = j.bits() - 1;
      const double truth = truthful_flow[k];
      if (truth <= 0.0) continue;
      const double d = v - lie_base(j, params.cost);
      const double m = d > 0.0 ? std::max(0.0, truth * (gamma / d - 1.0)) : 0.0;
      step.weights[k] = m;
      total_m += m;
      step.rho_hat[k] = m > 0.0 ? std::clamp(d / gamma, 0.0, 1.0) : 1.0;
    }
    if (total_m > 0.0)
      for (double& w : step.weights) w /= total_m;
  } else {
    // pure-argmax allocation (gamma = 0 or non-decomposable cost)
    for (const auto& j : messages) {
      const std::size_t k = j.bits() - 1;
      const double total = truthful_flow[k] + argmax_inflow[k];
      if (total > 0.0) step.rho_hat[k] = truthful_flow[k] / total;
    }
  }
  return step;
}

inline StrategyProfile build_unrestricted_profile(const Environment& env,
                                                  const UnrestrictedStep& step,
                                                  const std::vector<Message>& messages,
                                                  const ModelParams& params, const TGrid& grid) {
  const int n = params.states.n;
  StrategyProfile profile(env, n, grid.size());
  for (int i = 1; i <= n; ++i) {
    const double tau = step.thresholds[i - 1];
    // liar targets usable by state i, renormalized
    std::vector<std::pair<Message, double>> lies;
    double wsum = 0.0;
    for (const auto& j : messages)
      if (!j.contains(i) && step.weights[j.bits() - 1] > 0.0) wsum += step.weights[j.bits() - 1];
    if (wsum > 0.0) {
      for (const auto& j : messages)
        if (!j.contains(i) && step.weights[j.bits() - 1] > 0.0)
          lies.emplace_back(j, step.weights[j.bits() - 1] / wsum);
    } else {
      lies.emplace_back(step.best_lie[i - 1], 1.0);
    }
    for (int c = 0; c < grid.size(); ++c) {
      const auto& cell = grid.cells[c];
      double frac = 0.0;
      if (tau > 0.0) {
        const double cut = std::clamp(tau, cell.t_lo, cell.t_hi);
        frac = (grid.dist.cdf(cut) - grid.dist.cdf(cell.t_lo)) / cell.mass;
      }
      auto& dist = profile.at(i, c);
      dist.clear();
      if (frac < 1e-15) {
        dist.emplace_back(step.best_truth[i - 1], 1.0);
      } else if (frac > 1.0 - 1e-15) {
        for (const auto& [j, w] : lies) dist.emplace_back(j, w);
      } else {
        dist.emplace_back(step.best_truth[i - 1], 1.0 - frac);
        for (const auto& [j, w] : lies) dist.emplace_back(j, frac * w);
      }
    }
  }
  return profile;
}

}  // namespace detail

// Damped best-response iteration on beliefs. Anonymous environments reduce
// to the closed forms immediately; non-anonymous ones iterate until the
// belief residual drops below tol. Non-convergence is reported, not thrown.
inline SolveResult solve_fixed_point(const Environment& env, const ModelParams& params,
                                     const TGrid& grid, const SolveOptions& opts,
                                     const StrategyProfile& init) {
  if (opts.damping <= 0.0 || opts.damping > 1.0)
    throw std::invalid_argument("solve_fixed_point: damping must be in (0, 1]");
  if (init.n != params.states.n || init.cells != grid.size())
    throw std::invalid_argument("solve_fixed_point: init profile shape mismatch");

  SolveResult result;
  if (env.anonymous()) {
    result.profile = env.restricted() ? solve_anonymous_restricted(params, grid)
                                      : solve_anonymous_unrestricted(params, grid);
    result.beliefs = posterior_beliefs(result.profile, params, grid, opts.off_path);
    result.report = check_equilibrium(result.profile, result.beliefs, params, grid, opts.tol);
    result.report.converged = true;
    result.report.iterations = 1;
    result.report.belief_residual = 0.0;
    return result;
  }

  const auto messages = detail::message_set(env, params.states);
  const BeliefMap init_beliefs = posterior_beliefs(init, params, grid, opts.off_path);

  const int n = params.states.n;
  std::vector<double> rho;
  if (env.restricted()) {
    rho.assign(n, opts.off_path);
    for (int j = 1; j <= n; ++j) rho[j - 1] = init_beliefs.at(Message::singleton(j));
  } else {
    rho.assign(messages.size(), opts.off_path);
    for (const auto& j : messages) rho[j.bits() - 1] = init_beliefs.at(j);
  }

  double residual = 1e300;
  int iterations = 0;
  auto one_step = [&](double lambda) {
    std::vector<double> rho_hat;
    if (env.restricted()) {
      rho_hat = detail::na_restricted_step(rho, params, grid).rho_hat;
    } else {
      rho_hat = detail::na_unrestricted_step(rho, messages, params, grid, opts.off_path).rho_hat;
    }
    double r = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) {
      r = std::max(r, std::abs(rho_hat[k] - rho[k]));
      rho[k] = (1.0 - lambda) * rho[k] + lambda * rho_hat[k];
    }
    return r;
  };

  for (; iterations < opts.max_iter; ) {
    ++iterations;
    residual = one_step(opts.damping);
    if (residual < opts.tol) break;
  }
  // undamped polish once inside the basin, keeps the reported residual honest
  if (residual < opts.tol) {
    for (int k = 0; k < 60 && residual > 1e-14; ++k) {
      ++iterations;
      residual = one_step(1.0);
    }
  }

  if (env.restricted()) {
    const auto step = detail::na_restricted_step(rho, params, grid);
    result.profile = detail::build_restricted_profile(env, step, params, grid);
  } else {
    const auto step = detail::na_unrestricted_step(rho, messages, params, grid, opts.off_path);
    result.profile = detail::build_unrestricted_profile(env, step, messages, params, grid);
  }
  result.beliefs = posterior_beliefs(result.profile, params, grid, opts.off_path);
  result.report = check_equilibrium(result.profile, result.beliefs, params, grid, opts.tol);
  result.report.iterations = iterations;
  result.report.belief_residual = residual;
  result.report.converged = residual < opts.tol;
  return result;
}

inline SolveResult solve_fixed_point(const Environment& env, const ModelParams& params,
                                     const TGrid& grid, const SolveOptions& opts,
                                     const std::string& seed = "truthful") {
  const std::string name = seed.empty() ? "truthful" : seed;
  return solve_fixed_point(env, params, grid, opts, seed_profile(name, env, params, grid));
}

struct Example2Report {
  bool is_equilibrium = false;
  bool truth_tellers_ok = true;
  bool liars_ok = true;
  std::string detail;
};

// Checks the interval-profile equilibrium conditions: truth-tellers must
// prefer their interval [i, N] to the OVM deviation, liars must prefer
// their interval to every non-interval message, under beliefs that assign
// zero to messages outside the interval family.
inline Example2Report verify_example2(const StrategyProfile& profile, const BeliefMap& beliefs,
                                      const ModelParams& params, const TGrid& grid) {
  const int n = params.states.n;
  Example2Report report;

  for (int i = 1; i <= n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c)) {
        if (p <= 1e-12) continue;
        if (!j.contains(n) || (j.size() > 1 && !is_interval(j)))
          throw std::invalid_argument("verify_example2: profile plays a non-interval message " +
                                      j.str());
      }

  // best non-interval deviations, per state (t-independent pieces)
  const auto all = enumerate_messages(params.states);
  for (int i = 1; i <= n && (report.truth_tellers_ok && report.liars_ok); ++i) {
    double best_truth_dev = -1e300, best_lie_dev = -1e300;
    for (const auto& j : all) {
      const bool in_family = j.contains(n) && (j.size() == 1 ? j.min_member() == n : is_interval(j));
      if (in_family) continue;
      const double mean = j.mean();
      if (j.contains(i))
        best_truth_dev = std::max(best_truth_dev, mean);
      else
        best_lie_dev =
            std::max(best_lie_dev, mean - params.cost.eval(static_cast<double>(i), mean));
    }
    const double ovm_value = ovm(i, params.states).mean();

    for (int c = 0; c < profile.cells; ++c) {
      const double t = grid.cells[c].t_mid;
      for (const auto& [j, p] : profile.at(i, c)) {
        if (p <= 1e-12) continue;
        const double social = params.gamma * beliefs.at(j);
        if (j.contains(i)) {
          if (!(j.mean() + social > ovm_value - 1e-12)) {
            report.truth_tellers_ok = false;
            report.detail = "state " + std::to_string(i) + " prefers the OVM deviation";
          }
        } else {
          const double own =
              j.mean() - t - params.cost.eval(static_cast<double>(i), j.mean()) + social;
          const double deviation = std::max(best_truth_dev, best_lie_dev - t);
          if (!(own > deviation - 1e-12)) {
            report.liars_ok = false;
            report.detail = "liar at state " + std::to_string(i) + " prefers a non-interval message";
          }
        }
      }
    }
  }
  report.is_equilibrium = report.truth_tellers_ok && report.liars_ok;
  return report;
}

}  // namespace vcg
