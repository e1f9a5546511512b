#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vcg/equilibrium.hpp"
#include "vcg/model.hpp"

// Population simulation: draws agents, samples reports from a strategy
// profile, and emulates the paired two-stage session structure.

namespace vcg {

// Counter-based splitmix64 stream, split per subject. Deterministic for a
// given (seed, subject) pair regardless of scheduling.
class SubjectRng {
 public:
  SubjectRng(std::uint64_t seed, std::uint64_t subject)
      : state_(mix(seed ^ mix(subject + 0x9e3779b97f4a7c15ull))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  double unit() { return (next() >> 11) * 0x1.0p-53; }

  // uniform draw in 0..k-1
  int below(int k) { return static_cast<int>(next() % static_cast<std::uint64_t>(k)); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }
  std::uint64_t state_;
};

enum class StageOrder { Randomized, Fixed };

struct SimConfig {
  int n_agents = 1000;
  std::uint64_t seed = 1;
  Environment environment;
  StageOrder stage_order = StageOrder::Fixed;
  // Non-anonymous treatments never reveal the true observation; blanking
  // reproduces that information structure on the output records.
  bool record_true_state = true;

  void validate() const {
    if (n_agents < 1) throw std::invalid_argument("SimConfig: n_agents must be >= 1");
  }
};

struct ReportRecord {
  std::string subject_id;
  Environment environment;
  Restriction stage = Restriction::Unrestricted;
  std::optional<int> true_state;
  Message message = Message::singleton(1);
  std::optional<int> realized_payoff;
};

namespace detail {

inline Message sample_message(const std::vector<std::pair<Message, double>>& dist,
                              SubjectRng& rng) {
  const double u = rng.unit();
  double acc = 0.0;
  for (const auto& [j, p] : dist) {
    acc += p;
    if (u < acc) return j;
  }
  return dist.back().first;
}

inline int sample_payoff(const Message& j, SubjectRng& rng) {
  const auto members = j.members();
  return members[rng.below(static_cast<int>(members.size()))];
}

struct StageDraw {
  int state;
  Message message;
  int payoff;
};

inline StageDraw draw_stage(const StrategyProfile& profile, const ModelParams& params,
                            const TGrid& grid, double t, SubjectRng& rng) {
  StageDraw d;
  d.state = 1 + rng.below(params.states.n);
  d.message = sample_message(profile.at(d.state, grid.cell_index(t)), rng);
  d.payoff = sample_payoff(d.message, rng);
  return d;
}

}  // namespace detail

inline std::vector<ReportRecord> simulate_population(const StrategyProfile& profile,
                                                     const ModelParams& params, const TGrid& grid,
                                                     const SimConfig& config) {
  config.validate();
  if (!(profile.environment == config.environment))
    throw std::invalid_argument("simulate_population: profile/environment mismatch");
  if (profile.n != params.states.n || profile.cells != grid.size())
    throw std::invalid_argument("simulate_population: profile shape mismatch");

  std::vector<ReportRecord> records;
  records.reserve(config.n_agents);
  for (int k = 0; k < config.n_agents; ++k) {
    SubjectRng rng(config.seed, static_cast<std::uint64_t>(k));
    const double t = grid.dist.quantile(rng.unit());
    const auto draw = detail::draw_stage(profile, params, grid, t, rng);
    ReportRecord r;
    r.subject_id = "s" + std::to_string(k + 1);
    r.environment = config.environment;
    r.stage = config.environment.restriction;
    if (config.record_true_state) r.true_state = draw.state;
    r.message = draw.message;
    r.realized_payoff = draw.payoff;
    records.push_back(std::move(r));
  }
  return records;
}

// Two-stage session: one aversion type per subject, independent observations
// per stage, optional per-subject randomization of the stage order.
inline std::vector<ReportRecord> paired_session(const StrategyProfile& profile_r,
                                                const StrategyProfile& profile_ur,
                                                const ModelParams& params, const TGrid& grid,
                                                const SimConfig& config) {
  config.validate();
  if (!profile_r.environment.restricted() || profile_ur.environment.restricted())
    throw std::invalid_argument("paired_session: need one restricted and one unrestricted profile");
  if (profile_r.n != params.states.n || profile_ur.n != params.states.n ||
      profile_r.cells != grid.size() || profile_ur.cells != grid.size())
    throw std::invalid_argument("paired_session: profile shape mismatch");

  std::vector<ReportRecord> records;
  records.reserve(2 * static_cast<std::size_t>(config.n_agents));
  for (int k = 0; k < config.n_agents; ++k) {
    SubjectRng rng(config.seed, static_cast<std::uint64_t>(k));
    const double t = grid.dist.quantile(rng.unit());
    const bool restricted_first =
        config.stage_order == StageOrder::Fixed ? true : rng.below(2) == 0;
    // draw order is fixed so the stage-order flag only permutes emission
    const auto dr = detail::draw_stage(profile_r, params, grid, t, rng);
    const auto dur = detail::draw_stage(profile_ur, params, grid, t, rng);

    auto make = [&](Restriction stage, const detail::StageDraw& d) {
      ReportRecord r;
      r.subject_id = "s" + std::to_string(k + 1);
      r.environment = config.environment;
      r.stage = stage;
      if (config.record_true_state) r.true_state = d.state;
      r.message = d.message;
      r.realized_payoff = d.payoff;
      return r;
    };
    if (restricted_first) {
      records.push_back(make(Restriction::Restricted, dr));
      records.push_back(make(Restriction::Unrestricted, dur));
    } else {
      records.push_back(make(Restriction::Unrestricted, dur));
      records.push_back(make(Restriction::Restricted, dr));
    }
  }
  return records;
}

}  // namespace vcg
