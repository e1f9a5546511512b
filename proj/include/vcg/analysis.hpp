#pragma once

#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vcg/equilibrium.hpp"
#include "vcg/messages.hpp"
#include "vcg/simulate.hpp"

// Report-data analysis: summary statistics, the subject typology across
// paired stages, message-length CDF, hypothesis checks, and the CSV schema
// shared with the simulator.

namespace vcg {

struct SummaryStats {
  double avg_report_restricted = std::nan("");
  double avg_report_unrestricted = std::nan("");
  double vague_share = 0.0;
  double avg_length = 0.0;
  int n = 0;
};

// Table-2 conventions: the average report of a vague message is the mean of
// its members, not the realized payoff; vague share and length cover the
// unrestricted stage.
inline SummaryStats summarize(const std::vector<ReportRecord>& records) {
  if (records.empty()) throw std::runtime_error("summarize: empty record set");
  SummaryStats s;
  s.n = static_cast<int>(records.size());
  double sum_r = 0.0, sum_ur = 0.0, sum_len = 0.0;
  int n_r = 0, n_ur = 0, n_vague = 0;
  for (const auto& r : records) {
    if (r.stage == Restriction::Restricted) {
      sum_r += r.message.mean();
      ++n_r;
    } else {
      sum_ur += r.message.mean();
      sum_len += r.message.size();
      if (is_vague(r.message)) ++n_vague;
      ++n_ur;
    }
  }
  if (n_r > 0) s.avg_report_restricted = sum_r / n_r;
  if (n_ur > 0) {
    s.avg_report_unrestricted = sum_ur / n_ur;
    s.vague_share = static_cast<double>(n_vague) / n_ur;
    s.avg_length = sum_len / n_ur;
  }
  return s;
}

enum class SubjectLabel { TruthTeller, ConditionalLiar, Liar, Unclassifiable };

struct SubjectType {
  SubjectLabel label = SubjectLabel::Unclassifiable;
  std::string note;
};

inline std::string subject_label_token(SubjectLabel l) {
  switch (l) {
    case SubjectLabel::TruthTeller: return "truth_teller";
    case SubjectLabel::ConditionalLiar: return "conditional_liar";
    case SubjectLabel::Liar: return "liar";
    case SubjectLabel::Unclassifiable: return "unclassifiable";
  }
  return "?";
}

// Typology over paired stages. The residual truthful-then-lying pattern is
// kept visible as unclassifiable with a note rather than folded away.
inline std::map<std::string, SubjectType> classify_subjects(
    const std::vector<ReportRecord>& records) {
  struct Pair {
    const ReportRecord* restricted = nullptr;
    const ReportRecord* unrestricted = nullptr;
  };
  std::map<std::string, Pair> by_subject;
  for (const auto& r : records) {
    auto& p = by_subject[r.subject_id];
    if (r.stage == Restriction::Restricted)
      p.restricted = &r;
    else
      p.unrestricted = &r;
  }

  std::map<std::string, SubjectType> out;
  for (const auto& [id, p] : by_subject) {
    SubjectType type;
    if (!p.restricted || !p.unrestricted) {
      type.note = "missing stage";
    } else if (!p.restricted->true_state || !p.unrestricted->true_state) {
      type.note = "unknown true state";
    } else {
      const bool lied_r = !is_truthful(*p.restricted->true_state, p.restricted->message);
      const bool lied_ur = !is_truthful(*p.unrestricted->true_state, p.unrestricted->message);
      if (!lied_r && !lied_ur)
        type.label = SubjectLabel::TruthTeller;
      else if (lied_r && !lied_ur)
        type.label = SubjectLabel::ConditionalLiar;
      else if (lied_r && lied_ur)
        type.label = SubjectLabel::Liar;
      else
        type.note = "truthful restricted, lied unrestricted";
    }
    out[id] = type;
  }
  return out;
}

// Cumulative distribution of unrestricted-stage message lengths.
inline std::vector<std::pair<int, double>> length_cdf(const std::vector<ReportRecord>& records) {
  std::vector<int> counts;
  int total = 0;
  for (const auto& r : records) {
    if (r.stage != Restriction::Unrestricted) continue;
    const int len = r.message.size();
    if (len > static_cast<int>(counts.size())) counts.resize(len, 0);
    ++counts[len - 1];
    ++total;
  }
  if (total == 0) throw std::runtime_error("length_cdf: no unrestricted-stage records");
  std::vector<std::pair<int, double>> cdf;
  int acc = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    acc += counts[k];
    cdf.emplace_back(static_cast<int>(k + 1), static_cast<double>(acc) / total);
  }
  return cdf;
}

// ---------------------------------------------------------------------------
// CSV schema: subject_id,environment,stage,true_state,message,realized_payoff
// ---------------------------------------------------------------------------

inline const char* kCsvHeader = "subject_id,environment,stage,true_state,message,realized_payoff";

inline void emit_csv(const std::vector<ReportRecord>& records, std::ostream& out) {
  out << kCsvHeader << "\n";
  for (const auto& r : records) {
    out << r.subject_id << ','
        << (r.environment.anonymous() ? "anonymous" : "non_anonymous") << ','
        << (r.stage == Restriction::Restricted ? "restricted" : "unrestricted") << ',';
    if (r.true_state) out << *r.true_state;
    out << ',' << r.message.str() << ',';
    if (r.realized_payoff) out << *r.realized_payoff;
    out << '\n';
  }
}

inline std::vector<ReportRecord> ingest_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("ingest_csv: empty input");
  if (line != kCsvHeader)
    throw std::runtime_error("ingest_csv: bad header '" + line + "'");

  std::vector<ReportRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      std::size_t next = line.find(',', pos);
      fields.push_back(line.substr(pos, next == std::string::npos ? next : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    const std::string where = " at row " + std::to_string(row);
    if (fields.size() != 6) throw std::runtime_error("ingest_csv: expected 6 fields" + where);
    ReportRecord r;
    try {
      r.subject_id = fields[0];
      if (fields[1] == "anonymous")
        r.environment.anonymity = Anonymity::Anonymous;
      else if (fields[1] == "non_anonymous")
        r.environment.anonymity = Anonymity::NonAnonymous;
      else
        throw std::runtime_error("unknown environment token '" + fields[1] + "'");
      if (fields[2] == "restricted")
        r.stage = Restriction::Restricted;
      else if (fields[2] == "unrestricted")
        r.stage = Restriction::Unrestricted;
      else
        throw std::runtime_error("unknown stage token '" + fields[2] + "'");
      r.environment.restriction = r.stage;
      if (!fields[3].empty()) r.true_state = std::stoi(fields[3]);
      r.message = Message::parse(fields[4], 31);
      if (!fields[5].empty()) r.realized_payoff = std::stoi(fields[5]);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("ingest_csv: ") + e.what() + where);
    }
    if (r.true_state && (*r.true_state < 1 || *r.true_state > 31))
      throw std::runtime_error("ingest_csv: true_state out of range" + where);
    if (r.realized_payoff && !r.message.contains(*r.realized_payoff))
      throw std::runtime_error("ingest_csv: realized_payoff not in message" + where);
    records.push_back(std::move(r));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Hypothesis checks on solved profiles
// ---------------------------------------------------------------------------

struct HypothesisEntry {
  std::string id;
  bool checked = false;
  bool satisfied = false;
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;

  bool all_satisfied() const {
    for (const auto& e : entries)
      if (e.checked && !e.satisfied) return false;
    return true;
  }
};

struct SolvedEnvironments {
  StrategyProfile a_r;
  StrategyProfile a_ur;
  SolveResult na_r;
  SolveResult na_ur;
};

namespace detail {

inline double profile_liar_mass(const StrategyProfile& profile, const TGrid& grid) {
  double mass = 0.0;
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c))
        if (!j.contains(i)) mass += grid.cells[c].mass / profile.n * p;
  return mass;
}

inline double profile_vague_mass(const StrategyProfile& profile, const TGrid& grid) {
  double mass = 0.0;
  for (int i = 1; i <= profile.n; ++i)
    for (int c = 0; c < profile.cells; ++c)
      for (const auto& [j, p] : profile.at(i, c))
        if (is_vague(j)) mass += grid.cells[c].mass / profile.n * p;
  return mass;
}

}  // namespace detail

// Evaluates H1-H4 on the analytic profiles (not sampled data).
inline HypothesisReport check_hypotheses(const SolvedEnvironments& solved,
                                         const ModelParams& params, const TGrid& grid) {
  HypothesisReport report;
  std::ostringstream detail;

  // H1: vague messages used in both unrestricted environments
  {
    HypothesisEntry e{"H1", true, false, ""};
    const double aur = detail::profile_vague_mass(solved.a_ur, grid);
    if (!solved.na_ur.report.converged) {
      e.checked = false;
      e.detail = "NA-UR profile not converged (residual " +
                 std::to_string(solved.na_ur.report.belief_residual) + ")";
    } else {
      const double naur = detail::profile_vague_mass(solved.na_ur.profile, grid);
      e.satisfied = aur > 0.0 && naur > 0.0;
      detail.str("");
      detail << "vague mass A-UR=" << aur << " NA-UR=" << naur;
      e.detail = detail.str();
    }
    report.entries.push_back(e);
  }

  // H2: restricted communication induces more lying, anonymous environment
  {
    HypothesisEntry e{"H2", true, false, ""};
    const auto liars_r = liar_set(solved.a_r, grid);
    const auto liars_ur = liar_set(solved.a_ur, grid);
    bool subset = true;
    for (const auto& cell : liars_ur)
      if (!liars_r.count(cell)) subset = false;
    bool strict = true;
    for (int i = 1; i < params.states.n; ++i) {
      bool found = false;
      for (const auto& [state, c] : liars_r)
        if (state == i && !liars_ur.count({state, c})) found = true;
      if (!found) strict = false;
    }
    const double mass_r = detail::profile_liar_mass(solved.a_r, grid);
    const double mass_ur = detail::profile_liar_mass(solved.a_ur, grid);
    const double earn_r = expected_earnings(solved.a_r, grid);
    const double earn_ur = expected_earnings(solved.a_ur, grid);
    e.satisfied = subset && strict && mass_r > mass_ur && earn_ur >= earn_r;
    detail.str("");
    detail << "liar mass A-R=" << mass_r << " A-UR=" << mass_ur << ", earnings A-R=" << earn_r
           << " A-UR=" << earn_ur;
    e.detail = detail.str();
    report.entries.push_back(e);
  }

  // H3: A-UR truth-tellers use the OVM; no number below the true observation;
  // the only truthful precise message is {N}
  {
    HypothesisEntry e{"H3", true, true, ""};
    for (int i = 1; i <= params.states.n && e.satisfied; ++i) {
      const Message expected = ovm(i, params.states);
      for (int c = 0; c < solved.a_ur.cells && e.satisfied; ++c)
        for (const auto& [j, p] : solved.a_ur.at(i, c)) {
          if (p <= 1e-12) continue;
          if (j.contains(i) && j != expected) {
            e.satisfied = false;
            e.detail = "truth-teller at state " + std::to_string(i) + " plays " + j.str();
          }
          if (j.min_member() < i) {
            e.satisfied = false;
            e.detail = "message below the true observation at state " + std::to_string(i);
          }
          if (is_precise(j) && j.contains(i) && j.min_member() != params.states.n) {
            e.satisfied = false;
            e.detail = "truthful precise message other than {N} at state " + std::to_string(i);
          }
        }
    }
    if (e.satisfied) e.detail = "all truth-tellers on OVM, no below-observation members";
    report.entries.push_back(e);
  }

  // H4: earnings NA-R <= A-R
  {
    HypothesisEntry e{"H4", true, false, ""};
    if (!solved.na_r.report.converged) {
      e.checked = false;
      e.detail = "NA-R not converged (residual " +
                 std::to_string(solved.na_r.report.belief_residual) + ")";
    } else {
      const double earn_na = expected_earnings(solved.na_r.profile, grid);
      const double earn_a = expected_earnings(solved.a_r, grid);
      e.satisfied = earn_na <= earn_a + 1e-12;
      detail.str("");
      detail << "earnings NA-R=" << earn_na << " A-R=" << earn_a;
      e.detail = detail.str();
    }
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace vcg
