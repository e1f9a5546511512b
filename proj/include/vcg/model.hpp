#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Core model primitives: states, messages, lying costs, type distribution
// and the utility evaluators everything else is built on.

namespace vcg {

inline constexpr int kMaxStates = 20;  // message enumeration guard

struct StateSpace {
  int n = 10;

  explicit StateSpace(int n_ = 10) : n(n_) {
    if (n < 2) throw std::invalid_argument("StateSpace: n must be >= 2");
    if (n > 31) throw std::invalid_argument("StateSpace: n too large for bitmask messages");
  }
};

// Nonempty subset of {1..N}, stored as a bit pattern (bit s-1 <=> state s).
// Canonical order across messages is ascending bit-pattern value.
class Message {
 public:
  Message() = default;
  explicit Message(std::uint32_t bits) : bits_(bits) {
    if (bits_ == 0) throw std::invalid_argument("Message: empty message");
  }

  static Message from_members(const std::vector<int>& members, int n) {
    std::uint32_t b = 0;
    for (int s : members) {
      if (s < 1 || s > n) throw std::invalid_argument("Message: member outside 1..N");
      b |= (1u << (s - 1));
    }
    return Message(b);
  }

  static Message singleton(int s) { return Message(1u << (s - 1)); }

  static Message interval(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("Message: empty interval");
    std::uint32_t b = 0;
    for (int s = lo; s <= hi; ++s) b |= (1u << (s - 1));
    return Message(b);
  }

  static Message full(int n) { return interval(1, n); }

  std::uint32_t bits() const { return bits_; }
  bool contains(int s) const { return (bits_ >> (s - 1)) & 1u; }
  int size() const { return std::popcount(bits_); }

  int min_member() const { return std::countr_zero(bits_) + 1; }
  int max_member() const { return 32 - std::countl_zero(bits_); }

  std::vector<int> members() const {
    std::vector<int> out;
    for (std::uint32_t b = bits_; b; b &= b - 1) out.push_back(std::countr_zero(b) + 1);
    return out;
  }

  // pi-bar: the expected monetary payoff of a uniform draw over the set.
  double mean() const {
    long sum = 0;
    for (std::uint32_t b = bits_; b; b &= b - 1) sum += std::countr_zero(b) + 1;
    return static_cast<double>(sum) / size();
  }

  // "3;8;9;10"
  std::string str() const {
    std::string out;
    for (int s : members()) {
      if (!out.empty()) out += ';';
      out += std::to_string(s);
    }
    return out;
  }

  static Message parse(const std::string& token, int n) {
    std::vector<int> members;
    std::size_t pos = 0;
    while (pos < token.size()) {
      std::size_t next = token.find(';', pos);
      if (next == std::string::npos) next = token.size();
      std::string part = token.substr(pos, next - pos);
      if (part.empty()) throw std::invalid_argument("Message: empty member token");
      members.push_back(std::stoi(part));
      pos = next + 1;
    }
    if (members.empty()) throw std::invalid_argument("Message: empty message token");
    return from_members(members, n);
  }

  bool operator==(const Message& o) const { return bits_ == o.bits_; }
  bool operator!=(const Message& o) const { return bits_ != o.bits_; }
  bool operator<(const Message& o) const { return bits_ < o.bits_; }

 private:
  std::uint32_t bits_ = 1;
};

inline double expected_payoff(const Message& j) { return j.mean(); }

inline bool is_truthful(int i, const Message& j) { return j.contains(i); }
inline bool is_precise(const Message& j) { return j.size() == 1; }
inline bool is_vague(const Message& j) { return j.size() > 1; }

struct AgentType {
  int state = 1;
  double aversion = 0.0;
};

// Variable cost of lying c(a, b), a = payoff of the true precise report,
// b = expected payoff of the sent message.
struct CostSpec {
  enum class Variant { Zero, Linear, Quadratic, Table };

  struct TableEntry {
    double a, b, cost;
  };

  Variant variant = Variant::Linear;
  double kappa = 0.1;
  std::vector<TableEntry> table;

  static CostSpec zero() { return {Variant::Zero, 0.0, {}}; }
  static CostSpec linear(double k) { return {Variant::Linear, k, {}}; }
  static CostSpec quadratic(double k) { return {Variant::Quadratic, k, {}}; }

  double eval(double a, double b) const {
    switch (variant) {
      case Variant::Zero:
        return 0.0;
      case Variant::Linear:
        return kappa * std::abs(a - b);
      case Variant::Quadratic:
        return kappa * (a - b) * (a - b);
      case Variant::Table: {
        for (const auto& e : table)
          if (std::abs(e.a - a) < 1e-9 && std::abs(e.b - b) < 1e-9) return e.cost;
        throw std::domain_error("CostSpec: table query outside grid");
      }
    }
    return 0.0;
  }

  std::string variant_name() const {
    switch (variant) {
      case Variant::Zero: return "zero";
      case Variant::Linear: return "linear";
      case Variant::Quadratic: return "quadratic";
      case Variant::Table: return "table";
    }
    return "?";
  }
};

inline double cost_eval(const CostSpec& cost, double a, double b) { return cost.eval(a, b); }

struct CostValidation {
  bool pass = true;
  std::string violated;  // "i".."v" when failed
  std::string detail;
};

// All achievable pi-bar values: means of nonempty subsets of 1..N.
// Exact enumeration up to N = 12, a sampled grid beyond that.
inline std::vector<double> achievable_means(const StateSpace& states) {
  std::set<double> vals;
  if (states.n <= 12) {
    const std::uint32_t limit = (1u << states.n) - 1;
    for (std::uint32_t b = 1; b <= limit; ++b) vals.insert(Message(b).mean());
  } else {
    for (int i = 1; i <= states.n; ++i) {
      vals.insert(static_cast<double>(i));
      if (i < states.n) vals.insert(i + 0.5);
    }
    for (int i = 1; i <= states.n; ++i)
      for (int j = i + 2; j <= states.n; ++j) vals.insert((i + j) / 2.0);
  }
  return {vals.begin(), vals.end()};
}

// Checks cost assumptions (i)-(v) over the achievable-mean grid.
// Never throws: table gaps and violations come back as a failure descriptor.
inline CostValidation validate_cost(const CostSpec& cost, const StateSpace& states) {
  CostValidation r;
  auto fail = [&](const std::string& which, const std::string& detail) {
    r.pass = false;
    r.violated = which;
    r.detail = detail;
    return r;
  };

  std::vector<double> grid;
  try {
    grid = achievable_means(states);

    for (int a = 1; a <= states.n; ++a)
      for (double b : grid)
        if (cost.eval(a, b) < 0.0)
          return fail("i", "negative cost at (" + std::to_string(a) + ", " + std::to_string(b) + ")");

    for (int a = 1; a <= states.n; ++a)
      if (std::abs(cost.eval(a, a)) > 1e-12)
        return fail("ii", "c(x,x) != 0 at x = " + std::to_string(a));

    // (iii) weakly increasing in |a - b|, first argument a precise truth
    for (int a = 1; a <= states.n; ++a) {
      std::vector<std::pair<double, double>> by_dist;  // (|a-b|, cost)
      for (double b : grid) by_dist.emplace_back(std::abs(a - b), cost.eval(a, b));
      std::sort(by_dist.begin(), by_dist.end());
      for (std::size_t k = 1; k < by_dist.size(); ++k)
        if (by_dist[k].second < by_dist[k - 1].second - 1e-12)
          return fail("iii", "cost not weakly increasing in |a-b| for a = " + std::to_string(a));
    }

    for (int a = 1; a < states.n; ++a)
      if (cost.eval(a, a + 1) >= 1.0)
        return fail("iv", "c(i, i+1) >= 1 at i = " + std::to_string(a));

    // (v) triangle inequality c(a,b) + c(b,d) >= c(a,d)
    for (int a = 1; a <= states.n; ++a)
      for (double b : grid)
        for (double d : grid)
          if (cost.eval(a, b) + cost.eval(b, d) < cost.eval(a, d) - 1e-12)
            return fail("v", "triangle inequality violated at a = " + std::to_string(a));
  } catch (const std::exception& e) {
    return fail("i", std::string("evaluation error: ") + e.what());
  }
  return r;
}

// CDF of the intrinsic aversion type t on [0, T].
struct TypeDistribution {
  enum class Variant { Uniform, Table };

  Variant variant = Variant::Uniform;
  double t_max = 13.0;
  std::vector<std::pair<double, double>> cdf_table;  // (t, F(t)), strictly increasing

  static TypeDistribution uniform(double t_max) {
    if (t_max <= 0.0) throw std::invalid_argument("TypeDistribution: t_max must be positive");
    TypeDistribution d;
    d.variant = Variant::Uniform;
    d.t_max = t_max;
    return d;
  }

  static TypeDistribution from_table(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("TypeDistribution: table too short");
    TypeDistribution d;
    d.variant = Variant::Table;
    d.cdf_table = std::move(table);
    d.t_max = d.cdf_table.back().first;
    if (d.cdf_table.front().first != 0.0 || std::abs(d.cdf_table.front().second) > 1e-12)
      throw std::invalid_argument("TypeDistribution: F(0) must be 0");
    if (std::abs(d.cdf_table.back().second - 1.0) > 1e-12)
      throw std::invalid_argument("TypeDistribution: F(T) must be 1");
    for (std::size_t k = 1; k < d.cdf_table.size(); ++k)
      if (d.cdf_table[k].first <= d.cdf_table[k - 1].first ||
          d.cdf_table[k].second <= d.cdf_table[k - 1].second)
        throw std::invalid_argument("TypeDistribution: CDF must be strictly increasing");
    return d;
  }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= t_max) return 1.0;
    if (variant == Variant::Uniform) return t / t_max;
    auto it = std::upper_bound(cdf_table.begin(), cdf_table.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.second + (hi.second - lo.second) * (t - lo.first) / (hi.first - lo.first);
  }

  // Inverse CDF, used for sampling.
  double quantile(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    if (variant == Variant::Uniform) return u * t_max;
    auto it = std::upper_bound(cdf_table.begin(), cdf_table.end(), u,
                               [](double v, const auto& p) { return v < p.second; });
    if (it == cdf_table.begin()) return 0.0;
    if (it == cdf_table.end()) return t_max;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.first + (hi.first - lo.first) * (u - lo.second) / (hi.second - lo.second);
  }
};

struct ModelParams {
  StateSpace states;
  double gamma = 2.0;
  CostSpec cost;
  TypeDistribution dist;

  ModelParams(StateSpace s, double g, CostSpec c, TypeDistribution d)
      : states(s), gamma(g), cost(std::move(c)), dist(std::move(d)) {
    if (gamma < 0.0) throw std::invalid_argument("ModelParams: gamma must be nonnegative");
    if (states.n + gamma >= dist.t_max)
      throw std::invalid_argument(
          "ModelParams: N + gamma < T required (positive mass of truth-tellers)");
  }

  // Linear cost kappa = 0.1, uniform types on [0, N + gamma + 1].
  static ModelParams defaults(int n = 10, double gamma = 2.0) {
    return ModelParams(StateSpace(n), gamma, CostSpec::linear(0.1),
                       TypeDistribution::uniform(n + gamma + 1.0));
  }
};

enum class Anonymity { Anonymous, NonAnonymous };
enum class Restriction { Restricted, Unrestricted };

struct Environment {
  Anonymity anonymity = Anonymity::Anonymous;
  Restriction restriction = Restriction::Unrestricted;

  bool anonymous() const { return anonymity == Anonymity::Anonymous; }
  bool restricted() const { return restriction == Restriction::Restricted; }

  static Environment a_r() { return {Anonymity::Anonymous, Restriction::Restricted}; }
  static Environment a_ur() { return {Anonymity::Anonymous, Restriction::Unrestricted}; }
  static Environment na_r() { return {Anonymity::NonAnonymous, Restriction::Restricted}; }
  static Environment na_ur() { return {Anonymity::NonAnonymous, Restriction::Unrestricted}; }

  std::string str() const {
    return std::string(anonymous() ? "a" : "na") + (restricted() ? "-r" : "-ur");
  }

  static Environment parse(const std::string& s) {
    if (s == "a-r") return a_r();
    if (s == "a-ur") return a_ur();
    if (s == "na-r") return na_r();
    if (s == "na-ur") return na_ur();
    throw std::invalid_argument("Environment: unknown token '" + s + "'");
  }

  bool operator==(const Environment& o) const {
    return anonymity == o.anonymity && restriction == o.restriction;
  }
};

// Utility without the social identity term (anonymous environments).
inline double utility_anonymous(int i, const Message& j, double t, const ModelParams& params) {
  const double mean = j.mean();
  if (j.contains(i)) return mean;
  return mean - t - params.cost.eval(static_cast<double>(i), mean);
}

// Full utility: monetary payoff - internal guilt + gamma * rho(J).
inline double utility(int i, const Message& j, double t, const ModelParams& params, double rho_j) {
  if (rho_j < 0.0 || rho_j > 1.0) throw std::invalid_argument("utility: rho must be in [0,1]");
  return utility_anonymous(i, j, t, params) + params.gamma * rho_j;
}

}  // namespace vcg
