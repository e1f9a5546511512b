#pragma once

#include <optional>
#include <vector>

#include "vcg/model.hpp"

// Message lattice: enumeration, optimal vague messages, best lies,
// and the message-form taxonomy used for report classification.

namespace vcg {

// All 2^N - 1 messages in canonical order (ascending bit pattern).
inline std::vector<Message> enumerate_messages(const StateSpace& states) {
  if (states.n > kMaxStates)
    throw std::length_error("enumerate_messages: N too large");
  const std::uint32_t limit = (1u << states.n) - 1;
  std::vector<Message> out;
  out.reserve(limit);
  for (std::uint32_t b = 1; b <= limit; ++b) out.emplace_back(b);
  return out;
}

// Tail threshold for the optimal vague message, computed exactly: extend the
// tail downward from N while the next element strictly improves the mean.
// The mean is unimodal in the tail start, so the greedy stop is the optimum;
// stopping on ties keeps the shortest maximizer. (The closed-form
// ceil((N+2) - sqrt(2N-2i+3)) approximation misses the optimum for some N,
// e.g. N=10, i=4.)
inline int ovm_tail_start(int i, const StateSpace& states) {
  long sum = i;
  long count = 1;
  int x = states.n + 1;
  for (int v = states.n; v > i; --v) {
    if (v * count <= sum) break;  // v would not raise the mean
    sum += v;
    ++count;
    x = v;
  }
  return x;
}

// Optimal vague message: {i} plus the tail {x*, ..., N}. If the formula puts
// the tail past N, the message degenerates to {i}; if the tail would start
// at or below i, the message is the interval {i, ..., N}.
inline Message ovm(int i, const StateSpace& states) {
  if (i < 1 || i > states.n) throw std::invalid_argument("ovm: state outside 1..N");
  const int x = ovm_tail_start(i, states);
  if (x > states.n) return Message::singleton(i);
  if (x <= i) return Message::interval(i, states.n);
  std::uint32_t bits = Message::singleton(i).bits() | Message::interval(x, states.n).bits();
  return Message(bits);
}

struct OvmBruteforceResult {
  double best_mean = 0.0;
  std::vector<Message> all_maximizers;
};

// Independent oracle: exhaustive search over all truthful messages J with i in J.
inline OvmBruteforceResult ovm_bruteforce(int i, const StateSpace& states) {
  if (states.n > 16) throw std::length_error("ovm_bruteforce: N too large");
  if (i < 1 || i > states.n) throw std::invalid_argument("ovm_bruteforce: state outside 1..N");
  OvmBruteforceResult r;
  r.best_mean = -1.0;
  const std::uint32_t limit = (1u << states.n) - 1;
  const std::uint32_t self = 1u << (i - 1);
  for (std::uint32_t b = 1; b <= limit; ++b) {
    if (!(b & self)) continue;
    const double m = Message(b).mean();
    if (m > r.best_mean + 1e-12) {
      r.best_mean = m;
      r.all_maximizers.assign(1, Message(b));
    } else if (m > r.best_mean - 1e-12) {
      r.all_maximizers.emplace_back(b);
    }
  }
  return r;
}

struct BestLie {
  Message message;
  double value = 0.0;  // pi-bar(J) - c(i, pi-bar(J)), excludes t and the identity term
};

// Exhaustive argmax over lies J (i not in J) of the payoff net of variable cost.
// Ties break toward the larger pi-bar, then the smaller canonical bit pattern.
inline BestLie best_lie(int i, const ModelParams& params) {
  const int n = params.states.n;
  if (n > 16) throw std::length_error("best_lie: N too large");
  BestLie best{Message::singleton(i == 1 ? 2 : 1), -1e300};
  double best_mean = 0.0;
  const std::uint32_t limit = (1u << n) - 1;
  const std::uint32_t self = 1u << (i - 1);
  for (std::uint32_t b = 1; b <= limit; ++b) {
    if (b & self) continue;
    const Message j(b);
    const double mean = j.mean();
    const double v = mean - params.cost.eval(static_cast<double>(i), mean);
    if (v > best.value + 1e-12 ||
        (v > best.value - 1e-12 &&
         (mean > best_mean + 1e-12 ||
          (mean > best_mean - 1e-12 && b < best.message.bits())))) {
      best = {j, v};
      best_mean = mean;
    }
  }
  return best;
}

// Consecutive integers, at least two of them.
inline bool is_interval(const Message& j) {
  if (j.size() < 2) return false;
  return j.max_member() - j.min_member() + 1 == j.size();
}

enum class MessageKind {
  PreciseTruthful,
  PreciseLie,
  PreciseUnknownTruth,
  Optimal,
  PseudoOptimal,
  Pair,
  OtherVague,
};

struct MessageLabel {
  MessageKind kind = MessageKind::OtherVague;
  bool interval_flag = false;
};

inline std::string kind_token(MessageKind k) {
  switch (k) {
    case MessageKind::PreciseTruthful: return "precise_truthful";
    case MessageKind::PreciseLie: return "precise_lie";
    case MessageKind::PreciseUnknownTruth: return "precise";
    case MessageKind::Optimal: return "optimal";
    case MessageKind::PseudoOptimal: return "pseudo_optimal";
    case MessageKind::Pair: return "pair";
    case MessageKind::OtherVague: return "other";
  }
  return "?";
}

// Taxonomy with precedence Optimal/PseudoOptimal > Pair > OtherVague.
// With an unknown true state, min(J) serves as the pseudo-true-observation.
inline MessageLabel classify_message(const Message& j, std::optional<int> true_state,
                                     const StateSpace& states) {
  MessageLabel label;
  label.interval_flag = is_interval(j);
  if (true_state) {
    const int i = *true_state;
    if (is_precise(j)) {
      label.kind = is_truthful(i, j) ? MessageKind::PreciseTruthful : MessageKind::PreciseLie;
    } else if (j == ovm(i, states)) {
      label.kind = MessageKind::Optimal;
    } else if (i != states.n && j == Message::from_members({i, states.n}, states.n)) {
      label.kind = MessageKind::Pair;
    } else {
      label.kind = MessageKind::OtherVague;
    }
  } else {
    if (is_precise(j)) {
      label.kind = MessageKind::PreciseUnknownTruth;
    } else if (j == ovm(j.min_member(), states)) {
      label.kind = MessageKind::PseudoOptimal;
    } else if (j.size() == 2) {
      label.kind = MessageKind::Pair;
    } else {
      label.kind = MessageKind::OtherVague;
    }
  }
  return label;
}

}  // namespace vcg
