#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macgame/channel.hpp"
#include "macgame/error.hpp"
#include "macgame/phy.hpp"

namespace macgame {

enum class Discipline { Dcf, EdcfBfl, EdcfBeb, TimeFair };
enum class BurstPolicy { Bfl, Beb };
enum class Player { I, J };

inline std::string_view to_string(Discipline d) {
  switch (d) {
    case Discipline::Dcf: return "DCF";
    case Discipline::EdcfBfl: return "EDCF_BFL";
    case Discipline::EdcfBeb: return "EDCF_BEB";
    case Discipline::TimeFair: return "TIME_FAIR";
  }
  return "?";
}

inline std::optional<Discipline> parse_discipline(std::string_view s) {
  for (auto d : {Discipline::Dcf, Discipline::EdcfBfl, Discipline::EdcfBeb, Discipline::TimeFair})
    if (s == to_string(d)) return d;
  return std::nullopt;
}

inline std::string_view to_string(Player p) { return p == Player::I ? "i" : "j"; }

// Relative slack used whenever two payoffs are compared.
inline constexpr double kPayoffTolerance = 1e-9;

inline bool strictly_better(double a, double b) {
  return a > b + kPayoffTolerance * std::max(std::abs(a), std::abs(b));
}

inline bool payoff_equal(double a, double b) {
  return !strictly_better(a, b) && !strictly_better(b, a);
}

// ---------------------------------------------------------------------------
// Occupancy per stagegame
// ---------------------------------------------------------------------------

// One frame per stagegame: s / gamma, which is the frame airtime.
inline double occupancy_dcf(const Strategy& s, const PhyProfile& phy) {
  return s.payload_bits / ideal_throughput(s, phy);
}

// Expected frames per TXOP. BEB always sends the full burst; BFL stops at the
// first loss, so frame k is the last with probability alpha^(k-1)(1 - alpha).
inline double expected_burst(const Strategy& s, double alpha, const PhyProfile& phy,
                             BurstPolicy policy) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  const int n = max_burst_frames(s, phy);
  if (policy == BurstPolicy::Beb) return n;
  double expected = 0.0;
  double mass = 0.0;
  double reach = 1.0;  // alpha^(k-1)
  for (int k = 1; k < n; ++k) {
    const double p = reach * (1.0 - alpha);
    expected += p * k;
    mass += p;
    reach *= alpha;
  }
  return expected + (1.0 - mass) * n;
}

inline double occupancy_edcf(const Strategy& s, double alpha, const PhyProfile& phy,
                             BurstPolicy policy) {
  return expected_burst(s, alpha, phy, policy) * frame_airtime(s, phy);
}

struct Occupancy {
  double time_s = 0.0;
  double frames = 0.0;
};

inline Occupancy occupancy(Discipline d, const Strategy& s, double alpha, const PhyProfile& phy) {
  switch (d) {
    case Discipline::Dcf: return {occupancy_dcf(s, phy), 1.0};
    case Discipline::EdcfBfl:
    case Discipline::EdcfBeb: {
      const auto policy = d == Discipline::EdcfBfl ? BurstPolicy::Bfl : BurstPolicy::Beb;
      const double b = expected_burst(s, alpha, phy, policy);
      return {b * frame_airtime(s, phy), b};
    }
    case Discipline::TimeFair:
      return {phy.txop_limit_s, phy.txop_limit_s / frame_airtime(s, phy)};
  }
  throw DomainError("unknown discipline");
}

// ---------------------------------------------------------------------------
// Stagegame
// ---------------------------------------------------------------------------

struct StageGame {
  PhyProfile phy;
  Discipline discipline = Discipline::Dcf;
  std::vector<Strategy> strategies_i;
  std::vector<Strategy> strategies_j;
  AlphaTable alpha_i;
  AlphaTable alpha_j;
  double t_idle_s = 0.0;

  const std::vector<Strategy>& strategies(Player p) const {
    return p == Player::I ? strategies_i : strategies_j;
  }
  const AlphaTable& alpha(Player p) const { return p == Player::I ? alpha_i : alpha_j; }
};

inline void validate(const StageGame& g) {
  validate(g.phy);
  if (g.strategies_i.empty() || g.strategies_j.empty())
    throw DomainError("stagegame: strategy sets must be nonempty");
  if (!(g.t_idle_s >= 0.0)) throw DomainError("stagegame: t_idle must be >= 0");
  for (auto p : {Player::I, Player::J})
    for (const auto& s : g.strategies(p)) {
      validate(s, g.phy);
      g.alpha(p).lookup(s);
    }
}

// Throughputs are bits/s; times seconds.
struct Outcome {
  double r_i = 0.0;
  double r_j = 0.0;
  double t_i = 0.0;
  double t_j = 0.0;
  double f_i = 0.0;
  double f_j = 0.0;
  double b_i = 0.0;
  double b_j = 0.0;
  double total_s = 0.0;  // t_i + t_j + t_idle

  double r(Player p) const { return p == Player::I ? r_i : r_j; }
};

inline bool in_set(const std::vector<Strategy>& set, const Strategy& s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

inline Outcome stage_payoff(const StageGame& g, const Strategy& gi, const Strategy& gj) {
  if (!in_set(g.strategies_i, gi)) throw DomainError("node i has no strategy " + describe(gi));
  if (!in_set(g.strategies_j, gj)) throw DomainError("node j has no strategy " + describe(gj));
  const double ai = g.alpha_i.lookup(gi);
  const double aj = g.alpha_j.lookup(gj);
  const Occupancy oi = occupancy(g.discipline, gi, ai, g.phy);
  const Occupancy oj = occupancy(g.discipline, gj, aj, g.phy);

  Outcome o;
  o.t_i = oi.time_s;
  o.t_j = oj.time_s;
  o.b_i = oi.frames;
  o.b_j = oj.frames;
  o.total_s = o.t_i + o.t_j + g.t_idle_s;
  o.f_i = o.t_i / o.total_s;
  o.f_j = o.t_j / o.total_s;
  o.r_i = practical_throughput(gi, ai, g.phy) * o.f_i;
  o.r_j = practical_throughput(gj, aj, g.phy) * o.f_j;
  return o;
}

struct PayoffMatrix {
  std::vector<Strategy> rows;  // node i
  std::vector<Strategy> cols;  // node j
  std::vector<Outcome> cells;  // row-major

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return cols.size(); }
  const Outcome& at(std::size_t r, std::size_t c) const { return cells.at(r * cols.size() + c); }
};

inline PayoffMatrix payoff_matrix(const StageGame& g) {
  PayoffMatrix m{g.strategies_i, g.strategies_j, {}};
  m.cells.reserve(m.rows.size() * m.cols.size());
  for (const auto& gi : m.rows)
    for (const auto& gj : m.cols) m.cells.push_back(stage_payoff(g, gi, gj));
  return m;
}

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  bool operator==(const Cell&) const = default;
};

// Cells where neither player has a strictly better unilateral deviation.
inline std::vector<Cell> find_pure_nash(const PayoffMatrix& m) {
  std::vector<Cell> out;
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
      bool stable = true;
      for (std::size_t r2 = 0; r2 < m.n_rows() && stable; ++r2)
        if (strictly_better(m.at(r2, c).r_i, m.at(r, c).r_i)) stable = false;
      for (std::size_t c2 = 0; c2 < m.n_cols() && stable; ++c2)
        if (strictly_better(m.at(r, c2).r_j, m.at(r, c).r_j)) stable = false;
      if (stable) out.push_back({r, c});
    }
  return out;
}

// Argmax of practical throughput; ties go to the higher rate, then the larger payload.
inline Strategy most_efficient_strategy(const std::vector<Strategy>& strategies,
                                        const AlphaTable& alpha, const PhyProfile& phy) {
  if (strategies.empty()) throw DomainError("most_efficient_strategy: empty strategy set");
  Strategy best = strategies.front();
  double best_r = practical_throughput(best, alpha.lookup(best), phy);
  for (const auto& s : strategies) {
    const double r = practical_throughput(s, alpha.lookup(s), phy);
    if (strictly_better(r, best_r) || (payoff_equal(r, best_r) && best < s)) {
      best = s;
      best_r = r;
    }
  }
  return best;
}

// True iff s reaches the player's maximum practical throughput.
inline bool is_efficient(const StageGame& g, Player p, const Strategy& s) {
  const auto& alpha = g.alpha(p);
  const Strategy best = most_efficient_strategy(g.strategies(p), alpha, g.phy);
  return payoff_equal(practical_throughput(s, alpha.lookup(s), g.phy),
                      practical_throughput(best, alpha.lookup(best), g.phy));
}

enum class SpeClass { UniqueDesirable, UniqueUndesirable, MultipleNe, None };

inline std::string_view to_string(SpeClass c) {
  switch (c) {
    case SpeClass::UniqueDesirable: return "unique-desirable";
    case SpeClass::UniqueUndesirable: return "unique-undesirable";
    case SpeClass::MultipleNe: return "multiple-NE";
    case SpeClass::None: return "none";
  }
  return "?";
}

struct EquilibriumReport {
  PayoffMatrix matrix;
  std::vector<Cell> nash_set;
  bool unique = false;
  std::vector<bool> desirable_per_ne;
  SpeClass spe_class = SpeClass::None;
  Strategy efficient_i;
  Strategy efficient_j;
  // best_response_i[c]: rows maximizing r_i when j plays column c; best_response_j[r] likewise.
  std::vector<std::vector<std::size_t>> best_response_i;
  std::vector<std::vector<std::size_t>> best_response_j;
};

inline EquilibriumReport classify_equilibria(const StageGame& g) {
  validate(g);
  EquilibriumReport rep;
  rep.matrix = payoff_matrix(g);
  rep.nash_set = find_pure_nash(rep.matrix);
  rep.unique = rep.nash_set.size() == 1;
  rep.efficient_i = most_efficient_strategy(g.strategies_i, g.alpha_i, g.phy);
  rep.efficient_j = most_efficient_strategy(g.strategies_j, g.alpha_j, g.phy);

  const auto& m = rep.matrix;
  for (const auto& cell : rep.nash_set)
    rep.desirable_per_ne.push_back(is_efficient(g, Player::I, m.rows[cell.row]) &&
                                   is_efficient(g, Player::J, m.cols[cell.col]));

  if (rep.nash_set.empty())
    rep.spe_class = SpeClass::None;
  else if (!rep.unique)
    rep.spe_class = SpeClass::MultipleNe;
  else
    rep.spe_class = rep.desirable_per_ne.front() ? SpeClass::UniqueDesirable
                                                 : SpeClass::UniqueUndesirable;

  rep.best_response_i.resize(m.n_cols());
  for (std::size_t c = 0; c < m.n_cols(); ++c) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m.n_rows(); ++r) best = std::max(best, m.at(r, c).r_i);
    for (std::size_t r = 0; r < m.n_rows(); ++r)
      if (!strictly_better(best, m.at(r, c).r_i)) rep.best_response_i[c].push_back(r);
  }
  rep.best_response_j.resize(m.n_rows());
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.n_cols(); ++c) best = std::max(best, m.at(r, c).r_j);
    for (std::size_t c = 0; c < m.n_cols(); ++c)
      if (!strictly_better(best, m.at(r, c).r_j)) rep.best_response_j[r].push_back(c);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Condition checkers
// ---------------------------------------------------------------------------

// Under DCF, with node i choosing between a faster and a slower rate at equal
// payload against a fixed opponent strategy:
//   time share:            f_i(fast, opp) < f_i(slow, opp)
//   rate-weighted share:   gamma(fast) f_i(fast, opp) > gamma(slow) f_i(slow, opp)
struct MonotonicityCheck {
  bool applicable = false;
  bool share_holds = false;
  double share_fast = 0.0;
  double share_slow = 0.0;
  bool weighted_holds = false;
  double weighted_fast = 0.0;  // bits/s
  double weighted_slow = 0.0;

  bool holds() const { return !applicable || (share_holds && weighted_holds); }
};

inline MonotonicityCheck check_claim_monotonicity(const StageGame& g, const Strategy& fast,
                                                  const Strategy& slow, const Strategy& opp) {
  if (g.discipline != Discipline::Dcf)
    throw DomainError("monotonicity check applies to DCF only");
  if (fast.payload_bits != slow.payload_bits)
    throw DomainError("monotonicity check needs equal payloads");
  MonotonicityCheck out;
  if (fast == slow) return out;
  if (!(fast.rate_bps > slow.rate_bps))
    throw DomainError("monotonicity check needs the first strategy to be faster");
  out.applicable = true;

  const double t_opp = occupancy_dcf(opp, g.phy);
  const double t_fast = occupancy_dcf(fast, g.phy);
  const double t_slow = occupancy_dcf(slow, g.phy);
  out.share_fast = t_fast / (t_fast + t_opp + g.t_idle_s);
  out.share_slow = t_slow / (t_slow + t_opp + g.t_idle_s);
  out.share_holds = out.share_fast < out.share_slow;
  out.weighted_fast = ideal_throughput(fast, g.phy) * out.share_fast;
  out.weighted_slow = ideal_throughput(slow, g.phy) * out.share_slow;
  out.weighted_holds = out.weighted_fast > out.weighted_slow;
  return out;
}

// Strict dominance by enumeration: candidate beats every other own strategy
// against every opponent strategy.
inline bool check_dominant_strategy(const StageGame& g, Player p, const Strategy& candidate) {
  const auto& own = g.strategies(p);
  const auto& opp = g.strategies(p == Player::I ? Player::J : Player::I);
  if (!in_set(own, candidate))
    throw DomainError("dominance candidate " + describe(candidate) + " not in the strategy set");
  for (const auto& other : own) {
    if (other == candidate) continue;
    for (const auto& o : opp) {
      const double mine = p == Player::I ? stage_payoff(g, candidate, o).r_i
                                         : stage_payoff(g, o, candidate).r_j;
      const double theirs = p == Player::I ? stage_payoff(g, other, o).r_i
                                           : stage_payoff(g, o, other).r_j;
      if (!strictly_better(mine, theirs)) return false;
    }
  }
  return true;
}

struct RatioSides {
  Strategy alternative;
  double alpha_ratio = 0.0;  // alpha_i(g*) / alpha_i(g)
  double time_ratio = 0.0;   // b(g) s(g) T(g*, gj*) / (b* s* T(g, gj*)); DCF reduces to T*/T
  bool holds = false;
};

struct UniqueNeCheck {
  bool holds = true;
  std::vector<RatioSides> sides;
};

// With gj_star dominant for node j, (gi_star, gj_star) is the unique NE iff
// alpha_i(g*)/alpha_i(g) > b(g) s(g) T(g*, gj*) / (b* s* T(g, gj*)) for every
// alternative g of node i.
inline UniqueNeCheck check_unique_ne_condition(const StageGame& g, const Strategy& gi_star,
                                               const Strategy& gj_star) {
  if (!check_dominant_strategy(g, Player::J, gj_star))
    throw DomainError("unique-NE check needs a dominant strategy for node j");
  if (!in_set(g.strategies_i, gi_star))
    throw DomainError("node i has no strategy " + describe(gi_star));

  const Outcome star = stage_payoff(g, gi_star, gj_star);
  const double a_star = g.alpha_i.lookup(gi_star);
  UniqueNeCheck out;
  for (const auto& alt : g.strategies_i) {
    if (alt == gi_star) continue;
    const Outcome o = stage_payoff(g, alt, gj_star);
    const double a_alt = g.alpha_i.lookup(alt);
    RatioSides side;
    side.alternative = alt;
    // Cross-multiplied form avoids dividing by a zero alpha.
    const double lhs = a_star * star.b_i * gi_star.payload_bits * o.total_s;
    const double rhs = a_alt * o.b_i * alt.payload_bits * star.total_s;
    side.alpha_ratio = a_alt > 0.0 ? a_star / a_alt : std::numeric_limits<double>::infinity();
    side.time_ratio = (o.b_i * alt.payload_bits * star.total_s) /
                      (star.b_i * gi_star.payload_bits * o.total_s);
    side.holds = strictly_better(lhs, rhs);
    out.holds = out.holds && side.holds;
    out.sides.push_back(side);
  }
  return out;
}

struct UndesirabilityWitness {
  Player player = Player::I;
  Strategy ne_strategy;
  Strategy forgone;
  double r_prac_ne = 0.0;       // bits/s
  double r_prac_forgone = 0.0;  // bits/s
};

// For a unique NE in which some player forgoes a strategy with higher
// practical throughput, names that player (i checked first).
inline std::optional<UndesirabilityWitness> undesirability_witness(const StageGame& g) {
  const auto rep = classify_equilibria(g);
  if (!rep.unique) return std::nullopt;
  const Cell ne = rep.nash_set.front();
  for (auto p : {Player::I, Player::J}) {
    const Strategy played = p == Player::I ? rep.matrix.rows[ne.row] : rep.matrix.cols[ne.col];
    const Strategy best = p == Player::I ? rep.efficient_i : rep.efficient_j;
    const auto& alpha = g.alpha(p);
    const double r_played = practical_throughput(played, alpha.lookup(played), g.phy);
    const double r_best = practical_throughput(best, alpha.lookup(best), g.phy);
    if (strictly_better(r_best, r_played)) return UndesirabilityWitness{p, played, best, r_played, r_best};
  }
  return std::nullopt;
}

}  // namespace macgame
