#pragma once

#include <algorithm>
#include <vector>

#include "macgame/game.hpp"
#include "macgame/rng.hpp"

namespace macgame::fixtures {

// Two-rate, overheadless fixture: gamma(g1) = 3.2 Mbps, gamma(g2) = 1.6 Mbps.
inline PhyProfile two_rate_phy() {
  PhyProfile phy;
  phy.rates_bps = {1.6e6, 3.2e6};
  phy.txop_limit_s = 0.015;
  return phy;
}

inline const Strategy kG1{3.2e6, 12000.0};
inline const Strategy kG2{1.6e6, 12000.0};

inline StageGame example_game(Discipline d) {
  return StageGame{two_rate_phy(), d, {kG1, kG2}, {kG1, kG2},
                   AlphaTable{{kG1, 0.6}, {kG2, 0.95}}, AlphaTable{{kG1, 1.0}, {kG2, 1.0}}, 0.0};
}

// Random two-player game over the 802.11b rates.
//
// Overheads are zero and the TXOP limit is exactly two frames at 1 Mbps, so
// every rate fills the TXOP with a whole number of frames (2, 4, 11, 22).
// alpha tables are non-increasing in rate.
inline StageGame random_game(Rng& rng, Discipline d) {
  static const double kRates[] = {1e6, 2e6, 5.5e6, 11e6};
  const double payload = static_cast<double>(rng.uniform_int(2000, 12000));
  PhyProfile phy;
  phy.rates_bps.assign(std::begin(kRates), std::end(kRates));
  phy.txop_limit_s = 2.0 * payload / 1e6;
  phy.max_payload_bits = 12000.0;

  auto strategies = [&] {
    std::vector<Strategy> out;
    while (out.size() < 2) {
      out.clear();
      for (double r : kRates)
        if (rng.bernoulli(0.6)) out.push_back({r, payload});
    }
    return out;
  };
  auto alphas = [&](const std::vector<Strategy>& set) {
    std::vector<double> a;
    for (std::size_t k = 0; k < set.size(); ++k) a.push_back(rng.uniform(0.05, 1.0));
    std::sort(a.begin(), a.end(), std::greater<>());  // set is in ascending rate order
    std::vector<AlphaTable::Entry> entries;
    for (std::size_t k = 0; k < set.size(); ++k) entries.emplace_back(set[k], a[k]);
    return AlphaTable(entries);
  };

  StageGame g;
  g.phy = phy;
  g.discipline = d;
  g.strategies_i = strategies();
  g.strategies_j = strategies();
  g.alpha_i = alphas(g.strategies_i);
  g.alpha_j = alphas(g.strategies_j);
  g.t_idle_s = rng.uniform(0.0, 0.005);
  return g;
}

// Random DCF game with positive overheads and mixed payloads.
inline StageGame random_dcf_game(Rng& rng) {
  static const double kRates[] = {1e6, 2e6, 5.5e6, 11e6};
  static const double kPayloads[] = {4000.0, 8000.0, 12000.0};
  PhyProfile phy;
  phy.rates_bps.assign(std::begin(kRates), std::end(kRates));
  phy.bit_overhead_bits = rng.uniform(0.0, 600.0);
  phy.time_overhead_s = rng.uniform(50e-6, 800e-6);

  auto strategies = [&] {
    std::vector<Strategy> out;
    while (out.size() < 2) {
      out.clear();
      for (double s : kPayloads)
        for (double r : kRates)
          if (rng.bernoulli(0.35)) out.push_back({r, s});
    }
    return out;
  };
  // Per payload, alpha falls with rate; larger frames lose a little more.
  auto alphas = [&](const std::vector<Strategy>& set) {
    std::vector<double> by_rate;
    for (std::size_t k = 0; k < 4; ++k) by_rate.push_back(rng.uniform(0.05, 1.0));
    std::sort(by_rate.begin(), by_rate.end(), std::greater<>());
    std::vector<AlphaTable::Entry> entries;
    for (const auto& s : set) {
      const auto idx = static_cast<std::size_t>(std::find(std::begin(kRates), std::end(kRates), s.rate_bps) - std::begin(kRates));
      entries.emplace_back(s, by_rate[idx] * (1.0 - s.payload_bits / 12000.0 * 0.05));
    }
    return AlphaTable(entries);
  };

  StageGame g;
  g.phy = phy;
  g.discipline = Discipline::Dcf;
  g.strategies_i = strategies();
  g.strategies_j = strategies();
  g.alpha_i = alphas(g.strategies_i);
  g.alpha_j = alphas(g.strategies_j);
  g.t_idle_s = rng.uniform(0.0, 0.005);
  return g;
}

// Reference NE enumeration straight from the definition, for cross-checks.
inline std::vector<Cell> brute_force_nash(const StageGame& g) {
  std::vector<Cell> out;
  for (std::size_t r = 0; r < g.strategies_i.size(); ++r)
    for (std::size_t c = 0; c < g.strategies_j.size(); ++c) {
      const auto here = stage_payoff(g, g.strategies_i[r], g.strategies_j[c]);
      bool stable = true;
      for (const auto& alt : g.strategies_i)
        if (strictly_better(stage_payoff(g, alt, g.strategies_j[c]).r_i, here.r_i)) stable = false;
      for (const auto& alt : g.strategies_j)
        if (strictly_better(stage_payoff(g, g.strategies_i[r], alt).r_j, here.r_j)) stable = false;
      if (stable) out.push_back({r, c});
    }
  return out;
}

}  // namespace macgame::fixtures
