#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "macgame/error.hpp"
#include "macgame/phy.hpp"
#include "macgame/rng.hpp"

namespace macgame {

// Per-node frame success fractions, one entry per strategy. Construction
// rejects tables where a higher rate beats a lower one at equal payload.
class AlphaTable {
 public:
  using Entry = std::pair<Strategy, double>;

  AlphaTable() = default;

  explicit AlphaTable(std::span<const Entry> entries) {
    for (const auto& [s, a] : entries) {
      if (!(a >= 0.0 && a <= 1.0))
        throw DomainError("alpha for " + describe(s) + " must lie in [0, 1]");
      if (!entries_.emplace(s, a).second)
        throw DomainError("duplicate alpha entry for " + describe(s));
    }
    check_rate_monotonicity();
  }

  AlphaTable(std::initializer_list<Entry> entries)
      : AlphaTable(std::span<const Entry>(entries.begin(), entries.size())) {}

  bool contains(const Strategy& s) const { return entries_.count(s) != 0; }

  double lookup(const Strategy& s) const {
    auto it = entries_.find(s);
    if (it == entries_.end()) throw DomainError("no alpha entry for " + describe(s));
    return it->second;
  }

  const std::map<Strategy, double>& entries() const { return entries_; }

  bool operator==(const AlphaTable&) const = default;

 private:
  // Entries are ordered by (rate, payload); scan each payload's rates in order.
  void check_rate_monotonicity() const {
    std::map<double, std::pair<double, double>> last;  // payload -> (rate, alpha)
    for (const auto& [s, a] : entries_) {
      auto it = last.find(s.payload_bits);
      if (it != last.end() && a > it->second.second)
        throw MonotonicityError("alpha at " + describe(s) + " (" + std::to_string(a) +
                                ") exceeds alpha at the lower rate " +
                                std::to_string(to_mbps(it->second.first)) + " Mbps (" +
                                std::to_string(it->second.second) + ")");
      last[s.payload_bits] = {s.rate_bps, a};
    }
  }

  std::map<Strategy, double> entries_;
};

inline double alpha_lookup(const AlphaTable& table, const Strategy& s) { return table.lookup(s); }

struct RateThreshold {
  double rate_bps = 0.0;
  double threshold_dbm = 0.0;

  bool operator==(const RateThreshold&) const = default;
};

// Rayleigh block-fading link. Received power is exponential around the mean;
// one draw is shared by coherence_samples consecutive frames.
struct FadingChannel {
  double mean_rx_power_dbm = -70.0;
  std::vector<RateThreshold> rx_thresholds;  // ascending rate
  int coherence_samples = 1;
  std::uint64_t rng_seed = 0;

  bool operator==(const FadingChannel&) const = default;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Log-distance path loss: tx - ref_loss - 10 n log10(d / d0).
inline double log_distance_rx_power_dbm(double tx_power_dbm, double distance_m,
                                        double exponent, double ref_loss_db,
                                        double ref_distance_m = 1.0) {
  if (!(distance_m > 0.0) || !(ref_distance_m > 0.0))
    throw DomainError("path loss: distances must be > 0");
  return tx_power_dbm - ref_loss_db - 10.0 * exponent * std::log10(distance_m / ref_distance_m);
}

// Receive sensitivities loosely following common 802.11b card sheets.
inline std::vector<RateThreshold> default_rx_thresholds() {
  return {{1e6, -94.0}, {2e6, -91.0}, {5.5e6, -87.0}, {11e6, -82.0}};
}

inline void validate(const FadingChannel& ch) {
  if (ch.coherence_samples < 1) throw DomainError("fading: coherence_samples must be >= 1");
  for (std::size_t k = 1; k < ch.rx_thresholds.size(); ++k) {
    if (!(ch.rx_thresholds[k].rate_bps > ch.rx_thresholds[k - 1].rate_bps))
      throw DomainError("fading: threshold rates must be strictly increasing");
    if (!(ch.rx_thresholds[k].threshold_dbm > ch.rx_thresholds[k - 1].threshold_dbm))
      throw DomainError("fading: thresholds must increase with rate");
  }
}

inline double rx_threshold_dbm(const FadingChannel& ch, double rate_bps) {
  for (const auto& t : ch.rx_thresholds)
    if (std::abs(t.rate_bps - rate_bps) <= 1e-12 * rate_bps) return t.threshold_dbm;
  throw DomainError("fading: no rx threshold for " + std::to_string(to_mbps(rate_bps)) + " Mbps");
}

// P[power >= threshold] = exp(-threshold / mean) in linear units.
inline double alpha_rayleigh(const FadingChannel& ch, const Strategy& s) {
  const double threshold = rx_threshold_dbm(ch, s.rate_bps);
  if (std::isinf(threshold) && threshold < 0) return 1.0;
  return std::exp(-dbm_to_mw(threshold) / dbm_to_mw(ch.mean_rx_power_dbm));
}

inline AlphaTable induced_alpha_table(const FadingChannel& ch, std::span<const Strategy> strategies) {
  std::vector<AlphaTable::Entry> entries;
  for (const auto& s : strategies)
    if (std::none_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == s; }))
      entries.emplace_back(s, alpha_rayleigh(ch, s));
  return AlphaTable(entries);
}

// Highest rate whose threshold the sampled power clears; the lowest rate otherwise.
inline double rbar_select_rate(const FadingChannel& ch, const PhyProfile& phy,
                               double sampled_power_dbm) {
  if (phy.rates_bps.empty()) throw DomainError("rbar: phy has no rates");
  double chosen = phy.rates_bps.front();
  for (double r : phy.rates_bps) {
    double threshold;
    try {
      threshold = rx_threshold_dbm(ch, r);
    } catch (const DomainError&) {
      continue;
    }
    if (threshold <= sampled_power_dbm) chosen = r;
  }
  return chosen;
}

// Block-fading sampler state for one node.
struct FadingState {
  Rng rng;
  int remaining_in_block = 0;
  double power_mw = 0.0;

  explicit FadingState(std::uint64_t seed) : rng(seed) {}
};

inline double next_power_mw(const FadingChannel& ch, FadingState& st) {
  if (st.remaining_in_block <= 0) {
    st.power_mw = dbm_to_mw(ch.mean_rx_power_dbm) * st.rng.exponential();
    st.remaining_in_block = ch.coherence_samples;
  }
  --st.remaining_in_block;
  return st.power_mw;
}

inline bool sample_frame_outcome(const FadingChannel& ch, const Strategy& s, FadingState& st) {
  const double threshold = rx_threshold_dbm(ch, s.rate_bps);
  const double p = next_power_mw(ch, st);
  if (std::isinf(threshold) && threshold < 0) return true;
  return p >= dbm_to_mw(threshold);
}

// Table-driven channel for the simulator. Each coherence block shares one
// uniform latent u; a frame succeeds iff u < alpha(strategy).
struct BernoulliChannel {
  AlphaTable table;
  int coherence_samples = 1;

  bool operator==(const BernoulliChannel&) const = default;
};

using NodeChannel = std::variant<BernoulliChannel, FadingChannel>;

inline int coherence_of(const NodeChannel& ch) {
  return std::visit([](const auto& c) { return c.coherence_samples; }, ch);
}

inline double channel_alpha(const NodeChannel& ch, const Strategy& s) {
  if (const auto* b = std::get_if<BernoulliChannel>(&ch)) return b->table.lookup(s);
  return alpha_rayleigh(std::get<FadingChannel>(ch), s);
}

// Owns the sampling state of one node's channel.
class FrameSampler {
 public:
  FrameSampler(NodeChannel channel, std::uint64_t seed)
      : channel_(std::move(channel)), state_(seed) {}

  bool sample(const Strategy& s) {
    if (const auto* f = std::get_if<FadingChannel>(&channel_))
      return sample_frame_outcome(*f, s, state_);
    const auto& b = std::get<BernoulliChannel>(channel_);
    const double alpha = b.table.lookup(s);
    if (state_.remaining_in_block <= 0) {
      state_.power_mw = state_.rng.uniform();
      state_.remaining_in_block = b.coherence_samples;
    }
    --state_.remaining_in_block;
    return state_.power_mw < alpha;
  }

  // Power seen by an RTS probe; consumes one sample of the coherence sequence.
  double probe_power_dbm() {
    const auto* f = std::get_if<FadingChannel>(&channel_);
    if (!f) throw DomainError("power probe needs a fading channel");
    return mw_to_dbm(next_power_mw(*f, state_));
  }

  const NodeChannel& channel() const { return channel_; }

 private:
  NodeChannel channel_;
  FadingState state_;
};

}  // namespace macgame
