#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macgame/error.hpp"

namespace macgame {

inline constexpr double kBitsPerMegabit = 1e6;

inline constexpr double to_mbps(double bps) { return bps / kBitsPerMegabit; }
inline constexpr double from_mbps(double mbps) { return mbps * kBitsPerMegabit; }

// Physical/MAC constants shared by the analytic model and the simulator.
// Rates are bits/s, overheads bits and seconds.
struct PhyProfile {
  std::vector<double> rates_bps;
  double bit_overhead_bits = 0.0;
  double time_overhead_s = 0.0;
  double slot_time_s = 20e-6;
  int cw_min = 31;
  int cw_max = 1023;
  double txop_limit_s = 0.015;
  double max_payload_bits = 12000.0;

  bool operator==(const PhyProfile&) const = default;
};

// One player's action: a data rate and a frame payload size.
struct Strategy {
  double rate_bps = 0.0;
  double payload_bits = 0.0;

  auto operator<=>(const Strategy&) const = default;
};

inline std::string describe(const Strategy& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%gMbps/%gb", to_mbps(s.rate_bps), s.payload_bits);
  return buf;
}

inline void validate(const PhyProfile& phy) {
  if (phy.rates_bps.empty()) throw DomainError("phy: rate table is empty");
  for (std::size_t k = 0; k < phy.rates_bps.size(); ++k) {
    if (!(phy.rates_bps[k] > 0.0)) throw DomainError("phy: rates must be positive");
    if (k > 0 && !(phy.rates_bps[k] > phy.rates_bps[k - 1]))
      throw DomainError("phy: rates must be strictly increasing");
  }
  if (!(phy.bit_overhead_bits >= 0.0)) throw DomainError("phy: bit_overhead must be >= 0");
  // to = 0 is the overheadless limit, where ideal throughput equals the rate.
  if (!(phy.time_overhead_s >= 0.0)) throw DomainError("phy: time_overhead must be >= 0");
  if (!(phy.slot_time_s > 0.0)) throw DomainError("phy: slot_time must be > 0");
  if (phy.cw_min <= 0 || phy.cw_min > phy.cw_max)
    throw DomainError("phy: need 0 < cw_min <= cw_max");
  if (!(phy.txop_limit_s > 0.0)) throw DomainError("phy: txop_limit must be > 0");
  if (!(phy.max_payload_bits > 0.0)) throw DomainError("phy: max_payload must be > 0");
}

inline bool has_rate(const PhyProfile& phy, double rate_bps) {
  return std::any_of(phy.rates_bps.begin(), phy.rates_bps.end(), [&](double r) {
    return std::abs(r - rate_bps) <= 1e-12 * std::max(r, rate_bps);
  });
}

inline void validate(const Strategy& s, const PhyProfile& phy) {
  if (!has_rate(phy, s.rate_bps))
    throw DomainError("strategy " + describe(s) + ": rate not in phy rate table");
  if (!(s.payload_bits > 0.0))
    throw DomainError("strategy " + describe(s) + ": payload must be > 0");
  if (s.payload_bits > phy.max_payload_bits)
    throw DomainError("strategy " + describe(s) + ": payload exceeds max_payload");
}

// Channel occupancy of one frame: to + (s + bo) / d.
inline double frame_airtime(const Strategy& s, const PhyProfile& phy) {
  validate(s, phy);
  return phy.time_overhead_s + (s.payload_bits + phy.bit_overhead_bits) / s.rate_bps;
}

// Lossless, sole-occupancy throughput in bits/s: s / (to + (s + bo) / d).
inline double ideal_throughput(const Strategy& s, const PhyProfile& phy) {
  return s.payload_bits / frame_airtime(s, phy);
}

// Ideal throughput scaled by the frame success fraction.
inline double practical_throughput(const Strategy& s, double alpha, const PhyProfile& phy) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in [0, 1]");
  return ideal_throughput(s, phy) * alpha;
}

// Frames that fit in one TXOP. Never less than one.
inline int max_burst_frames(const Strategy& s, const PhyProfile& phy) {
  if (!(phy.txop_limit_s > 0.0)) throw DomainError("txop_limit must be > 0");
  // The relative nudge keeps exact multiples (0.015 / 0.00375) from flooring to n - 1.
  const double ratio = phy.txop_limit_s / frame_airtime(s, phy);
  const double n = std::floor(ratio * (1.0 + 1e-9));
  return std::max(1, static_cast<int>(std::min(n, 1e9)));
}

// 802.11b-like defaults: 1/2/5.5/11 Mbps, 20 us slots, cw 31..1023.
// Overheads: 28 B MAC + 28 B IP/UDP header; DIFS + long PLCP preamble + SIFS + 1 Mbps ACK.
inline PhyProfile preset_80211b() {
  PhyProfile phy;
  phy.rates_bps = {1e6, 2e6, 5.5e6, 11e6};
  phy.bit_overhead_bits = 448.0;
  phy.time_overhead_s = 50e-6 + 192e-6 + 10e-6 + 304e-6;
  phy.slot_time_s = 20e-6;
  phy.cw_min = 31;
  phy.cw_max = 1023;
  phy.txop_limit_s = 0.015;
  phy.max_payload_bits = 12000.0;
  return phy;
}

inline std::optional<PhyProfile> preset(std::string_view name) {
  if (name == "80211b") return preset_80211b();
  return std::nullopt;
}

}  // namespace macgame
