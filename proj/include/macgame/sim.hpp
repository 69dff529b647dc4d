#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "macgame/channel.hpp"
#include "macgame/error.hpp"
#include "macgame/game.hpp"
#include "macgame/phy.hpp"
#include "macgame/rng.hpp"

namespace macgame {

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct FixedPolicy {
  Strategy strategy;
  bool operator==(const FixedPolicy&) const = default;
};

// RBAR-style: the rate follows the power of an RTS probe before every TXOP.
struct AutoRatePolicy {
  double payload_bits = 12000.0;
  bool operator==(const AutoRatePolicy&) const = default;
};

// Starts at `initial` and periodically switches to the candidate (from the
// node's strategy set) with the highest measured throughput.
struct BestResponsePolicy {
  Strategy initial;
  bool operator==(const BestResponsePolicy&) const = default;
};

using StrategyPolicy = std::variant<FixedPolicy, AutoRatePolicy, BestResponsePolicy>;

struct SimNode {
  std::string name;
  NodeChannel channel;
  StrategyPolicy policy;
  std::vector<Strategy> strategies;
  double target_share = 0.0;  // DCF* target; 0 means an equal split of what is left

  bool operator==(const SimNode&) const = default;
};

// Multiplicative contention-window controller behind the time-fair discipline.
struct DcfStarConfig {
  double gain = 1.0;
  double adaptation_period_s = 0.1;
  double cw_lo = 3.0;
  double cw_hi = 1023.0;

  bool operator==(const DcfStarConfig&) const = default;
};

struct BestResponseConfig {
  double probe_window_s = 60.0;        // channel time each candidate is played for
  double measurement_window_s = 50.0;  // trailing part of the probe that is measured
  int max_epochs = 20;

  bool operator==(const BestResponseConfig&) const = default;
};

// TIME_FAIR runs DCF access with the DCF* controller adapting cw_min.
struct SimScenario {
  PhyProfile phy;
  Discipline discipline = Discipline::Dcf;
  std::vector<SimNode> nodes;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  double report_interval_s = 1.0;
  DcfStarConfig dcf_star;
  BestResponseConfig best_response;

  bool operator==(const SimScenario&) const = default;
};

inline bool uses_best_response(const SimNode& n) {
  return std::holds_alternative<BestResponsePolicy>(n.policy);
}

inline void validate(const SimScenario& sc) {
  validate(sc.phy);
  if (!(sc.duration_s > 0.0)) throw DomainError("sim: duration must be > 0");
  if (!(sc.report_interval_s > 0.0)) throw DomainError("sim: report_interval must be > 0");
  if (sc.nodes.empty()) throw DomainError("sim: no nodes");
  double share_sum = 0.0;
  for (const auto& n : sc.nodes) {
    if (!(n.target_share >= 0.0 && n.target_share <= 1.0))
      throw DomainError("sim: node " + n.name + " target_share must lie in [0, 1]");
    share_sum += n.target_share;
    if (const auto* f = std::get_if<FadingChannel>(&n.channel)) validate(*f);
    if (coherence_of(n.channel) < 1)
      throw DomainError("sim: node " + n.name + " coherence_samples must be >= 1");

    std::vector<Strategy> used = n.strategies;
    if (const auto* p = std::get_if<FixedPolicy>(&n.policy)) used.push_back(p->strategy);
    if (const auto* p = std::get_if<BestResponsePolicy>(&n.policy)) {
      if (!in_set(n.strategies, p->initial))
        throw DomainError("sim: node " + n.name + " initial strategy not in its strategy set");
      used.push_back(p->initial);
    }
    if (const auto* p = std::get_if<AutoRatePolicy>(&n.policy)) {
      if (!std::holds_alternative<FadingChannel>(n.channel))
        throw DomainError("sim: node " + n.name + " auto-rate needs a fading channel");
      for (double r : sc.phy.rates_bps) used.push_back({r, p->payload_bits});
    }
    for (const auto& s : used) {
      validate(s, sc.phy);
      channel_alpha(n.channel, s);
    }
  }
  if (share_sum > 1.0 + 1e-9) throw DomainError("sim: target shares sum above 1");
  if (sc.discipline == Discipline::TimeFair) {
    const auto& d = sc.dcf_star;
    if (!(d.adaptation_period_s > 0.0) || !(d.gain >= 0.0) || !(d.cw_lo >= 1.0) ||
        !(d.cw_lo <= d.cw_hi))
      throw DomainError("sim: invalid dcf_star config");
  }
  if (std::any_of(sc.nodes.begin(), sc.nodes.end(), uses_best_response)) {
    const auto& b = sc.best_response;
    if (!(b.probe_window_s > 0.0) || !(b.measurement_window_s > 0.0) ||
        b.measurement_window_s > b.probe_window_s || b.max_epochs < 1)
      throw DomainError("sim: invalid best_response config");
  }
}

// Per-node DCF* targets, normalized so they sum to one. Unset targets share
// whatever the set ones leave.
inline std::vector<double> normalized_targets(const SimScenario& sc) {
  double set = 0.0;
  std::size_t unset = 0;
  for (const auto& n : sc.nodes) {
    set += n.target_share;
    if (n.target_share <= 0.0) ++unset;
  }
  const double fill = unset ? std::max(0.0, 1.0 - set) / static_cast<double>(unset) : 0.0;
  std::vector<double> t;
  for (const auto& n : sc.nodes) t.push_back(n.target_share > 0.0 ? n.target_share : fill);
  double sum = 0.0;
  for (double v : t) sum += v;
  if (!(sum > 0.0)) return std::vector<double>(t.size(), 1.0 / static_cast<double>(t.size()));
  for (double& v : t) v /= sum;
  return t;
}

// ---------------------------------------------------------------------------
// Protocol pieces
// ---------------------------------------------------------------------------

// Outcomes of the frames sent in one TXOP. BFL stops at the first failure;
// BEB always sends max_frames. DCF is BEB with max_frames = 1.
inline std::vector<bool> execute_txop(BurstPolicy policy, int max_frames,
                                      const std::function<bool()>& sample_outcome) {
  std::vector<bool> out;
  out.reserve(static_cast<std::size_t>(std::max(1, max_frames)));
  for (int k = 0; k < std::max(1, max_frames); ++k) {
    const bool ok = sample_outcome();
    out.push_back(ok);
    if (!ok && policy == BurstPolicy::Bfl) break;
  }
  return out;
}

// cw_min <- clamp(cw_min * exp(gain * (observed / target - 1)), cw_lo, cw_hi).
inline double dcf_star_update(double cw_min_effective, double observed_share,
                              double target_share, const DcfStarConfig& cfg) {
  if (!(observed_share >= 0.0 && observed_share <= 1.0) ||
      !(target_share > 0.0 && target_share <= 1.0))
    throw DomainError("dcf_star_update: shares must lie in [0, 1] with target > 0");
  const double next = cw_min_effective * std::exp(cfg.gain * (observed_share / target_share - 1.0));
  return std::clamp(next, cfg.cw_lo, cfg.cw_hi);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct IntervalRow {
  double time_s = 0.0;  // interval end
  std::size_t node = 0;
  double throughput_mbps = 0.0;
  double share = 0.0;
  double loss_rate = 0.0;
  double cw_min_eff = 0.0;
  std::string strategy;
};

struct NodeSummary {
  std::string name;
  double throughput_bps = 0.0;
  double share = 0.0;       // of elapsed time
  double busy_share = 0.0;  // of time occupied by successful or failed frames of any node
  double loss_rate = 0.0;
  double channel_time_s = 0.0;
  std::int64_t txops = 0;
  std::int64_t frames_attempted = 0;
  std::int64_t frames_succeeded = 0;
  std::int64_t txop_frames = 0;  // frames of completed TXOPs
  std::int64_t collisions = 0;
  double mean_frames_per_txop = 0.0;
  double cw_min_eff = 0.0;
  std::string strategy;
  std::optional<Strategy> final_strategy;  // empty for auto-rate
};

struct BestResponseStep {
  int epoch = 0;
  std::size_t node = 0;
  std::vector<std::pair<Strategy, double>> measured_bps;
  Strategy chosen;
  bool switched = false;
};

struct SimReport {
  double duration_s = 0.0;
  std::vector<NodeSummary> nodes;
  double aggregate_throughput_bps = 0.0;
  double idle_time_s = 0.0;
  double collision_time_s = 0.0;
  std::int64_t collision_events = 0;
  std::int64_t duration_ns = 0;
  std::int64_t idle_ns = 0;
  std::int64_t collision_ns = 0;
  std::vector<std::int64_t> channel_ns;  // per node
  std::vector<IntervalRow> series;
  std::vector<BestResponseStep> best_response_log;
  bool best_response_converged = false;
  int best_response_epochs = 0;
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

inline std::int64_t to_ns(double seconds) { return std::llround(seconds * 1e9); }
inline double to_seconds(std::int64_t ns) { return static_cast<double>(ns) * 1e-9; }

struct NodeCounters {
  std::int64_t channel_ns = 0;
  double delivered_bits = 0.0;
  std::int64_t attempted = 0;
  std::int64_t succeeded = 0;
  std::int64_t txops = 0;
  std::int64_t txop_frames = 0;
  std::int64_t collisions = 0;
};

// Cumulative accounting, exact at the engine's current time.
struct Counters {
  std::int64_t now_ns = 0;
  std::int64_t idle_ns = 0;
  std::int64_t collision_ns = 0;
  std::int64_t collision_events = 0;
  std::vector<NodeCounters> nodes;
};

// Runtime state of one contender.
struct NodeState {
  Strategy current;
  int cw_current = 0;
  std::int64_t backoff_counter = 0;
  double cw_min_effective = 0.0;
  Rng backoff_rng;
  FrameSampler sampler;

  NodeState(Strategy s, int cw, Rng rng, FrameSampler fs)
      : current(s), cw_current(cw), cw_min_effective(cw), backoff_rng(rng), sampler(std::move(fs)) {}

  int cw_min_window() const { return static_cast<int>(std::lround(cw_min_effective)); }
};

// Slotted CSMA/CA: idle nodes count down backoff slots together; the node
// reaching zero takes a TXOP; simultaneous zeros collide. Activities can be
// paused mid-way so measurements start and stop at exact instants.
class Engine {
 public:
  explicit Engine(const SimScenario& sc) : sc_(sc), targets_(normalized_targets(sc)) {
    validate(sc_);
    slot_ns_ = to_ns(sc_.phy.slot_time_s);
    counters_.nodes.resize(sc_.nodes.size());
    for (std::size_t i = 0; i < sc_.nodes.size(); ++i) {
      const auto& n = sc_.nodes[i];
      Strategy initial{};
      if (const auto* p = std::get_if<FixedPolicy>(&n.policy)) initial = p->strategy;
      if (const auto* p = std::get_if<BestResponsePolicy>(&n.policy)) initial = p->initial;
      if (const auto* p = std::get_if<AutoRatePolicy>(&n.policy))
        initial = {sc_.phy.rates_bps.back(), p->payload_bits};
      std::uint64_t channel_seed = derive_seed(sc_.seed, "channel", i);
      if (const auto* f = std::get_if<FadingChannel>(&n.channel)) channel_seed ^= mix64(f->rng_seed);
      nodes_.emplace_back(initial, sc_.phy.cw_min, Rng(derive_seed(sc_.seed, "backoff", i)),
                          FrameSampler(n.channel, channel_seed));
      auto& st = nodes_.back();
      st.backoff_counter = st.backoff_rng.uniform_int(0, st.cw_current);
    }
  }

  std::int64_t now_ns() const { return counters_.now_ns; }
  const Counters& counters() const { return counters_; }
  const NodeState& node(std::size_t i) const { return nodes_.at(i); }
  std::size_t size() const { return nodes_.size(); }

  // Takes effect at the node's next TXOP.
  void set_strategy(std::size_t i, const Strategy& s) { nodes_.at(i).current = s; }

  bool auto_rate(std::size_t i) const {
    return std::holds_alternative<AutoRatePolicy>(sc_.nodes[i].policy);
  }

  void run_until(std::int64_t stop_ns) {
    while (counters_.now_ns < stop_ns) {
      if (phase_ == Phase::Contend) begin_contention();
      const std::int64_t seg_end = std::min(activity_end_, stop_ns);
      account(seg_end - counters_.now_ns);
      counters_.now_ns = seg_end;
      if (seg_end == activity_end_) complete_activity();
    }
    // Zero-length activities due exactly at the stop instant are left pending.
  }

  // DCF* step: compare each node's share of busy channel time since the last
  // call with its target and move cw_min accordingly.
  void adapt_contention_windows(const Counters& since) {
    std::int64_t busy = 0;
    std::vector<std::int64_t> used(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      used[i] = counters_.nodes[i].channel_ns - since.nodes[i].channel_ns;
      busy += used[i];
    }
    if (busy <= 0) return;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto& st = nodes_[i];
      const double observed = static_cast<double>(used[i]) / static_cast<double>(busy);
      const DcfStarConfig cfg{sc_.dcf_star.gain, sc_.dcf_star.adaptation_period_s,
                              sc_.dcf_star.cw_lo,
                              std::min<double>(sc_.dcf_star.cw_hi, sc_.phy.cw_max)};
      st.cw_min_effective = dcf_star_update(st.cw_min_effective, observed, targets_[i], cfg);
      st.cw_current = std::clamp(st.cw_current, st.cw_min_window(), sc_.phy.cw_max);
    }
  }

 private:
  enum class Phase { Contend, Idle, Frame, Collision };

  void account(std::int64_t dt) {
    if (dt <= 0) return;
    switch (phase_) {
      case Phase::Idle: counters_.idle_ns += dt; break;
      case Phase::Frame: counters_.nodes[txop_node_].channel_ns += dt; break;
      case Phase::Collision: counters_.collision_ns += dt; break;
      case Phase::Contend: break;
    }
  }

  void begin_contention() {
    std::int64_t k = std::numeric_limits<std::int64_t>::max();
    for (const auto& n : nodes_) k = std::min(k, n.backoff_counter);
    idle_slots_ = k;
    phase_ = Phase::Idle;
    activity_end_ = counters_.now_ns + k * slot_ns_;
  }

  std::int64_t airtime_ns(const Strategy& s) const { return to_ns(frame_airtime(s, sc_.phy)); }

  void choose_rate(std::size_t i) {
    auto& st = nodes_[i];
    if (!auto_rate(i)) return;
    const auto& fading = std::get<FadingChannel>(sc_.nodes[i].channel);
    st.current.rate_bps = rbar_select_rate(fading, sc_.phy, st.sampler.probe_power_dbm());
  }

  int frames_per_txop(const Strategy& s) const {
    switch (sc_.discipline) {
      case Discipline::EdcfBfl:
      case Discipline::EdcfBeb: return max_burst_frames(s, sc_.phy);
      default: return 1;
    }
  }

  void redraw(NodeState& st) { st.backoff_counter = st.backoff_rng.uniform_int(0, st.cw_current); }

  void backoff_after(NodeState& st, bool failed) {
    st.cw_current = failed ? std::min(2 * st.cw_current + 1, sc_.phy.cw_max) : st.cw_min_window();
    st.cw_current = std::clamp(st.cw_current, st.cw_min_window(), sc_.phy.cw_max);
    redraw(st);
  }

  void complete_activity() {
    switch (phase_) {
      case Phase::Idle: {
        colliders_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
          nodes_[i].backoff_counter -= idle_slots_;
          if (nodes_[i].backoff_counter == 0) colliders_.push_back(i);
        }
        if (colliders_.size() == 1) {
          start_txop(colliders_.front());
        } else {
          std::int64_t longest = 0;
          for (auto i : colliders_) longest = std::max(longest, airtime_ns(nodes_[i].current));
          phase_ = Phase::Collision;
          activity_end_ = counters_.now_ns + longest;
        }
        break;
      }
      case Phase::Frame: {
        auto& c = counters_.nodes[txop_node_];
        const bool ok = outcomes_[frame_index_];
        ++c.attempted;
        if (ok) {
          ++c.succeeded;
          c.delivered_bits += txop_strategy_.payload_bits;
        }
        ++frame_index_;
        if (frame_index_ < outcomes_.size()) {
          activity_end_ = counters_.now_ns + airtime_ns(txop_strategy_);
        } else {
          ++c.txops;
          c.txop_frames += static_cast<std::int64_t>(outcomes_.size());
          backoff_after(nodes_[txop_node_], !ok);
          phase_ = Phase::Contend;
        }
        break;
      }
      case Phase::Collision: {
        ++counters_.collision_events;
        for (auto i : colliders_) {
          auto& c = counters_.nodes[i];
          ++c.attempted;
          ++c.collisions;
          backoff_after(nodes_[i], true);
        }
        phase_ = Phase::Contend;
        break;
      }
      case Phase::Contend: break;
    }
  }

  void start_txop(std::size_t i) {
    choose_rate(i);
    auto& st = nodes_[i];
    txop_node_ = i;
    txop_strategy_ = st.current;
    const auto policy = sc_.discipline == Discipline::EdcfBfl ? BurstPolicy::Bfl : BurstPolicy::Beb;
    outcomes_ = execute_txop(policy, frames_per_txop(txop_strategy_),
                             [&] { return st.sampler.sample(txop_strategy_); });
    frame_index_ = 0;
    phase_ = Phase::Frame;
    activity_end_ = counters_.now_ns + airtime_ns(txop_strategy_);
  }

  SimScenario sc_;
  std::vector<double> targets_;
  std::int64_t slot_ns_ = 0;
  std::vector<NodeState> nodes_;
  Counters counters_;

  Phase phase_ = Phase::Contend;
  std::int64_t activity_end_ = 0;
  std::int64_t idle_slots_ = 0;
  std::vector<std::size_t> colliders_;
  std::size_t txop_node_ = 0;
  Strategy txop_strategy_;
  std::vector<bool> outcomes_;
  std::size_t frame_index_ = 0;
};

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

namespace detail {

inline std::string strategy_label(const Engine& e, std::size_t i) {
  return e.auto_rate(i) ? std::string("auto") : describe(e.node(i).current);
}

// Advances the engine to stop_ns, running DCF* adaptation (if enabled) and
// calling on_report at each report boundary. Boundaries are anchored at origin_ns.
class Clock {
 public:
  Clock(Engine& e, const SimScenario& sc)
      : e_(e), adapt_(sc.discipline == Discipline::TimeFair),
        adapt_ns_(to_ns(sc.dcf_star.adaptation_period_s)), next_adapt_(adapt_ns_),
        last_adapt_(e.counters()) {}

  template <class OnReport>
  void advance(std::int64_t stop_ns, std::int64_t report_ns, std::int64_t& next_report,
               OnReport&& on_report) {
    while (e_.now_ns() < stop_ns) {
      std::int64_t next = stop_ns;
      if (adapt_) next = std::min(next, next_adapt_);
      if (report_ns > 0) next = std::min(next, next_report);
      e_.run_until(next);
      if (adapt_ && e_.now_ns() == next_adapt_) {
        e_.adapt_contention_windows(last_adapt_);
        last_adapt_ = e_.counters();
        next_adapt_ += adapt_ns_;
      }
      if (report_ns > 0 && e_.now_ns() == next_report) {
        on_report();
        next_report += report_ns;
      }
    }
  }

  void advance(std::int64_t stop_ns) {
    std::int64_t unused = 0;
    advance(stop_ns, 0, unused, [] {});
  }

 private:
  Engine& e_;
  bool adapt_;
  std::int64_t adapt_ns_;
  std::int64_t next_adapt_;
  Counters last_adapt_;
};

inline double window_throughput(const Counters& a, const Counters& b, std::size_t i) {
  const std::int64_t dt = b.now_ns - a.now_ns;
  if (dt <= 0) return 0.0;
  return (b.nodes[i].delivered_bits - a.nodes[i].delivered_bits) / to_seconds(dt);
}

}  // namespace detail

// Best-response phase (when any node uses it) followed by a measured run of
// scenario.duration_s. All report statistics cover the measured run only.
inline SimReport run_sim(const SimScenario& sc) {
  Engine engine(sc);
  detail::Clock clock(engine, sc);
  SimReport rep;

  std::vector<std::size_t> responders;
  for (std::size_t i = 0; i < sc.nodes.size(); ++i)
    if (uses_best_response(sc.nodes[i])) responders.push_back(i);

  if (!responders.empty()) {
    const auto& cfg = sc.best_response;
    const std::int64_t probe = to_ns(cfg.probe_window_s);
    const std::int64_t measure = to_ns(cfg.measurement_window_s);
    std::size_t quiet = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
      const std::size_t i = responders[static_cast<std::size_t>(epoch) % responders.size()];
      const Strategy incumbent = engine.node(i).current;
      BestResponseStep step;
      step.epoch = epoch;
      step.node = i;
      step.chosen = incumbent;
      for (const auto& candidate : sc.nodes[i].strategies) {
        engine.set_strategy(i, candidate);
        clock.advance(engine.now_ns() + probe - measure);
        const Counters start = engine.counters();
        clock.advance(engine.now_ns() + measure);
        step.measured_bps.emplace_back(candidate,
                                       detail::window_throughput(start, engine.counters(), i));
      }
      // Strict improvement required, so ties stay with the incumbent.
      double best = -1.0;
      for (const auto& [s, r] : step.measured_bps)
        if (s == incumbent) best = r;
      for (const auto& [s, r] : step.measured_bps)
        if (r > best) {
          best = r;
          step.chosen = s;
        }
      step.switched = !(step.chosen == incumbent);
      engine.set_strategy(i, step.chosen);
      rep.best_response_log.push_back(step);
      rep.best_response_epochs = epoch + 1;
      quiet = step.switched ? 0 : quiet + 1;
      if (quiet >= responders.size()) {
        rep.best_response_converged = true;
        break;
      }
    }
  }

  const Counters start = engine.counters();
  const std::int64_t origin = engine.now_ns();
  const std::int64_t duration = to_ns(sc.duration_s);
  const std::int64_t report_ns = to_ns(sc.report_interval_s);
  std::int64_t next_report = origin + report_ns;
  Counters last_report = start;

  auto emit = [&] {
    const Counters& now = engine.counters();
    const std::int64_t dt = now.now_ns - last_report.now_ns;
    if (dt <= 0) return;
    for (std::size_t i = 0; i < engine.size(); ++i) {
      const auto& a = last_report.nodes[i];
      const auto& b = now.nodes[i];
      IntervalRow row;
      row.time_s = to_seconds(now.now_ns - origin);
      row.node = i;
      row.throughput_mbps = to_mbps((b.delivered_bits - a.delivered_bits) / to_seconds(dt));
      row.share = static_cast<double>(b.channel_ns - a.channel_ns) / static_cast<double>(dt);
      const auto attempts = b.attempted - a.attempted;
      row.loss_rate = attempts ? 1.0 - static_cast<double>(b.succeeded - a.succeeded) /
                                           static_cast<double>(attempts)
                               : 0.0;
      row.cw_min_eff = engine.node(i).cw_min_effective;
      row.strategy = detail::strategy_label(engine, i);
      rep.series.push_back(std::move(row));
    }
    last_report = now;
  };

  clock.advance(origin + duration, report_ns, next_report, emit);
  if (engine.now_ns() != last_report.now_ns) emit();

  const Counters& end = engine.counters();
  rep.duration_s = sc.duration_s;
  rep.duration_ns = end.now_ns - start.now_ns;
  rep.idle_ns = end.idle_ns - start.idle_ns;
  rep.collision_ns = end.collision_ns - start.collision_ns;
  rep.idle_time_s = to_seconds(rep.idle_ns);
  rep.collision_time_s = to_seconds(rep.collision_ns);
  rep.collision_events = end.collision_events - start.collision_events;
  for (std::size_t i = 0; i < engine.size(); ++i) {
    const auto& a = start.nodes[i];
    const auto& b = end.nodes[i];
    NodeSummary s;
    s.name = sc.nodes[i].name;
    const double seconds = to_seconds(rep.duration_ns);
    s.throughput_bps = (b.delivered_bits - a.delivered_bits) / seconds;
    rep.channel_ns.push_back(b.channel_ns - a.channel_ns);
    s.channel_time_s = to_seconds(rep.channel_ns.back());
    s.share = s.channel_time_s / seconds;
    s.txops = b.txops - a.txops;
    s.frames_attempted = b.attempted - a.attempted;
    s.frames_succeeded = b.succeeded - a.succeeded;
    s.txop_frames = b.txop_frames - a.txop_frames;
    s.collisions = b.collisions - a.collisions;
    s.loss_rate = s.frames_attempted
                      ? 1.0 - static_cast<double>(s.frames_succeeded) /
                                  static_cast<double>(s.frames_attempted)
                      : 0.0;
    s.mean_frames_per_txop =
        s.txops ? static_cast<double>(s.txop_frames) / static_cast<double>(s.txops) : 0.0;
    s.cw_min_eff = engine.node(i).cw_min_effective;
    s.strategy = detail::strategy_label(engine, i);
    if (!engine.auto_rate(i)) s.final_strategy = engine.node(i).current;
    rep.aggregate_throughput_bps += s.throughput_bps;
    rep.nodes.push_back(std::move(s));
  }
  std::int64_t busy = 0;
  for (auto ns : rep.channel_ns) busy += ns;
  for (std::size_t i = 0; i < rep.nodes.size(); ++i)
    rep.nodes[i].busy_share =
        busy ? static_cast<double>(rep.channel_ns[i]) / static_cast<double>(busy) : 0.0;
  return rep;
}

}  // namespace macgame
