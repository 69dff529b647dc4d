#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "macgame/channel.hpp"
#include "macgame/error.hpp"
#include "macgame/game.hpp"
#include "macgame/phy.hpp"
#include "macgame/sim.hpp"

namespace macgame {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Line tracking
// ---------------------------------------------------------------------------

// JSON pointer -> 1-based source line of the value (or of its key).
class LineIndex {
 public:
  void set(const std::string& pointer, int line) { lines_.emplace(pointer, line); }

  // Line of the pointer, or of its nearest recorded ancestor.
  int line_of(std::string pointer) const {
    for (;;) {
      auto it = lines_.find(pointer);
      if (it != lines_.end()) return it->second;
      if (pointer.empty()) return 0;
      pointer.erase(pointer.rfind('/'));
    }
  }

 private:
  std::map<std::string, int> lines_;
};

namespace detail {

// Input iterator that counts newlines as the parser consumes them.
class LineCountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  LineCountingIterator(const char* p, int* line) : p_(p), line_(line) {}

  reference operator*() const { return *p_; }
  LineCountingIterator& operator++() {
    if (*p_ == '\n') ++*line_;
    ++p_;
    return *this;
  }
  LineCountingIterator operator++(int) {
    auto tmp = *this;
    ++*this;
    return tmp;
  }
  bool operator==(const LineCountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const LineCountingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  int* line_;
};

inline std::string escape_pointer_token(const std::string& t) {
  std::string out;
  for (char c : t) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// DOM-building SAX handler that also records where every value starts.
class LocatingSax {
 public:
  using number_integer_t = Json::number_integer_t;
  using number_unsigned_t = Json::number_unsigned_t;
  using number_float_t = Json::number_float_t;
  using string_t = Json::string_t;
  using binary_t = Json::binary_t;

  LocatingSax(Json& root, LineIndex& index, const int* line)
      : dom_(root, false), index_(index), line_(line) {}

  bool null() { return value(), dom_.null(); }
  bool boolean(bool v) { return value(), dom_.boolean(v); }
  bool number_integer(number_integer_t v) { return value(), dom_.number_integer(v); }
  bool number_unsigned(number_unsigned_t v) { return value(), dom_.number_unsigned(v); }
  bool number_float(number_float_t v, const string_t& s) { return value(), dom_.number_float(v, s); }
  bool string(string_t& v) { return value(), dom_.string(v); }
  bool binary(binary_t& v) { return value(), dom_.binary(v); }

  bool start_object(std::size_t n) {
    frames_.push_back({value(), false, 0, {}});
    return dom_.start_object(n);
  }
  bool key(string_t& k) {
    frames_.back().key = k;
    index_.set(frames_.back().pointer + "/" + escape_pointer_token(k), *line_);
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    frames_.push_back({value(), true, 0, {}});
    return dom_.start_array(n);
  }
  bool end_array() {
    frames_.pop_back();
    return dom_.end_array();
  }

  template <class Exception>
  bool parse_error(std::size_t, const std::string&, const Exception& ex) {
    error_ = ex.what();
    return false;
  }

  const std::string& error() const { return error_; }

 private:
  struct Frame {
    std::string pointer;
    bool array;
    std::size_t next_index;
    std::string key;
  };

  // Pointer of the value that is starting now; records its line.
  std::string value() {
    std::string ptr;
    if (!frames_.empty()) {
      auto& f = frames_.back();
      ptr = f.pointer + "/" +
            (f.array ? std::to_string(f.next_index++) : escape_pointer_token(f.key));
    }
    if (frames_.empty() || frames_.back().array) index_.set(ptr, *line_);
    return ptr;
  }

  nlohmann::detail::json_sax_dom_parser<Json> dom_;
  LineIndex& index_;
  const int* line_;
  std::vector<Frame> frames_;
  std::string error_;
};

}  // namespace detail

struct LocatedJson {
  Json doc;
  LineIndex lines;
};

inline LocatedJson parse_located_json(const std::string& text, const std::string& source) {
  LocatedJson out;
  int line = 1;
  detail::LocatingSax sax(out.doc, out.lines, &line);
  detail::LineCountingIterator first(text.data(), &line);
  detail::LineCountingIterator last(text.data() + text.size(), &line);
  if (!Json::sax_parse(first, last, &sax))
    throw ValidationError(source + ":" + std::to_string(line) + ": malformed JSON: " + sax.error(),
                          line);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario document
// ---------------------------------------------------------------------------

struct StrategyDef {
  std::string name;
  Strategy strategy;
  bool operator==(const StrategyDef&) const = default;
};

struct FadingSpec {
  double tx_power_dbm = 15.0;
  double distance_m = 10.0;
  double path_loss_exponent = 3.0;
  double ref_loss_db = 40.0;
  double ref_distance_m = 1.0;
  std::vector<RateThreshold> rx_thresholds = default_rx_thresholds();
  std::uint64_t rng_seed = 0;

  bool operator==(const FadingSpec&) const = default;

  FadingChannel channel(int coherence) const {
    return {log_distance_rx_power_dbm(tx_power_dbm, distance_m, path_loss_exponent, ref_loss_db,
                                      ref_distance_m),
            rx_thresholds, coherence, rng_seed};
  }
};

enum class ChannelKind { Table, Fading };
enum class PolicyKind { Fixed, AutoRate, BestResponse };

struct NodeDef {
  std::string name;
  std::vector<std::string> strategies;
  PolicyKind policy = PolicyKind::Fixed;
  std::string policy_strategy;  // fixed: the strategy; best_response: the initial one
  double auto_payload_bits = 12000.0;
  ChannelKind channel = ChannelKind::Table;
  std::vector<std::pair<std::string, double>> alpha;  // table channels
  FadingSpec fading;
  int coherence_samples = 1;
  double target_share = 0.0;

  bool operator==(const NodeDef&) const = default;
};

struct SweepAxis {
  std::string path;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;
  bool operator==(const SweepAxis&) const = default;
};

struct SweepSpec {
  std::string mode = "analyze";  // analyze | simulate | solo
  std::vector<SweepAxis> axes;
  bool operator==(const SweepSpec&) const = default;
};

struct Scenario {
  std::string name;
  PhyProfile phy;
  Discipline discipline = Discipline::Dcf;
  std::vector<StrategyDef> strategies;
  std::vector<NodeDef> nodes;
  double t_idle_s = 0.0;
  double duration_s = 10.0;
  std::uint64_t seed = 1;
  double report_interval_s = 1.0;
  DcfStarConfig dcf_star;
  BestResponseConfig best_response;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "out";
  std::string output_prefix;

  bool operator==(const Scenario&) const = default;

  const Strategy& strategy(const std::string& name) const {
    for (const auto& d : strategies)
      if (d.name == name) return d.strategy;
    throw DomainError("unknown strategy '" + name + "'");
  }
};

namespace detail {

// Schema reader over one JSON object. Every error carries file and line.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string pointer, const LineIndex& lines, const std::string& src)
      : obj_(obj), ptr_(std::move(pointer)), lines_(lines), src_(src) {
    if (!obj_.is_object()) fail(ptr_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    const int line = lines_.line_of(pointer);
    throw ValidationError(src_ + ":" + std::to_string(line) + ": " +
                              (pointer.empty() ? std::string("/") : pointer) + ": " + what,
                          line);
  }

  std::string child(const std::string& key) const { return ptr_ + "/" + escape_pointer_token(key); }
  bool has(const std::string& key) const { return obj_.contains(key); }
  const Json& raw(const std::string& key) const { return obj_.at(key); }
  const std::string& pointer() const { return ptr_; }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items())
      if (!ok.count(k)) fail(child(k), "unknown key '" + k + "'");
  }

  const Json& require(const std::string& key) const {
    if (!has(key)) fail(ptr_, "missing required key '" + key + "'");
    return obj_.at(key);
  }

  double number(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_number()) fail(child(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_number_integer()) fail(child(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Json& v = obj_.at(key);
    if (!v.is_number_unsigned()) fail(child(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  const Json& array(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_array()) fail(child(key), "expected an array");
    return v;
  }

  ObjectReader object(const std::string& key) const {
    return ObjectReader(require(key), child(key), lines_, src_);
  }

  const LineIndex& lines() const { return lines_; }
  const std::string& source() const { return src_; }

 private:
  const Json& obj_;
  std::string ptr_;
  const LineIndex& lines_;
  const std::string& src_;
};

inline PhyProfile read_phy(const ObjectReader& r) {
  r.allow_only({"preset", "rates_mbps", "bit_overhead_bits", "time_overhead_s", "slot_time_s",
                "cw_min", "cw_max", "txop_limit_s", "max_payload_bits", "rts_cts_overhead_s"});
  PhyProfile phy;
  if (r.has("preset")) {
    auto p = preset(r.string("preset"));
    if (!p) r.fail(r.child("preset"), "unknown preset '" + r.string("preset") + "'");
    phy = *p;
  } else if (!r.has("rates_mbps")) {
    r.fail(r.pointer(), "needs either 'preset' or 'rates_mbps'");
  }
  if (r.has("rates_mbps")) {
    phy.rates_bps.clear();
    const Json& rates = r.array("rates_mbps");
    for (std::size_t k = 0; k < rates.size(); ++k) {
      if (!rates[k].is_number()) r.fail(r.child("rates_mbps") + "/" + std::to_string(k), "expected a number");
      phy.rates_bps.push_back(from_mbps(rates[k].get<double>()));
    }
  }
  phy.bit_overhead_bits = r.number("bit_overhead_bits", phy.bit_overhead_bits);
  phy.time_overhead_s = r.number("time_overhead_s", phy.time_overhead_s);
  // RTS/CTS is folded into the per-frame time overhead.
  phy.time_overhead_s += r.number("rts_cts_overhead_s", 0.0);
  phy.slot_time_s = r.number("slot_time_s", phy.slot_time_s);
  phy.cw_min = static_cast<int>(r.integer("cw_min", phy.cw_min));
  phy.cw_max = static_cast<int>(r.integer("cw_max", phy.cw_max));
  phy.txop_limit_s = r.number("txop_limit_s", phy.txop_limit_s);
  phy.max_payload_bits = r.number("max_payload_bits", phy.max_payload_bits);
  try {
    validate(phy);
  } catch (const DomainError& e) {
    r.fail(r.pointer(), e.what());
  }
  return phy;
}

inline NodeDef read_node(const ObjectReader& r, const Scenario& sc) {
  r.allow_only({"name", "strategies", "policy", "channel", "target_share"});
  NodeDef n;
  n.name = r.string("name");
  auto known = [&](const std::string& name) {
    return std::any_of(sc.strategies.begin(), sc.strategies.end(),
                       [&](const auto& d) { return d.name == name; });
  };

  const Json& strategies = r.array("strategies");
  if (strategies.empty()) r.fail(r.child("strategies"), "strategy set is empty");
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    const std::string ptr = r.child("strategies") + "/" + std::to_string(k);
    if (!strategies[k].is_string()) r.fail(ptr, "expected a strategy name");
    const auto name = strategies[k].get<std::string>();
    if (!known(name)) r.fail(ptr, "unknown strategy '" + name + "'");
    if (std::find(n.strategies.begin(), n.strategies.end(), name) != n.strategies.end())
      r.fail(ptr, "duplicate strategy '" + name + "'");
    n.strategies.push_back(name);
  }

  const auto policy = r.object("policy");
  const auto kind = policy.string("kind");
  if (kind == "fixed") {
    policy.allow_only({"kind", "strategy"});
    n.policy = PolicyKind::Fixed;
    n.policy_strategy = policy.string("strategy");
  } else if (kind == "best_response") {
    policy.allow_only({"kind", "initial"});
    n.policy = PolicyKind::BestResponse;
    n.policy_strategy = policy.string("initial");
  } else if (kind == "auto_rate") {
    policy.allow_only({"kind", "payload_bits"});
    n.policy = PolicyKind::AutoRate;
    n.auto_payload_bits = policy.number("payload_bits", n.auto_payload_bits);
  } else {
    policy.fail(policy.child("kind"), "policy kind must be fixed, best_response or auto_rate");
  }
  if (n.policy != PolicyKind::AutoRate) {
    const std::string key = n.policy == PolicyKind::Fixed ? "strategy" : "initial";
    if (std::find(n.strategies.begin(), n.strategies.end(), n.policy_strategy) ==
        n.strategies.end())
      policy.fail(policy.child(key), "strategy '" + n.policy_strategy +
                                         "' is not in the node's strategy set");
  }

  const auto ch = r.object("channel");
  const auto ch_kind = ch.string("kind");
  n.coherence_samples = static_cast<int>(ch.integer("coherence_samples", 1));
  if (n.coherence_samples < 1) ch.fail(ch.child("coherence_samples"), "must be >= 1");
  if (ch_kind == "table") {
    ch.allow_only({"kind", "alpha", "coherence_samples"});
    n.channel = ChannelKind::Table;
    const auto alpha = ch.object("alpha");
    for (const auto& [name, v] : ch.raw("alpha").items()) {
      if (!known(name)) alpha.fail(alpha.child(name), "unknown strategy '" + name + "'");
      if (!v.is_number()) alpha.fail(alpha.child(name), "expected a number");
      const double a = v.get<double>();
      if (!(a >= 0.0 && a <= 1.0)) alpha.fail(alpha.child(name), "alpha must lie in [0, 1]");
      n.alpha.emplace_back(name, a);
    }
    for (const auto& s : n.strategies)
      if (std::none_of(n.alpha.begin(), n.alpha.end(), [&](const auto& e) { return e.first == s; }))
        alpha.fail(alpha.pointer(), "no alpha for strategy '" + s + "'");
    std::vector<AlphaTable::Entry> entries;
    for (const auto& [name, a] : n.alpha) entries.emplace_back(sc.strategy(name), a);
    try {
      AlphaTable table(entries);
    } catch (const MonotonicityError& e) {
      const int line = r.lines().line_of(alpha.pointer());
      throw MonotonicityError(r.source() + ":" + std::to_string(line) + ": " + alpha.pointer() +
                              ": alpha must not increase with rate: " + e.what());
    } catch (const DomainError& e) {
      alpha.fail(alpha.pointer(), e.what());
    }
  } else if (ch_kind == "fading") {
    ch.allow_only({"kind", "tx_power_dbm", "distance_m", "path_loss_exponent", "ref_loss_db",
                   "ref_distance_m", "rx_thresholds", "coherence_samples", "rng_seed"});
    n.channel = ChannelKind::Fading;
    auto& f = n.fading;
    f.tx_power_dbm = ch.number("tx_power_dbm", f.tx_power_dbm);
    f.distance_m = ch.number("distance_m", f.distance_m);
    f.path_loss_exponent = ch.number("path_loss_exponent", f.path_loss_exponent);
    f.ref_loss_db = ch.number("ref_loss_db", f.ref_loss_db);
    f.ref_distance_m = ch.number("ref_distance_m", f.ref_distance_m);
    f.rng_seed = ch.unsigned_integer("rng_seed", f.rng_seed);
    if (!(f.distance_m > 0.0)) ch.fail(ch.child("distance_m"), "must be > 0");
    if (!(f.ref_distance_m > 0.0)) ch.fail(ch.child("ref_distance_m"), "must be > 0");
    if (ch.has("rx_thresholds")) {
      f.rx_thresholds.clear();
      const Json& arr = ch.array("rx_thresholds");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        ObjectReader t(arr[k], ch.child("rx_thresholds") + "/" + std::to_string(k), r.lines(),
                       r.source());
        t.allow_only({"rate_mbps", "threshold_dbm"});
        f.rx_thresholds.push_back({from_mbps(t.number("rate_mbps")), t.number("threshold_dbm")});
      }
    }
    try {
      validate(f.channel(n.coherence_samples));
    } catch (const DomainError& e) {
      ch.fail(ch.pointer(), e.what());
    }
  } else {
    ch.fail(ch.child("kind"), "channel kind must be table or fading");
  }

  n.target_share = r.number("target_share", 0.0);
  if (!(n.target_share >= 0.0 && n.target_share <= 1.0))
    r.fail(r.child("target_share"), "must lie in [0, 1]");
  return n;
}

inline SweepSpec read_sweep(const ObjectReader& r) {
  r.allow_only({"mode", "axes"});
  SweepSpec s;
  s.mode = r.string("mode", s.mode);
  if (s.mode != "analyze" && s.mode != "simulate" && s.mode != "solo")
    r.fail(r.child("mode"), "mode must be analyze, simulate or solo");
  if (r.has("axes")) {
    const Json& axes = r.array("axes");
    for (std::size_t k = 0; k < axes.size(); ++k) {
      ObjectReader a(axes[k], r.child("axes") + "/" + std::to_string(k), r.lines(), r.source());
      a.allow_only({"path", "from", "to", "steps"});
      SweepAxis ax{a.string("path"), a.number("from"), a.number("to"),
                   static_cast<int>(a.integer("steps"))};
      if (ax.steps < 1) a.fail(a.child("steps"), "must be >= 1");
      s.axes.push_back(ax);
    }
  }
  return s;
}

}  // namespace detail

// Validates the whole document against the schema. Throws ValidationError
// (with file:line) or MonotonicityError for alpha tables rising with rate.
inline Scenario scenario_from_json(const LocatedJson& in, const std::string& source) {
  detail::ObjectReader root(in.doc, "", in.lines, source);
  root.allow_only({"name", "phy", "discipline", "strategies", "game", "nodes", "sim", "dcf_star",
                   "best_response", "sweep", "output"});
  Scenario sc;
  sc.name = root.string("name");
  sc.phy = detail::read_phy(root.object("phy"));

  const auto disc = parse_discipline(root.string("discipline"));
  if (!disc) root.fail(root.child("discipline"), "discipline must be DCF, EDCF_BFL, EDCF_BEB or TIME_FAIR");
  sc.discipline = *disc;

  const Json& strategies = root.array("strategies");
  if (strategies.empty()) root.fail(root.child("strategies"), "strategy catalog is empty");
  for (std::size_t k = 0; k < strategies.size(); ++k) {
    detail::ObjectReader s(strategies[k], root.child("strategies") + "/" + std::to_string(k),
                           in.lines, source);
    s.allow_only({"name", "rate_mbps", "payload_bits"});
    StrategyDef d{s.string("name"), {from_mbps(s.number("rate_mbps")), s.number("payload_bits")}};
    if (std::any_of(sc.strategies.begin(), sc.strategies.end(),
                    [&](const auto& o) { return o.name == d.name; }))
      s.fail(s.child("name"), "duplicate strategy name '" + d.name + "'");
    try {
      validate(d.strategy, sc.phy);
    } catch (const DomainError& e) {
      s.fail(s.pointer(), e.what());
    }
    sc.strategies.push_back(d);
  }

  if (root.has("game")) {
    const auto game = root.object("game");
    game.allow_only({"t_idle_s"});
    sc.t_idle_s = game.number("t_idle_s", 0.0);
    if (!(sc.t_idle_s >= 0.0)) game.fail(game.child("t_idle_s"), "must be >= 0");
  }

  const Json& nodes = root.array("nodes");
  if (nodes.empty()) root.fail(root.child("nodes"), "no nodes defined");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    detail::ObjectReader n(nodes[k], root.child("nodes") + "/" + std::to_string(k), in.lines, source);
    sc.nodes.push_back(detail::read_node(n, sc));
  }
  double share_sum = 0.0;
  for (const auto& n : sc.nodes) share_sum += n.target_share;
  if (share_sum > 1.0 + 1e-9) root.fail(root.child("nodes"), "target shares sum above 1");

  if (root.has("sim")) {
    const auto sim = root.object("sim");
    sim.allow_only({"duration_s", "seed", "report_interval_s"});
    sc.duration_s = sim.number("duration_s", sc.duration_s);
    sc.seed = sim.unsigned_integer("seed", sc.seed);
    sc.report_interval_s = sim.number("report_interval_s", sc.report_interval_s);
    if (!(sc.duration_s > 0.0)) sim.fail(sim.child("duration_s"), "must be > 0");
    if (!(sc.report_interval_s > 0.0)) sim.fail(sim.child("report_interval_s"), "must be > 0");
  }
  if (root.has("dcf_star")) {
    const auto d = root.object("dcf_star");
    d.allow_only({"gain", "adaptation_period_s", "cw_lo", "cw_hi"});
    auto& c = sc.dcf_star;
    c.gain = d.number("gain", c.gain);
    c.adaptation_period_s = d.number("adaptation_period_s", c.adaptation_period_s);
    c.cw_lo = d.number("cw_lo", c.cw_lo);
    c.cw_hi = d.number("cw_hi", c.cw_hi);
    if (!(c.gain >= 0.0)) d.fail(d.child("gain"), "must be >= 0");
    if (!(c.adaptation_period_s > 0.0)) d.fail(d.child("adaptation_period_s"), "must be > 0");
    if (!(c.cw_lo >= 1.0 && c.cw_lo <= c.cw_hi)) d.fail(d.pointer(), "need 1 <= cw_lo <= cw_hi");
  }
  if (root.has("best_response")) {
    const auto b = root.object("best_response");
    b.allow_only({"probe_window_s", "measurement_window_s", "max_epochs"});
    auto& c = sc.best_response;
    c.probe_window_s = b.number("probe_window_s", c.probe_window_s);
    c.measurement_window_s = b.number("measurement_window_s", c.measurement_window_s);
    c.max_epochs = static_cast<int>(b.integer("max_epochs", c.max_epochs));
    if (!(c.probe_window_s > 0.0 && c.measurement_window_s > 0.0 &&
          c.measurement_window_s <= c.probe_window_s))
      b.fail(b.pointer(), "need 0 < measurement_window_s <= probe_window_s");
    if (c.max_epochs < 1) b.fail(b.child("max_epochs"), "must be >= 1");
  }
  if (root.has("sweep")) sc.sweep = detail::read_sweep(root.object("sweep"));
  if (root.has("output")) {
    const auto o = root.object("output");
    o.allow_only({"dir", "prefix"});
    sc.output_dir = o.string("dir", sc.output_dir);
    sc.output_prefix = o.string("prefix", "");
  }
  if (sc.output_prefix.empty()) sc.output_prefix = sc.name;
  return sc;
}

inline Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>") {
  return scenario_from_json(parse_located_json(text, source), source);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Canonical form: every field explicit, phy fully resolved.
inline Json scenario_to_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  Json phy;
  Json rates = Json::array();
  for (double r : sc.phy.rates_bps) rates.push_back(to_mbps(r));
  phy["rates_mbps"] = rates;
  phy["bit_overhead_bits"] = sc.phy.bit_overhead_bits;
  phy["time_overhead_s"] = sc.phy.time_overhead_s;
  phy["slot_time_s"] = sc.phy.slot_time_s;
  phy["cw_min"] = sc.phy.cw_min;
  phy["cw_max"] = sc.phy.cw_max;
  phy["txop_limit_s"] = sc.phy.txop_limit_s;
  phy["max_payload_bits"] = sc.phy.max_payload_bits;
  j["phy"] = phy;
  j["discipline"] = std::string(to_string(sc.discipline));
  Json strategies = Json::array();
  for (const auto& d : sc.strategies)
    strategies.push_back(
        {{"name", d.name}, {"rate_mbps", to_mbps(d.strategy.rate_bps)}, {"payload_bits", d.strategy.payload_bits}});
  j["strategies"] = strategies;
  j["game"] = {{"t_idle_s", sc.t_idle_s}};
  Json nodes = Json::array();
  for (const auto& n : sc.nodes) {
    Json node;
    node["name"] = n.name;
    node["strategies"] = n.strategies;
    switch (n.policy) {
      case PolicyKind::Fixed: node["policy"] = {{"kind", "fixed"}, {"strategy", n.policy_strategy}}; break;
      case PolicyKind::BestResponse:
        node["policy"] = {{"kind", "best_response"}, {"initial", n.policy_strategy}};
        break;
      case PolicyKind::AutoRate:
        node["policy"] = {{"kind", "auto_rate"}, {"payload_bits", n.auto_payload_bits}};
        break;
    }
    Json ch;
    if (n.channel == ChannelKind::Table) {
      ch["kind"] = "table";
      Json alpha = Json::object();
      for (const auto& [name, a] : n.alpha) alpha[name] = a;
      ch["alpha"] = alpha;
    } else {
      const auto& f = n.fading;
      ch["kind"] = "fading";
      ch["tx_power_dbm"] = f.tx_power_dbm;
      ch["distance_m"] = f.distance_m;
      ch["path_loss_exponent"] = f.path_loss_exponent;
      ch["ref_loss_db"] = f.ref_loss_db;
      ch["ref_distance_m"] = f.ref_distance_m;
      Json th = Json::array();
      for (const auto& t : f.rx_thresholds)
        th.push_back({{"rate_mbps", to_mbps(t.rate_bps)}, {"threshold_dbm", t.threshold_dbm}});
      ch["rx_thresholds"] = th;
      ch["rng_seed"] = f.rng_seed;
    }
    ch["coherence_samples"] = n.coherence_samples;
    node["channel"] = ch;
    node["target_share"] = n.target_share;
    nodes.push_back(node);
  }
  j["nodes"] = nodes;
  j["sim"] = {{"duration_s", sc.duration_s}, {"seed", sc.seed}, {"report_interval_s", sc.report_interval_s}};
  j["dcf_star"] = {{"gain", sc.dcf_star.gain},
                   {"adaptation_period_s", sc.dcf_star.adaptation_period_s},
                   {"cw_lo", sc.dcf_star.cw_lo},
                   {"cw_hi", sc.dcf_star.cw_hi}};
  j["best_response"] = {{"probe_window_s", sc.best_response.probe_window_s},
                        {"measurement_window_s", sc.best_response.measurement_window_s},
                        {"max_epochs", sc.best_response.max_epochs}};
  if (sc.sweep) {
    Json axes = Json::array();
    for (const auto& a : sc.sweep->axes)
      axes.push_back({{"path", a.path}, {"from", a.from}, {"to", a.to}, {"steps", a.steps}});
    j["sweep"] = {{"mode", sc.sweep->mode}, {"axes", axes}};
  }
  j["output"] = {{"dir", sc.output_dir}, {"prefix", sc.output_prefix}};
  return j;
}

// ---------------------------------------------------------------------------
// Conversions to model inputs
// ---------------------------------------------------------------------------

inline std::vector<Strategy> node_strategies(const Scenario& sc, const NodeDef& n) {
  std::vector<Strategy> out;
  for (const auto& name : n.strategies) out.push_back(sc.strategy(name));
  return out;
}

inline NodeChannel node_channel(const Scenario& sc, const NodeDef& n) {
  if (n.channel == ChannelKind::Fading) return n.fading.channel(n.coherence_samples);
  std::vector<AlphaTable::Entry> entries;
  for (const auto& [name, a] : n.alpha) entries.emplace_back(sc.strategy(name), a);
  return BernoulliChannel{AlphaTable(entries), n.coherence_samples};
}

inline AlphaTable node_alpha_table(const Scenario& sc, const NodeDef& n) {
  const auto ch = node_channel(sc, n);
  if (const auto* b = std::get_if<BernoulliChannel>(&ch)) return b->table;
  const auto strategies = node_strategies(sc, n);
  return induced_alpha_table(std::get<FadingChannel>(ch), strategies);
}

// The first two nodes play the analytic game as i and j.
inline StageGame to_stage_game(const Scenario& sc) {
  if (sc.nodes.size() != 2)
    throw ValidationError("analysis needs exactly two nodes, scenario has " +
                          std::to_string(sc.nodes.size()));
  StageGame g;
  g.phy = sc.phy;
  g.discipline = sc.discipline;
  g.strategies_i = node_strategies(sc, sc.nodes[0]);
  g.strategies_j = node_strategies(sc, sc.nodes[1]);
  g.alpha_i = node_alpha_table(sc, sc.nodes[0]);
  g.alpha_j = node_alpha_table(sc, sc.nodes[1]);
  g.t_idle_s = sc.t_idle_s;
  return g;
}

inline SimNode to_sim_node(const Scenario& sc, const NodeDef& n) {
  SimNode out;
  out.name = n.name;
  out.channel = node_channel(sc, n);
  out.strategies = node_strategies(sc, n);
  out.target_share = n.target_share;
  switch (n.policy) {
    case PolicyKind::Fixed: out.policy = FixedPolicy{sc.strategy(n.policy_strategy)}; break;
    case PolicyKind::BestResponse: out.policy = BestResponsePolicy{sc.strategy(n.policy_strategy)}; break;
    case PolicyKind::AutoRate: out.policy = AutoRatePolicy{n.auto_payload_bits}; break;
  }
  return out;
}

inline SimScenario to_sim_scenario(const Scenario& sc) {
  SimScenario out;
  out.phy = sc.phy;
  out.discipline = sc.discipline;
  for (const auto& n : sc.nodes) out.nodes.push_back(to_sim_node(sc, n));
  out.duration_s = sc.duration_s;
  out.seed = sc.seed;
  out.report_interval_s = sc.report_interval_s;
  out.dcf_star = sc.dcf_star;
  out.best_response = sc.best_response;
  return out;
}

// ---------------------------------------------------------------------------
// Sweep targets
// ---------------------------------------------------------------------------

// Expands a dotted path ("nodes.*.channel.distance_m") into JSON pointers,
// one per wildcard match. Every target must already hold a number.
inline std::vector<Json::json_pointer> resolve_sweep_path(const Json& doc, const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.empty()) throw ValidationError("sweep path is empty");

  std::vector<std::string> prefixes{""};
  for (const auto& part : parts) {
    std::vector<std::string> next;
    for (const auto& pre : prefixes) {
      const Json::json_pointer ptr(pre);
      if (!doc.contains(ptr)) throw ValidationError("sweep path '" + path + "' does not exist");
      const Json& node = doc.at(ptr);
      if (part == "*") {
        if (!node.is_array()) throw ValidationError("sweep path '" + path + "': '*' needs an array");
        for (std::size_t k = 0; k < node.size(); ++k) next.push_back(pre + "/" + std::to_string(k));
      } else {
        next.push_back(pre + "/" + detail::escape_pointer_token(part));
      }
    }
    prefixes = std::move(next);
  }
  std::vector<Json::json_pointer> out;
  for (const auto& p : prefixes) {
    const Json::json_pointer ptr(p);
    if (!doc.contains(ptr)) throw ValidationError("sweep path '" + path + "' does not exist");
    if (!doc.at(ptr).is_number())
      throw ValidationError("sweep path '" + path + "' does not name a scalar number");
    out.push_back(ptr);
  }
  return out;
}

}  // namespace macgame
