#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "macgame/game.hpp"
#include "macgame/scenario.hpp"
#include "macgame/sim.hpp"

namespace macgame::cli {

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kValidationFailure = 2 };

struct Options {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<SweepAxis> axes;  // overrides the scenario's sweep axes when set
  std::optional<std::string> sweep_mode;
  unsigned threads = 0;  // 0: hardware concurrency
};

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

inline std::string num(double v, int digits = 6) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) os_ << ',';
      os_ << csv_field(fields[k]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out.flush()) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

struct Loaded {
  Scenario scenario;
  Json canonical;
};

inline Loaded load(const std::string& path, const Options& opts) {
  const auto located = parse_located_json(read_text_file(path), path);
  Loaded l{scenario_from_json(located, path), {}};
  if (opts.seed) l.scenario.seed = *opts.seed;
  if (opts.out_dir) l.scenario.output_dir = *opts.out_dir;
  l.canonical = scenario_to_json(l.scenario);
  return l;
}

inline std::filesystem::path output_path(const Scenario& sc, const std::string& suffix) {
  return std::filesystem::path(sc.output_dir) / (sc.output_prefix + suffix);
}

// Scenario name of a strategy in a node's set, or its generic description.
inline std::string strategy_name(const Scenario& sc, const NodeDef& n, const Strategy& s) {
  for (const auto& name : n.strategies)
    if (sc.strategy(name) == s) return name;
  return describe(s);
}

// Maps failures onto exit codes with a one-line diagnostic per class.
inline int guarded(std::ostream& err, const std::function<void()>& body) {
  try {
    body();
    return kOk;
  } catch (const std::ios_base::failure& e) {
    err << "error: missing file: " << e.what() << '\n';
  } catch (const MonotonicityError& e) {
    err << "error: alpha table violates rate monotonicity: " << e.what() << '\n';
  } catch (const ValidationError& e) {
    err << "error: schema violation: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: invalid scenario: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: runtime failure: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kValidationFailure;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct Analysis {
  StageGame game;
  EquilibriumReport report;
  std::optional<UndesirabilityWitness> witness;
};

inline Analysis analyze_scenario(const Scenario& sc) {
  Analysis a;
  a.game = to_stage_game(sc);
  a.report = classify_equilibria(a.game);
  a.witness = undesirability_witness(a.game);
  return a;
}

inline std::string row_name(const Scenario& sc, std::size_t r) { return sc.nodes[0].strategies[r]; }
inline std::string col_name(const Scenario& sc, std::size_t c) { return sc.nodes[1].strategies[c]; }

inline std::string analysis_text(const Scenario& sc, const Analysis& a) {
  const auto& m = a.report.matrix;
  std::ostringstream os;
  os << "scenario: " << sc.name << '\n';
  os << "discipline: " << to_string(sc.discipline) << '\n';
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& node = sc.nodes[p];
    const auto& table = p == 0 ? a.game.alpha_i : a.game.alpha_j;
    os << "node " << (p == 0 ? "i" : "j") << " (" << node.name << "):\n";
    for (const auto& name : node.strategies) {
      const auto& s = sc.strategy(name);
      os << "  " << name << "  " << describe(s) << "  alpha " << num(table.lookup(s), 4)
         << "  R_prac " << num(to_mbps(practical_throughput(s, table.lookup(s), sc.phy)), 4)
         << " Mbps\n";
    }
  }
  os << "\npayoff matrix, Mbps (r_i, r_j):\n";
  std::size_t label = 0;
  for (std::size_t r = 0; r < m.n_rows(); ++r) label = std::max(label, row_name(sc, r).size() + 2);
  os << "  " << std::string(label, ' ');
  for (std::size_t c = 0; c < m.n_cols(); ++c) os << "  " << std::left << std::setw(16) << "j:" + col_name(sc, c);
  os << std::right << '\n';
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    os << "  " << std::left << std::setw(static_cast<int>(label)) << "i:" + row_name(sc, r) << std::right;
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
      const auto& o = m.at(r, c);
      os << "  (" << num(to_mbps(o.r_i), 4) << ", " << num(to_mbps(o.r_j), 4) << ")";
    }
    os << '\n';
  }
  os << "\nnash equilibria:";
  if (a.report.nash_set.empty()) os << " none";
  os << '\n';
  for (std::size_t k = 0; k < a.report.nash_set.size(); ++k) {
    const auto& cell = a.report.nash_set[k];
    const auto& o = m.at(cell.row, cell.col);
    os << "  (" << row_name(sc, cell.row) << ", " << col_name(sc, cell.col) << ")  "
       << (a.report.desirable_per_ne[k] ? "desirable" : "undesirable") << "  aggregate "
       << num(to_mbps(o.r_i + o.r_j), 4) << " Mbps\n";
  }
  os << "spe class: " << to_string(a.report.spe_class) << '\n';
  if (a.report.spe_class == SpeClass::MultipleNe)
    os << "note: multiple equilibria; selection by threats is not analyzed\n";
  const auto& ei = a.report.efficient_i;
  const auto& ej = a.report.efficient_j;
  const auto eff = stage_payoff(a.game, ei, ej);
  os << "efficient profile: (" << strategy_name(sc, sc.nodes[0], ei) << ", "
     << strategy_name(sc, sc.nodes[1], ej) << ")  aggregate " << num(to_mbps(eff.r_i + eff.r_j), 4)
     << " Mbps\n";
  if (a.witness) {
    const auto& w = *a.witness;
    const auto& node = sc.nodes[w.player == Player::I ? 0 : 1];
    os << "witness: node " << to_string(w.player) << " plays " << strategy_name(sc, node, w.ne_strategy)
       << " (R_prac " << num(to_mbps(w.r_prac_ne), 4) << " Mbps) and forgoes "
       << strategy_name(sc, node, w.forgone) << " (R_prac " << num(to_mbps(w.r_prac_forgone), 4)
       << " Mbps)\n";
  }
  return os.str();
}

inline Json analysis_json(const Scenario& sc, const Analysis& a) {
  const auto& m = a.report.matrix;
  Json j;
  j["scenario"] = sc.name;
  j["discipline"] = std::string(to_string(sc.discipline));
  for (std::size_t p = 0; p < 2; ++p) {
    const auto& node = sc.nodes[p];
    const auto& table = p == 0 ? a.game.alpha_i : a.game.alpha_j;
    Json arr = Json::array();
    for (const auto& name : node.strategies) {
      const auto& s = sc.strategy(name);
      arr.push_back({{"name", name},
                     {"rate_mbps", to_mbps(s.rate_bps)},
                     {"payload_bits", s.payload_bits},
                     {"alpha", table.lookup(s)},
                     {"r_prac_mbps", to_mbps(practical_throughput(s, table.lookup(s), sc.phy))}});
    }
    j[p == 0 ? "strategies_i" : "strategies_j"] = arr;
  }
  Json cells = Json::array();
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
      const auto& o = m.at(r, c);
      cells.push_back({{"i", row_name(sc, r)},
                       {"j", col_name(sc, c)},
                       {"r_i_mbps", to_mbps(o.r_i)},
                       {"r_j_mbps", to_mbps(o.r_j)},
                       {"f_i", o.f_i},
                       {"f_j", o.f_j},
                       {"b_i", o.b_i},
                       {"b_j", o.b_j}});
    }
  j["payoff"] = cells;
  Json nash = Json::array();
  for (std::size_t k = 0; k < a.report.nash_set.size(); ++k) {
    const auto& cell = a.report.nash_set[k];
    const auto& o = m.at(cell.row, cell.col);
    nash.push_back({{"i", row_name(sc, cell.row)},
                    {"j", col_name(sc, cell.col)},
                    {"desirable", static_cast<bool>(a.report.desirable_per_ne[k])},
                    {"aggregate_mbps", to_mbps(o.r_i + o.r_j)}});
  }
  j["nash"] = nash;
  j["unique"] = a.report.unique;
  j["spe_class"] = std::string(to_string(a.report.spe_class));
  const auto eff = stage_payoff(a.game, a.report.efficient_i, a.report.efficient_j);
  j["efficient"] = {{"i", strategy_name(sc, sc.nodes[0], a.report.efficient_i)},
                    {"j", strategy_name(sc, sc.nodes[1], a.report.efficient_j)},
                    {"aggregate_mbps", to_mbps(eff.r_i + eff.r_j)}};
  if (a.witness) {
    const auto& w = *a.witness;
    const auto& node = sc.nodes[w.player == Player::I ? 0 : 1];
    j["witness"] = {{"node", std::string(to_string(w.player))},
                    {"ne_strategy", strategy_name(sc, node, w.ne_strategy)},
                    {"forgone", strategy_name(sc, node, w.forgone)},
                    {"r_prac_ne_mbps", to_mbps(w.r_prac_ne)},
                    {"r_prac_forgone_mbps", to_mbps(w.r_prac_forgone)}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline std::string payoff_csv(const Scenario& sc, const Analysis& a) {
  const auto& m = a.report.matrix;
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"strategy_i", "strategy_j", "r_i_mbps", "r_j_mbps", "f_i", "f_j", "b_i", "b_j", "nash"});
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
      const auto& o = m.at(r, c);
      const bool ne = std::any_of(a.report.nash_set.begin(), a.report.nash_set.end(),
                                  [&](const Cell& x) { return x.row == r && x.col == c; });
      w.row({row_name(sc, r), col_name(sc, c), num(to_mbps(o.r_i)), num(to_mbps(o.r_j)), num(o.f_i),
             num(o.f_j), num(o.b_i), num(o.b_j), ne ? "1" : "0"});
    }
  return os.str();
}

inline int cmd_analyze(const std::string& path, const Options& opts, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load(path, opts);
    const auto& sc = l.scenario;
    const auto a = analyze_scenario(sc);
    const auto text = analysis_text(sc, a);
    write_file(output_path(sc, ".analysis.txt"), text);
    write_file(output_path(sc, ".analysis.json"), analysis_json(sc, a).dump(2) + "\n");
    write_file(output_path(sc, ".payoff.csv"), payoff_csv(sc, a));
    out << text;
  });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline std::string label_for(const Scenario& sc, const NodeDef& n, const std::string& generic) {
  for (const auto& name : n.strategies)
    if (describe(sc.strategy(name)) == generic) return name;
  return generic;
}

inline std::string timeseries_csv(const Scenario& sc, const SimReport& rep) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"time_s", "node", "throughput_mbps", "share", "loss_rate", "cw_min_eff", "strategy"});
  for (const auto& r : rep.series) {
    const auto& n = sc.nodes[r.node];
    w.row({num(r.time_s), n.name, num(r.throughput_mbps), num(r.share), num(r.loss_rate),
           num(r.cw_min_eff, 3), label_for(sc, n, r.strategy)});
  }
  return os.str();
}

inline std::string summary_csv(const Scenario& sc, const SimReport& rep) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"node", "strategy", "throughput_mbps", "share", "busy_share", "loss_rate", "channel_time_s", "txops",
         "frames_attempted", "frames_succeeded", "mean_frames_per_txop", "collisions", "cw_min_eff"});
  for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
    const auto& s = rep.nodes[i];
    w.row({s.name, label_for(sc, sc.nodes[i], s.strategy), num(to_mbps(s.throughput_bps)),
           num(s.share), num(s.busy_share), num(s.loss_rate), num(s.channel_time_s),
           std::to_string(s.txops),
           std::to_string(s.frames_attempted), std::to_string(s.frames_succeeded),
           num(s.mean_frames_per_txop, 4), std::to_string(s.collisions), num(s.cw_min_eff, 3)});
  }
  return os.str();
}

inline Json summary_json(const Scenario& sc, const SimReport& rep) {
  Json j;
  j["scenario"] = sc.name;
  j["discipline"] = std::string(to_string(sc.discipline));
  j["seed"] = sc.seed;
  j["duration_s"] = rep.duration_s;
  j["aggregate_throughput_mbps"] = to_mbps(rep.aggregate_throughput_bps);
  j["idle_time_s"] = rep.idle_time_s;
  j["collision_time_s"] = rep.collision_time_s;
  j["collision_events"] = rep.collision_events;
  Json nodes = Json::array();
  for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
    const auto& s = rep.nodes[i];
    nodes.push_back({{"name", s.name},
                     {"strategy", label_for(sc, sc.nodes[i], s.strategy)},
                     {"throughput_mbps", to_mbps(s.throughput_bps)},
                     {"share", s.share},
                     {"busy_share", s.busy_share},
                     {"loss_rate", s.loss_rate},
                     {"channel_time_s", s.channel_time_s},
                     {"txops", s.txops},
                     {"frames_attempted", s.frames_attempted},
                     {"frames_succeeded", s.frames_succeeded},
                     {"mean_frames_per_txop", s.mean_frames_per_txop},
                     {"collisions", s.collisions},
                     {"cw_min_eff", s.cw_min_eff}});
  }
  j["nodes"] = nodes;
  if (!rep.best_response_log.empty()) {
    Json log = Json::array();
    for (const auto& step : rep.best_response_log) {
      const auto& n = sc.nodes[step.node];
      Json measured = Json::object();
      for (const auto& [s, r] : step.measured_bps) measured[strategy_name(sc, n, s)] = to_mbps(r);
      log.push_back({{"epoch", step.epoch},
                     {"node", n.name},
                     {"measured_mbps", measured},
                     {"chosen", strategy_name(sc, n, step.chosen)},
                     {"switched", step.switched}});
    }
    j["best_response"] = {{"converged", rep.best_response_converged},
                          {"epochs", rep.best_response_epochs},
                          {"log", log}};
  }
  return j;
}

inline int cmd_simulate(const std::string& path, const Options& opts, std::ostream& out,
                        std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load(path, opts);
    const auto& sc = l.scenario;
    const auto sim = to_sim_scenario(sc);
    validate(sim);
    const auto rep = run_sim(sim);
    write_file(output_path(sc, ".timeseries.csv"), timeseries_csv(sc, rep));
    const auto summary = summary_csv(sc, rep);
    write_file(output_path(sc, ".summary.csv"), summary);
    write_file(output_path(sc, ".summary.json"), summary_json(sc, rep).dump(2) + "\n");
    out << summary;
  });
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  std::string node;
  std::string strategy;
  double throughput_mbps = NAN;
  double share = NAN;
  double loss_rate = NAN;
  std::string outcome;
};

struct SweepPoint {
  double x = NAN;
  double y = NAN;
  std::vector<SweepRow> rows;
};

inline std::vector<double> axis_values(const SweepAxis& a) {
  std::vector<double> v;
  for (int k = 0; k < a.steps; ++k)
    v.push_back(a.steps == 1 ? a.from : a.from + (a.to - a.from) * k / (a.steps - 1));
  return v;
}

inline std::vector<SweepRow> sweep_analyze(const Scenario& sc) {
  std::vector<SweepRow> rows;
  const auto a = analyze_scenario(sc);
  const std::string outcome(to_string(a.report.spe_class));
  for (std::size_t p = 0; p < 2; ++p) {
    SweepRow r{sc.nodes[p].name, "", NAN, NAN, NAN, outcome};
    if (a.report.unique) {
      const auto& cell = a.report.nash_set.front();
      const auto& o = a.report.matrix.at(cell.row, cell.col);
      const auto& s = p == 0 ? a.report.matrix.rows[cell.row] : a.report.matrix.cols[cell.col];
      const auto& table = p == 0 ? a.game.alpha_i : a.game.alpha_j;
      r.strategy = p == 0 ? row_name(sc, cell.row) : col_name(sc, cell.col);
      r.throughput_mbps = to_mbps(p == 0 ? o.r_i : o.r_j);
      r.share = p == 0 ? o.f_i : o.f_j;
      r.loss_rate = 1.0 - table.lookup(s);
    }
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<SweepRow> sweep_simulate(const Scenario& sc) {
  auto sim = to_sim_scenario(sc);
  validate(sim);
  const auto rep = run_sim(sim);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
    const auto& s = rep.nodes[i];
    rows.push_back({s.name, label_for(sc, sc.nodes[i], s.strategy), to_mbps(s.throughput_bps),
                    s.share, s.loss_rate, "sim"});
  }
  return rows;
}

// Each node alone on the channel, once per strategy in its set.
inline std::vector<SweepRow> sweep_solo(const Scenario& sc) {
  std::vector<SweepRow> rows;
  const auto full = to_sim_scenario(sc);
  for (std::size_t i = 0; i < full.nodes.size(); ++i) {
    for (const auto& name : sc.nodes[i].strategies) {
      SimScenario solo = full;
      SimNode node = full.nodes[i];
      node.policy = FixedPolicy{sc.strategy(name)};
      node.target_share = 0.0;
      solo.nodes = {node};
      validate(solo);
      const auto rep = run_sim(solo);
      const auto& s = rep.nodes.front();
      rows.push_back({s.name, name, to_mbps(s.throughput_bps), s.share, s.loss_rate, "solo"});
    }
  }
  return rows;
}

inline std::vector<SweepRow> invalid_rows(const Json& doc) {
  std::vector<SweepRow> rows;
  if (doc.contains("nodes") && doc["nodes"].is_array())
    for (const auto& n : doc["nodes"])
      rows.push_back({n.value("name", std::string()), "", NAN, NAN, NAN, "invalid"});
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  CsvWriter w(os);
  w.row({"point", "x", "y", "node", "strategy", "throughput_mbps", "share", "loss_rate", "outcome"});
  for (std::size_t k = 0; k < points.size(); ++k)
    for (const auto& r : points[k].rows)
      w.row({std::to_string(k), num(points[k].x), num(points[k].y), r.node, r.strategy,
             num(r.throughput_mbps), num(r.share), num(r.loss_rate), r.outcome});
  return os.str();
}

// Runs the grid; points are independent and may be computed in parallel.
// Rows come back ordered by grid index.
inline std::vector<SweepPoint> run_sweep(const Json& canonical, const std::vector<SweepAxis>& axes,
                                         const std::string& mode, unsigned threads = 0) {
  if (axes.empty() || axes.size() > 2) throw ValidationError("sweep needs one or two parameters");
  if (mode != "analyze" && mode != "simulate" && mode != "solo")
    throw ValidationError("sweep mode must be analyze, simulate or solo");

  std::vector<std::vector<Json::json_pointer>> targets;
  for (const auto& a : axes) {
    if (a.steps < 1) throw ValidationError("sweep steps must be >= 1");
    targets.push_back(resolve_sweep_path(canonical, a.path));
  }

  const auto xs = axis_values(axes[0]);
  const auto ys = axes.size() > 1 ? axis_values(axes[1]) : std::vector<double>{NAN};
  std::vector<SweepPoint> points(xs.size() * ys.size());
  for (std::size_t ix = 0; ix < xs.size(); ++ix)
    for (std::size_t iy = 0; iy < ys.size(); ++iy) {
      points[ix * ys.size() + iy].x = xs[ix];
      points[ix * ys.size() + iy].y = ys[iy];
    }

  auto evaluate = [&](std::size_t k) {
    Json doc = canonical;
    const double values[2] = {points[k].x, points[k].y};
    for (std::size_t a = 0; a < targets.size(); ++a)
      for (const auto& ptr : targets[a]) {
        if (doc[ptr].is_number_integer()) doc[ptr] = static_cast<std::int64_t>(std::llround(values[a]));
        else doc[ptr] = values[a];
      }
    Scenario sc;
    try {
      sc = scenario_from_json({doc, LineIndex{}}, "sweep point " + std::to_string(k));
    } catch (const DomainError&) {
      points[k].rows = invalid_rows(doc);
      return;
    } catch (const ValidationError&) {
      points[k].rows = invalid_rows(doc);
      return;
    }
    if (mode == "analyze") points[k].rows = sweep_analyze(sc);
    else if (mode == "simulate") points[k].rows = sweep_simulate(sc);
    else points[k].rows = sweep_solo(sc);
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, points.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k; (k = next.fetch_add(1)) < points.size();) evaluate(k);
      } catch (...) {
        errors[t] = std::current_exception();
        next = points.size();
      }
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return points;
}

inline int cmd_sweep(const std::string& path, const Options& opts, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const auto l = load(path, opts);
    const auto& sc = l.scenario;
    std::vector<SweepAxis> axes = opts.axes;
    if (axes.empty() && sc.sweep) axes = sc.sweep->axes;
    std::string mode = opts.sweep_mode.value_or(sc.sweep ? sc.sweep->mode : "analyze");
    const auto points = run_sweep(l.canonical, axes, mode, opts.threads);
    write_file(output_path(sc, ".sweep.csv"), sweep_csv(points));
    out << "sweep: " << points.size() << " points written to "
        << output_path(sc, ".sweep.csv").string() << '\n';
  });
}

}  // namespace macgame::cli
