// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "macgame/cli.hpp"
#include "../support/fixtures.hpp"

using namespace macgame;
namespace fs = std::filesystem;

namespace {

const std::string kDir = MACGAME_SCENARIO_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Scenario load(const std::string& name) {
  const auto path = kDir + "/" + name + ".json";
  return parse_scenario(read_text_file(path), path);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Checks a 2x2 matrix (Mbps) against reference pairs in row-major order.
void check_table(Verdict& v, const PayoffMatrix& m, const double (&ref)[4][2], double tol) {
  double worst = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& o = m.at(k / 2, k % 2);
    worst = std::max({worst, std::abs(to_mbps(o.r_i) - ref[k][0]), std::abs(to_mbps(o.r_j) - ref[k][1])});
  }
  v.require(worst <= tol, "table entries");
  v.note(fmt("max table error %.4f Mbps", worst));
}

bool single_ne(const EquilibriumReport& rep, const Strategy& i, const Strategy& j) {
  return rep.nash_set.size() == 1 && rep.matrix.rows[rep.nash_set[0].row] == i &&
         rep.matrix.cols[rep.nash_set[0].col] == j;
}

Verdict criterion1() {
  Verdict v;
  const auto g = to_stage_game(load("theorem1"));
  const auto rep = classify_equilibria(g);
  const double ref[4][2] = {{0.96, 1.6}, {0.63, 1.07}, {1.02, 1.06}, {0.76, 0.8}};
  check_table(v, rep.matrix, ref, 0.02);
  v.require(single_ne(rep, fixtures::kG2, fixtures::kG1), "NE set == {(g2, g1)}");
  v.require(rep.spe_class == SpeClass::UniqueUndesirable, "unique-undesirable");
  const auto ne = stage_payoff(g, fixtures::kG2, fixtures::kG1);
  const auto eff = stage_payoff(g, fixtures::kG1, fixtures::kG1);
  const double agg_ne = to_mbps(ne.r_i + ne.r_j), agg_eff = to_mbps(eff.r_i + eff.r_j);
  v.require(near(agg_ne, 2.08, 0.03), "NE aggregate 2.08");
  // The efficient profile's pair is (0.96, 1.6); its sum is 2.56.
  v.require(near(agg_eff, 0.96 + 1.6, 0.03), "efficient aggregate 0.96 + 1.6");
  v.require(agg_eff > agg_ne, "efficient above NE");
  v.note(fmt("aggregate NE %.4f vs efficient %.4f Mbps", agg_ne, agg_eff));
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto phy = fixtures::two_rate_phy();
  const double b1 = expected_burst(fixtures::kG1, 0.6, phy, BurstPolicy::Bfl);
  const double b2 = expected_burst(fixtures::kG2, 0.95, phy, BurstPolicy::Bfl);
  v.require(max_burst_frames(fixtures::kG1, phy) == 4 && max_burst_frames(fixtures::kG2, phy) == 2, "n = 4 / 2");
  v.require(near(b1, 2.18, 0.005), "burst(0.6, 4) = 2.18");
  v.require(near(b2, 1.95, 0.005), "burst(0.95, 2) = 1.95");
  v.note(fmt("bursts %.4f, %.4f", b1, b2));
  const auto rep = classify_equilibria(to_stage_game(load("theorem2")));
  const double ref[4][2] = {{0.68, 2.07}, {0.68, 1.04}, {0.75, 1.62}, {0.75, 0.81}};
  check_table(v, rep.matrix, ref, 0.02);
  v.require(single_ne(rep, fixtures::kG2, fixtures::kG1), "NE set == {(g2, g1)}");
  v.require(rep.spe_class == SpeClass::UniqueUndesirable, "unique-undesirable");
  return v;
}

Verdict criterion3() {
  Verdict v;
  Rng rng(derive_seed(2024, "acceptance-3"));
  int undesirable_fair = 0, ne_fair = 0, dcf_undesirable = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto base = fixtures::random_game(rng, Discipline::EdcfBeb);
    for (auto d : {Discipline::EdcfBeb, Discipline::TimeFair}) {
      auto g = base;
      g.discipline = d;
      const auto rep = classify_equilibria(g);
      for (bool ok : rep.desirable_per_ne) {
        ++ne_fair;
        undesirable_fair += !ok;
      }
    }
    auto g = base;
    g.discipline = Discipline::Dcf;
    dcf_undesirable += classify_equilibria(g).spe_class == SpeClass::UniqueUndesirable;
  }
  v.require(undesirable_fair == 0, "no undesirable NE under EDCF_BEB / TIME_FAIR");
  v.require(dcf_undesirable >= 1, "some undesirable unique NE under DCF");
  v.note(fmt("%.0f undesirable of %.0f NEs under BEB/TIME_FAIR; %.0f unique-undesirable DCF games",
             undesirable_fair, ne_fair, dcf_undesirable));
  return v;
}

Verdict criterion4() {
  Verdict v;
  Rng rng(derive_seed(2024, "acceptance-4"));
  int claims = 0, claim_fail = 0, unique_checked = 0, unique_fail = 0, witness_fail = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto g = fixtures::random_dcf_game(rng);
    for (const auto& a : g.strategies_i)
      for (const auto& b : g.strategies_i) {
        if (a.payload_bits != b.payload_bits || !(a.rate_bps > b.rate_bps)) continue;
        for (const auto& opp : g.strategies_j) {
          ++claims;
          claim_fail += !check_claim_monotonicity(g, a, b, opp).holds();
        }
      }
    const auto rep = classify_equilibria(g);
    for (const auto& gj : g.strategies_j) {
      if (!check_dominant_strategy(g, Player::J, gj)) continue;
      for (const auto& gi : g.strategies_i) {
        ++unique_checked;
        unique_fail += check_unique_ne_condition(g, gi, gj).holds != single_ne(rep, gi, gj);
      }
    }
    witness_fail += undesirability_witness(g).has_value() != (rep.spe_class == SpeClass::UniqueUndesirable);
  }
  v.require(claims > 0 && claim_fail == 0, "monotonicity claims");
  v.require(unique_checked > 0 && unique_fail == 0, "unique-NE condition vs enumeration");
  v.require(witness_fail == 0, "witness vs classification");
  v.note(fmt("%.0f claim instances, %.0f unique-NE comparisons, ", claims, unique_checked) +
         fmt("%.0f witness mismatches", witness_fail));
  return v;
}

Verdict criterion5() {
  Verdict v;
  const auto sc = load("theorem1_sim");
  const auto rep = run_sim(to_sim_scenario(sc));
  v.require(rep.duration_s >= 60.0, ">= 60 s simulated");
  auto g = to_stage_game(sc);
  const double rounds = (rep.nodes[0].txops + rep.nodes[1].txops) / 2.0;
  g.t_idle_s = (rep.idle_time_s + rep.collision_time_s) / rounds;
  const auto o = stage_payoff(g, fixtures::kG2, fixtures::kG1);
  const double ei = rep.nodes[0].throughput_bps / o.r_i - 1.0;
  const double ej = rep.nodes[1].throughput_bps / o.r_j - 1.0;
  v.require(std::abs(ei) <= 0.10 && std::abs(ej) <= 0.10, "within 10% of analytic");
  v.note(fmt("sim/analytic - 1: i %+.3f, j %+.3f (t_idle %.3f ms)", ei, ej, g.t_idle_s * 1e3));

  auto control = to_sim_scenario(sc);
  control.nodes[0] = control.nodes[1];
  control.nodes[0].name = "i";
  const auto c = run_sim(control);
  const double split = static_cast<double>(c.nodes[0].txops) / static_cast<double>(c.nodes[0].txops + c.nodes[1].txops);
  v.require(near(split, 0.5, 0.02), "equal-alpha TXOP split");
  v.note(fmt("control TXOP split %.4f", split));
  return v;
}

Verdict criterion6() {
  Verdict v;
  SimScenario sc;
  sc.phy = fixtures::two_rate_phy();
  sc.discipline = Discipline::EdcfBfl;
  sc.duration_s = 1600.0;
  sc.report_interval_s = 100.0;
  sc.seed = 6;
  sc.nodes = {{"i", BernoulliChannel{AlphaTable{{fixtures::kG1, 0.6}}, 1}, FixedPolicy{fixtures::kG1},
               {fixtures::kG1}, 0.0}};
  const auto rep = run_sim(sc);
  const auto& n = rep.nodes[0];
  v.require(n.txops >= 100000, "10^5 TXOPs");
  v.require(near(n.mean_frames_per_txop, 2.18, 0.02), "mean burst 2.18");
  v.note(fmt("%.0f TXOPs, mean %.4f frames", static_cast<double>(n.txops), n.mean_frames_per_txop));
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto base = load("dcfstar");
  auto fixed = [&](Discipline d, const std::string& si, const std::string& sj) {
    auto sc = base;
    sc.discipline = d;
    sc.nodes[0].policy = sc.nodes[1].policy = PolicyKind::Fixed;
    sc.nodes[0].policy_strategy = si;
    sc.nodes[1].policy_strategy = sj;
    return run_sim(to_sim_scenario(sc));
  };
  const double fair_a = fixed(Discipline::TimeFair, "g2", "g1").nodes[0].share;
  const double fair_b = fixed(Discipline::TimeFair, "g1", "g1").nodes[0].share;
  const double dcf_a = fixed(Discipline::Dcf, "g2", "g1").nodes[0].share;
  const double dcf_b = fixed(Discipline::Dcf, "g1", "g1").nodes[0].share;
  v.require(std::abs(fair_a - fair_b) < 0.05, "(a) DCF* share moves < 0.05");
  v.require(std::abs(dcf_a - dcf_b) > 0.10, "(a) DCF share moves > 0.10");
  v.note(fmt("(a) share shift DCF* %.4f, DCF %.4f", std::abs(fair_a - fair_b), std::abs(dcf_a - dcf_b)));

  const auto fair = run_sim(to_sim_scenario(base));
  const auto fair_game = to_stage_game(base);
  v.require(fair.best_response_converged, "(b) DCF* best response converges");
  v.require(fair.nodes[0].final_strategy == most_efficient_strategy(fair_game.strategies_i, fair_game.alpha_i, fair_game.phy) &&
                fair.nodes[1].final_strategy == most_efficient_strategy(fair_game.strategies_j, fair_game.alpha_j, fair_game.phy),
            "(b) DCF* fixed point is most efficient");
  for (const auto& n : fair.nodes) v.require(near(n.busy_share, 0.5, 0.05), "DCF* share within 0.05 of 0.5");

  const auto dcf_sc = load("best_response_dcf");
  const auto dcf = run_sim(to_sim_scenario(dcf_sc));
  const auto dcf_rep = classify_equilibria(to_stage_game(dcf_sc));
  v.require(dcf.best_response_converged, "(b) DCF best response converges");
  v.require(dcf_rep.unique && dcf.nodes[0].final_strategy == dcf_rep.matrix.rows[dcf_rep.nash_set[0].row] &&
                dcf.nodes[1].final_strategy == dcf_rep.matrix.cols[dcf_rep.nash_set[0].col],
            "(b) DCF fixed point is the analytic NE");

  const double gain = fair.aggregate_throughput_bps / dcf.aggregate_throughput_bps - 1.0;
  v.require(gain > 0.0, "(c) DCF* aggregate above DCF");
  v.note(fmt("(b) converged in %.0f / %.0f epochs", static_cast<double>(fair.best_response_epochs),
             static_cast<double>(dcf.best_response_epochs)));
  v.note(fmt("(c) aggregate DCF* %.4f vs DCF %.4f Mbps (%+.1f%%)", to_mbps(fair.aggregate_throughput_bps),
             to_mbps(dcf.aggregate_throughput_bps), 100.0 * gain));
  return v;
}

Verdict criterion8() {
  Verdict v;
  const auto sc = load("crossover_sweep");
  const auto canonical = scenario_to_json(sc);
  const auto points = cli::run_sweep(canonical, sc.sweep->axes, sc.sweep->mode);
  std::optional<double> crossover;
  bool fast_wins_near = false;
  for (const auto& p : points) {
    double r55 = NAN, r11 = NAN;
    for (const auto& r : p.rows) {
      if (r.strategy == "r5_5") r55 = r.throughput_mbps;
      if (r.strategy == "r11") r11 = r.throughput_mbps;
    }
    if (&p == &points.front()) fast_wins_near = r11 > r55;
    if (!crossover && r55 > r11) crossover = p.x;
  }
  v.require(fast_wins_near, "11 Mbps ahead at the nearest distance");
  v.require(crossover.has_value(), "finite cross-over distance");
  if (crossover) v.note(fmt("5.5 Mbps overtakes 11 Mbps at %.1f m", *crossover));
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion9() {
  Verdict v;
  const auto root = fs::temp_directory_path() / "macgame_acceptance_determinism";
  fs::remove_all(root);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(kDir)) {
    if (entry.path().extension() != ".json") continue;
    const auto sc = parse_scenario(read_text_file(entry.path().string()), entry.path().string());
    for (const char* run : {"a", "b"}) {
      cli::Options o;
      o.out_dir = (root / run).string();
      std::ostringstream out, err;
      int rc = 0;
      if (sc.nodes.size() == 2) rc |= cli::cmd_analyze(entry.path().string(), o, out, err);
      rc |= cli::cmd_simulate(entry.path().string(), o, out, err);
      if (sc.sweep) rc |= cli::cmd_sweep(entry.path().string(), o, out, err);
      v.require(rc == 0, entry.path().filename().string() + " runs: " + err.str());
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    v.require(slurp(entry.path()) == slurp(root / "b" / entry.path().filename()),
              entry.path().filename().string() + " identical");
  }
  v.require(files > 0, "CSV outputs produced");
  v.note(fmt("%.0f CSV files compared", files));
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "DCF payoff table and equilibrium", 1.0, criterion1},
      {2, "EDCF-BFL bursts, payoff table and equilibrium", 1.0, criterion2},
      {3, "BEB/TIME_FAIR equilibria always desirable", 10.0, criterion3},
      {4, "condition checkers agree with enumeration", 10.0, criterion4},
      {5, "simulator matches analytic payoffs", 30.0, criterion5},
      {6, "BFL burst statistics", 10.0, criterion6},
      {7, "DCF* share invariance, best response, efficiency", 120.0, criterion7},
      {8, "rate cross-over distance exists", 30.0, criterion8},
      {9, "byte-identical outputs per seed", 120.0, criterion9},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.require(secs <= c.budget_s, fmt("runtime budget %.0f s", c.budget_s));
    failed += !v.pass;
    std::printf("[%s] %d %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, secs, v.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
