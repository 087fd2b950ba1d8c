// spad: run episodes, compare schemes, build hotboot caches and solve single games.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spad/spad.hpp"

namespace fs = std::filesystem;
using namespace spad;

namespace {

constexpr int kUsageError = 2;

struct Manifest {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string scheme;
  std::optional<int> slots;
  std::string cache_path;
  int reps = 3;
  std::string out_dir = "out";
  int game_slots = 4000;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("spad");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SPAD_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("unknown SPAD_LOG level '{}', keeping info", env);
    else
      spdlog::set_level(level);
  }
}

ScenarioConfig load_scenario(const Manifest& m) {
  ScenarioConfig cfg = m.config_path.empty() ? ScenarioConfig{} : load_config_file(m.config_path);
  if (m.seed) cfg.rng_seed = *m.seed;
  if (!m.scheme.empty()) cfg.scheme = parse_scheme(m.scheme);
  if (m.slots) cfg.num_time_slots = *m.slots;
  if (auto v = validate_config(cfg); !v.empty()) {
    std::string msg = "invalid config:";
    for (const auto& x : v) msg += " " + x.field + " (" + x.message + ")";
    throw ConfigError(msg);
  }
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
  spdlog::info("wrote {}", path.string());
}

HotbootCache load_cache(const std::string& path, const DynamicGameConfig& game) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CacheError("cannot open cache file: " + path);
  return read_cache(in, game.grid, game.subscriber, game.publisher);
}

void write_game_trace(const fs::path& path, const DynamicGameConfig& game,
                      const std::optional<HotbootCache>& cache, std::uint64_t slots,
                      std::uint64_t seed, bool baselines) {
  auto os = open_output(path);
  write_trace_header(os);
  const HotbootCache boot = cache ? *cache : hotboot(game, 5, slots, seed);
  Rng phc_rng(seed);
  write_trace_rows(os, run_dynamic_game(game, boot, slots, phc_rng), "PHC");
  if (baselines) {
    Rng ql_rng(seed), greedy_rng(seed), fp_rng(seed);
    write_trace_rows(os, qlearning_baseline(game, slots, ql_rng), "QLEARN");
    write_trace_rows(os, greedy_baseline(game, slots, greedy_rng), "GREEDY");
    write_trace_rows(os, fixed_price_baseline(game, slots, fp_rng), "FP");
  }
  finish(os, path);
}

int cmd_run(const Manifest& m) {
  const auto cfg = load_scenario(m);
  const World world = generate_scenario(cfg);
  spdlog::info("scenario: {} vehicles in {} fleets, {} slots, scheme {}", world.vehicles.size(),
               world.fleets.size(), cfg.num_time_slots, to_string(cfg.scheme));
  const auto result = run_episode(world, make_scheme_config(cfg.scheme, world));
  const fs::path out(m.out_dir);

  auto slots_path = out / "slots.csv";
  auto slots = open_output(slots_path);
  write_slot_header(slots);
  write_slot_rows(slots, result.slots);
  finish(slots, slots_path);

  auto metrics_path = out / "metrics.csv";
  auto metrics = open_output(metrics_path);
  write_metrics_header(metrics);
  write_metrics_row(metrics, {cfg.scheme, 0, cfg.rng_seed, result.metrics});
  finish(metrics, metrics_path);

  if (!m.cache_path.empty()) {
    const auto game = reference_game();
    const auto cache = load_cache(m.cache_path, game);
    spdlog::info("loaded cache with {} experiments", cache.experiments);
    write_game_trace(out / "game_trace.csv", game, cache, static_cast<std::uint64_t>(m.game_slots),
                     static_cast<std::uint64_t>(cfg.rng_seed), false);
  }
  spdlog::info("secure pub/sub ratio {:.4f}", result.metrics.secure_pubsub_ratio);
  return 0;
}

// Static-game sweeps behind the payment, quality and fixed-price figures.
void write_static_sweep(const fs::path& path) {
  auto os = open_output(path);
  os << "sweep,x,curve,p1,q1,U_group,U_publisher\n";
  constexpr std::uint32_t kCatalog = 10;
  GameInstance base;
  base.group = {2, 0};
  base.econ.satisfaction_coeff = 28;
  base.econ.raw_cost_param = 0.4;
  base.caps = {0.75, 0.6};
  base.reputation = 0.8;
  struct Curve {
    const char* name;
    std::uint32_t rank;
    double reputation;
  };
  for (const Curve c : {Curve{"tau1_R0.8", 1, 0.8}, Curve{"tau3_R0.6", 3, 0.6}}) {
    for (int k = 0; k <= 32; ++k) {
      GameInstance g = base;
      g.popularity = zipf_popularity(c.rank, {0.9, kCatalog});
      g.reputation = c.reputation;
      g.econ.raw_cost_param = 0.4 + 0.05 * k;
      const auto e = solve_se(g);
      os << "cost," << g.econ.raw_cost_param << ',' << c.name << ',' << e.price.raw << ','
         << e.qocs.raw << ',' << leader_utility(g, e.price, e.qocs) << ','
         << follower_utility(g, e.price, e.qocs) << '\n';
    }
  }
  for (int alpha = 25; alpha <= 45; ++alpha) {
    GameInstance g = base;
    g.econ.satisfaction_coeff = alpha;
    g.econ.raw_cost_param = 2.0;
    const auto se = solve_se(g);
    const auto fp = fixed_price_outcome(g, {1.2, 1.2});
    for (const auto& [name, e] : {std::pair{"SPAD", se}, std::pair{"FP", fp}}) {
      os << "satisfaction," << alpha << ',' << name << ',' << e.price.raw << ',' << e.qocs.raw
         << ',' << leader_utility(g, e.price, e.qocs) << ',' << follower_utility(g, e.price, e.qocs)
         << '\n';
    }
  }
  finish(os, path);
}

const char* kPlotScript = R"(#!/usr/bin/env python3
# Figures from the CSVs written by `spad compare`. Usage: python3 plot.py [DIR]
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

d = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent)

fig, ax = plt.subplots()
for scheme in ("SPAD", "BIT"):
    s = pd.read_csv(d / f"slots_{scheme}.csv")
    for col, style in (("rep_legitimate", "-"), ("rep_speculative", "--"), ("rep_malicious", ":")):
        ax.plot(s["slot"], s[col], style, label=f"{scheme} {col[4:]}")
ax.set_xlabel("time slot"); ax.set_ylabel("average reputation"); ax.legend()
fig.savefig(d / "reputation.png")

cmp = pd.read_csv(d / "comparison.csv")
means = cmp.groupby("scheme", sort=False).mean(numeric_only=True)
for col, name in (("secure_pubsub_ratio", "secure_ratio"), ("avg_group_utility", "group_utility"),
                  ("avg_publisher_utility", "publisher_utility")):
    fig, ax = plt.subplots()
    means[col].plot.bar(ax=ax)
    ax.set_ylabel(col)
    fig.savefig(d / f"{name}.png")

sweep = pd.read_csv(d / "static_sweep.csv")
cost = sweep[sweep["sweep"] == "cost"]
for col in ("p1", "q1"):
    fig, ax = plt.subplots()
    for curve, g in cost.groupby("curve"):
        ax.plot(g["x"], g[col], marker="o", label=curve)
    ax.set_xlabel("raw cost parameter"); ax.set_ylabel(col); ax.legend()
    fig.savefig(d / f"static_{col}.png")
sat = sweep[sweep["sweep"] == "satisfaction"]
for col in ("U_group", "U_publisher"):
    fig, ax = plt.subplots()
    for curve, g in sat.groupby("curve"):
        ax.plot(g["x"], g[col], marker="o", label=curve)
    ax.set_xlabel("satisfaction parameter"); ax.set_ylabel(col); ax.legend()
    fig.savefig(d / f"fixed_price_{col}.png")

trace = pd.read_csv(d / "learning_trace.csv")
for col in ("p1", "q1", "U_group", "U_publisher"):
    fig, ax = plt.subplots()
    for scheme, g in trace.groupby("scheme", sort=False):
        ax.plot(g["slot"], g[col].rolling(100, min_periods=1).mean(), label=scheme)
    ax.set_xlabel("time slot"); ax.set_ylabel(col); ax.legend()
    fig.savefig(d / f"learning_{col}.png")
)";

int cmd_compare(const Manifest& m) {
  const auto cfg = load_scenario(m);
  const fs::path out(m.out_dir);
  spdlog::info("comparing {} schemes over {} repetitions", kAllSchemes.size(), m.reps);
  const auto rows = compare_schemes(cfg, kAllSchemes, m.reps);

  auto cmp_path = out / "comparison.csv";
  auto cmp = open_output(cmp_path);
  write_metrics_header(cmp);
  for (const auto& r : rows) write_metrics_row(cmp, r);
  finish(cmp, cmp_path);

  const World world = generate_scenario(cfg);
  for (auto s : kAllSchemes) {
    const auto result = run_episode(world, make_scheme_config(s, world));
    const auto path = out / ("slots_" + std::string(to_string(s)) + ".csv");
    auto os = open_output(path);
    write_slot_header(os);
    write_slot_rows(os, result.slots);
    finish(os, path);
  }

  write_static_sweep(out / "static_sweep.csv");

  const auto game = reference_game();
  std::optional<HotbootCache> cache;
  if (!m.cache_path.empty()) cache = load_cache(m.cache_path, game);
  write_game_trace(out / "learning_trace.csv", game, cache, static_cast<std::uint64_t>(m.game_slots),
                   static_cast<std::uint64_t>(cfg.rng_seed), true);

  const auto plot_path = out / "plot.py";
  auto plot = open_output(plot_path);
  plot << kPlotScript;
  finish(plot, plot_path);
  return 0;
}

int cmd_hotboot(const Manifest& m, int experiments) {
  if (m.cache_path.empty()) throw CLI::ValidationError("--cache", "hotboot needs --cache PATH");
  const auto game = reference_game();
  const auto slots = static_cast<std::uint64_t>(m.slots.value_or(4000));
  const auto seed = static_cast<std::uint64_t>(m.seed.value_or(1));
  spdlog::info("hotbooting: {} experiments of {} slots", experiments, slots);
  const auto cache = hotboot(game, static_cast<std::uint32_t>(experiments), slots, seed);
  const fs::path path(m.cache_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_cache(os, cache);
  finish(os, path);
  return 0;
}

struct SolveOptions {
  std::vector<int> subscribers;
  std::optional<double> satisfaction;
  std::vector<double> cost{0.4, 0.4};
  std::vector<double> caps{0.75, 0.6};
  double popularity = 1.0;
  double reputation = 0.8;
  bool random = false;
  bool verify = false;
  int grid = 1000;
};

int cmd_solve_se(const Manifest& m, const SolveOptions& o) {
  GameInstance g;
  if (o.random) {
    Rng rng(static_cast<std::uint64_t>(m.seed.value_or(1)));
    g.group = {1 + static_cast<int>(rng.below(10)), 1 + static_cast<int>(rng.below(10))};
    g.econ.satisfaction_coeff = rng.uniform(25, 45);
    g.econ.raw_cost_param = rng.uniform(0.4, 2.0);
    g.econ.result_cost_param = rng.uniform(0.4, 2.0);
    g.caps = {rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)};
    g.popularity = zipf_popularity(static_cast<std::uint32_t>(1 + rng.below(10)), {0.9, 10});
    g.reputation = rng.uniform(0.45, 1.0);
  } else {
    if (o.subscribers.empty() || !o.satisfaction)
      throw CLI::RequiredError("--subscribers and --satisfaction (or --random)");
    g.group = {o.subscribers[0], o.subscribers[1]};
    g.econ.satisfaction_coeff = *o.satisfaction;
    g.econ.raw_cost_param = o.cost[0];
    g.econ.result_cost_param = o.cost[1];
    g.caps = {o.caps[0], o.caps[1]};
    g.popularity = o.popularity;
    g.reputation = o.reputation;
  }
  const auto e = solve_se(g);
  std::cout << "instance: J=(" << g.group.raw << "," << g.group.result
            << ") alpha=" << g.econ.satisfaction_coeff << " eps=(" << g.econ.raw_cost_param << ","
            << g.econ.result_cost_param << ") caps=(" << g.caps.sensing << "," << g.caps.processing
            << ") f=" << g.popularity << " R=" << g.reputation << "\n";
  const char* part_names[2] = {"raw", "result"};
  for (int u = 0; u < 2; ++u) {
    std::cout << part_names[u] << ": p*=" << e.price[u] << " q*=" << e.qocs[u]
              << " case=" << to_string(e.cases[u]);
    if (g.group[u] > 0) std::cout << " psi=" << detail::case_indicator(g, u);
    std::cout << "\n";
  }
  std::cout << "group utility " << leader_utility(g, e.price, e.qocs) << ", publisher utility "
            << follower_utility(g, e.price, e.qocs) << "\n";
  if (o.verify) {
    const auto bf = solve_brute_force(g, o.grid);
    const double p_cell = g.econ.price_cap / o.grid, q_cell = 1.0 / o.grid;
    for (int u = 0; u < 2; ++u) {
      std::cout << "oracle " << part_names[u] << ": p=" << bf.price[u] << " q=" << bf.qocs[u]
                << " gap " << std::abs(bf.price[u] - e.price[u]) / p_cell << " p-cells, "
                << std::abs(bf.qocs[u] - e.qocs[u]) / q_cell << " q-cells\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Secure pub/sub simulation for autonomous-vehicle fleets"};
  app.require_subcommand(1);
  Manifest m;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", m.config_path, "scenario file (key = value lines)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", m.seed, "root random seed");
    sub->add_option("--slots", m.slots, "number of time slots")->check(CLI::PositiveNumber);
    sub->add_option("--out", m.out_dir, "output directory");
  };

  auto* run = app.add_subcommand("run", "run one episode and write slot and metric CSVs");
  add_common(run);
  run->add_option("--scheme", m.scheme, "SPAD, BIT, SWR, QLEARN, GREEDY or FP");
  run->add_option("--cache", m.cache_path, "hotboot cache; also writes a learning trace");
  run->add_option("--game-slots", m.game_slots, "slots of the learning trace")
      ->check(CLI::PositiveNumber);

  auto* compare = app.add_subcommand("compare", "compare all schemes and write a plot script");
  add_common(compare);
  compare->add_option("--reps", m.reps, "repetitions (seeds seed..seed+reps-1)")
      ->check(CLI::PositiveNumber);
  compare->add_option("--cache", m.cache_path, "hotboot cache for the learning trace");
  compare->add_option("--game-slots", m.game_slots, "slots of the learning trace")
      ->check(CLI::PositiveNumber);

  int experiments = 5;
  auto* boot = app.add_subcommand("hotboot", "build a hotboot cache from perturbed experiments");
  boot->add_option("--cache", m.cache_path, "output cache file")->required();
  boot->add_option("--reps", experiments, "number of experiments")->check(CLI::NonNegativeNumber);
  boot->add_option("--slots", m.slots, "slots per experiment")->check(CLI::PositiveNumber);
  boot->add_option("--seed", m.seed, "random seed");

  SolveOptions so;
  auto* solve = app.add_subcommand("solve-se", "solve one static game");
  solve->add_option("--subscribers", so.subscribers, "raw and result group sizes")
      ->expected(2);
  solve->add_option("--satisfaction", so.satisfaction, "satisfaction coefficient alpha");
  solve->add_option("--cost", so.cost, "raw and result cost parameters")->expected(2);
  solve->add_option("--caps", so.caps, "sensing and processing capacities")->expected(2);
  solve->add_option("--popularity", so.popularity, "content popularity f");
  solve->add_option("--reputation", so.reputation, "publisher reputation R");
  solve->add_flag("--random", so.random, "draw a random instance from --seed");
  solve->add_option("--seed", m.seed, "seed for --random");
  solve->add_flag("--verify", so.verify, "also run the brute-force oracle");
  solve->add_option("--grid", so.grid, "oracle grid points per axis")->check(CLI::Range(100, 100000));

  try {
    app.parse(argc, argv);
    if (*run) return cmd_run(m);
    if (*compare) return cmd_compare(m);
    if (*boot) return cmd_hotboot(m, experiments);
    return cmd_solve_se(m, so);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
