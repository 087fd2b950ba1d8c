// Runs the sample scenario under SPAD, BIT and SWR and prints how reputations
// and the secure delivery ratio evolve.

#include <cstdio>
#include <string>

#include "spad/spad.hpp"

using namespace spad;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "demos/highway.cfg";
  const ScenarioConfig cfg = load_config_file(path);
  const World world = generate_scenario(cfg);
  std::printf("%zu vehicles in %zu fleets (%zu malicious, %zu speculative)\n",
              world.vehicles.size(), world.fleets.size(), world.count(BehaviorProfile::kMalicious),
              world.count(BehaviorProfile::kSpeculative));

  for (auto scheme : {Scheme::kSpad, Scheme::kBit, Scheme::kSwr}) {
    const auto r = run_episode(world, make_scheme_config(scheme, world));
    std::printf("\n%s: secure pub/sub ratio %.4f\n", std::string(to_string(scheme)).c_str(),
                r.metrics.secure_pubsub_ratio);
    std::printf("  slot  legitimate  speculative  malicious  deliveries\n");
    const std::size_t step = std::max<std::size_t>(1, r.slots.size() / 6);
    for (std::size_t t = 0; t < r.slots.size(); t += step) {
      const auto& s = r.slots[t];
      std::printf("  %4llu  %10.3f  %11.3f  %9.3f  %10llu\n",
                  static_cast<unsigned long long>(s.slot), s.avg_reputation[0], s.avg_reputation[1],
                  s.avg_reputation[2], static_cast<unsigned long long>(s.deliveries));
    }
  }

  // One static game: two raw-data subscribers, satisfaction 28.
  GameInstance g;
  g.group = {2, 0};
  g.econ.satisfaction_coeff = 28;
  g.econ.raw_cost_param = 0.4;
  g.caps = {0.75, 0.6};
  g.reputation = 0.8;
  const auto e = solve_se(g);
  std::printf("\nstatic game: p*=%.3f q*=%.3f (%s)\n", e.price.raw, e.qocs.raw,
              std::string(to_string(e.cases[0])).c_str());
  return 0;
}
