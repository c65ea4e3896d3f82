#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nxplay/layout.hpp"
#include "nxplay/policy.hpp"
#include "nxplay/random.hpp"

namespace nxplay {

enum class Tier : std::uint8_t { Low, Medium, High };

std::string_view to_string(Tier tier);

struct Checkpoint {
  std::string id;
  PolicyParams params;
  std::string run_id;
  int training_episodes = 0;
  double eval_reward = 0.0;  // mean collective self-play reward, shaping off
  std::optional<Tier> tier;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

struct Population {
  std::vector<Checkpoint> checkpoints;
  std::string layout_name;
  int num_agents = 0;
  std::uint64_t seed = 0;
  // Root seed of the collaborator population the checkpoints were trained
  // against, if any. Lets evaluation refuse to reuse that population.
  std::optional<std::uint64_t> partner_seed;

  friend bool operator==(const Population&, const Population&) = default;
};

// Sorts by (eval_reward, id), then labels three contiguous groups Low, Medium
// and High. Remainders go to the lower tiers first (13 -> 5/4/4).
std::vector<Checkpoint> assign_tiers(std::vector<Checkpoint> checkpoints);

enum class SamplingMode : std::uint8_t { Uniform, Stratified };

// X independent draws with replacement, returned as indices into
// pop.checkpoints. Stratified draws a tier uniformly, then a member of it.
std::vector<std::size_t> sample_collaborators(const Population& pop, int count, Rng& rng,
                                              SamplingMode mode = SamplingMode::Uniform);

// <dir>/manifest.txt plus <dir>/weights/<id>.txt for every checkpoint.
void save_population(const Population& pop, const std::string& directory);
Population load_population(const std::string& directory);

// Weights digest over every checkpoint; changes iff any parameter changes.
std::uint64_t population_weights_digest(const Population& pop);

struct SelfPlayTrainConfig {
  int episodes = 2000;
  int horizon = 400;
  double lr = 0.01;
  double gamma = 0.99;
  bool shaping = true;
  int batch_episodes = 1;
};

struct BuildOptions {
  int threads = 1;
};

// Partner population: num_runs independent self-play trainings, each
// snapshotted at checkpoints_per_run evenly spaced points (first and last
// included), scored over eval_episodes self-play episodes, then tiered.
Population build_population(const Layout& layout, int num_runs, int checkpoints_per_run,
                            const SelfPlayTrainConfig& train, int eval_episodes, std::uint64_t seed,
                            const BuildOptions& options = {});

// Population of scripted stand-ins: `size` checkpoints whose scripts are drawn
// from `scripts` under `seed`, each scored like a trained checkpoint.
Population build_scripted_population(const Layout& layout, const std::vector<ScriptedName>& scripts, int size,
                                     int eval_episodes, int horizon, std::uint64_t seed);

}  // namespace nxplay
