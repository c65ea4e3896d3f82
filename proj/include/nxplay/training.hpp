#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nxplay/engine.hpp"
#include "nxplay/layout.hpp"
#include "nxplay/policy.hpp"
#include "nxplay/population.hpp"

namespace nxplay {

class ReplayWriter;

struct EgoTrainConfig {
  std::string layout_name;
  int num_agents = 2;         // N
  int num_collaborators = 0;  // X; 0 is self-play
  int total_episodes = 1000;
  int horizon = 400;
  double lr = 0.01;
  double gamma = 0.99;
  std::uint64_t seed = 0;
  std::string population_path;  // required iff X > 0 (when no population is passed in)
  int checkpoints_to_save = 3;
  bool shaping = false;
  int batch_episodes = 1;  // episodes rolled out per parameter update
  SamplingMode sampling = SamplingMode::Uniform;
  int threads = 1;
};

// Throws InvalidConfig / PopulationRequired on a bad config.
void validate(const EgoTrainConfig& cfg, const Population* pop);

struct Seat {
  bool ego = true;
  std::size_t checkpoint = 0;  // index into the population, collaborators only
  friend bool operator==(const Seat&, const Seat&) = default;
};

struct SeatAssignment {
  std::vector<Seat> seats;
  int ego_count() const;
  friend bool operator==(const SeatAssignment&, const SeatAssignment&) = default;
};

// Uniform random subset of N - X ego seats; the remaining seats get
// independent collaborator draws in ascending seat order.
SeatAssignment compose_episode(int num_agents, int num_collaborators, const Population* pop, Rng& rng,
                               SamplingMode sampling = SamplingMode::Uniform);

struct EpisodeOptions {
  int horizon = 400;
  EngineConfig engine{};
  ActionMode ego_mode = ActionMode::Sample;
  bool record_trajectories = true;
  ReplayWriter* replay = nullptr;
};

struct EpisodeResult {
  std::vector<Trajectory> ego_trajectories;  // one per ego seat, ascending seat order
  double collective_reward = 0.0;            // shared reward, shaping excluded
  double ego_return = 0.0;                   // summed training reward over ego seats
  int deliveries = 0;
  std::uint64_t digest = kFnvEpisodeSeed;    // chained FNV-1a over per-tick state digests

  static constexpr std::uint64_t kFnvEpisodeSeed = 0xcbf29ce484222325ULL;
};

// Rolls out one episode. Ego seats act with ego_params; collaborator seats act
// with their checkpoint's own rule (Linear checkpoints sample). All action
// randomness comes from `rng`, consumed in seat order each tick.
EpisodeResult run_episode(const SeatAssignment& assignment, const PolicyParams& ego_params, const Population* pop,
                          const Layout& layout, const EpisodeOptions& options, Rng& rng);

struct TrainResult {
  std::vector<Checkpoint> checkpoints;
  PolicyParams final_params;
  std::vector<double> episode_rewards;  // collective reward per episode
  std::vector<double> episode_returns;  // training reward per episode (shaping included)
  std::vector<std::uint64_t> episode_digests;
};

using ProgressFn = std::function<void(int episode, double mean_reward_ema)>;

// Episodes at which snapshots are taken: round(k * E / (K - 1)), k = 0..K-1.
std::vector<int> snapshot_episodes(int total_episodes, int count);

// N-XPlay training of one shared ego policy.
TrainResult train_ego(const EgoTrainConfig& cfg, const Layout& layout, const Population* pop,
                      const ProgressFn& progress = {});
// Loads cfg.population_path when X > 0.
TrainResult train_ego(const EgoTrainConfig& cfg, const Layout& layout, const ProgressFn& progress = {});

// Plain N-player self-play loop, written independently of the N-XPlay path.
TrainResult train_self_play(const Layout& layout, int episodes, int horizon, double lr, double gamma,
                            std::uint64_t seed, bool shaping, int checkpoints_to_save);

// Mean collective reward (shaping off) of `params` playing every seat.
double evaluate_self_play(const PolicyParams& params, const Layout& layout, int episodes, int horizon,
                          std::uint64_t seed, ActionMode mode = ActionMode::Sample);

// Per-episode streams.
std::uint64_t compose_seed(std::uint64_t root, int episode);
std::uint64_t rollout_seed(std::uint64_t root, int episode);

}  // namespace nxplay
