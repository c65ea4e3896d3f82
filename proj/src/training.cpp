#include "nxplay/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nxplay/error.hpp"
#include "nxplay/fnv.hpp"
#include "nxplay/parallel.hpp"
#include "nxplay/replay.hpp"

namespace nxplay {

namespace {

std::uint64_t chain(std::uint64_t acc, std::uint64_t tick_digest) {
  for (int i = 0; i < 8; ++i) {
    acc ^= static_cast<std::uint8_t>(tick_digest >> (8 * i));
    acc *= kFnvPrime;
  }
  return acc;
}

double mean_of_tail(const std::vector<double>& v, std::size_t end, std::size_t window) {
  const std::size_t begin = end > window ? end - window : 0;
  if (end == begin) return 0.0;
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end),
                         0.0) /
         static_cast<double>(end - begin);
}

Checkpoint snapshot(const PolicyParams& params, const std::string& run_id, int episode,
                    const std::vector<double>& rewards) {
  Checkpoint c;
  c.id = run_id + "-e" + std::to_string(episode);
  c.params = params;
  c.run_id = run_id;
  c.training_episodes = episode;
  c.eval_reward = mean_of_tail(rewards, static_cast<std::size_t>(episode), 100);
  return c;
}

}  // namespace

std::uint64_t compose_seed(std::uint64_t root, int episode) {
  return derive_seed(root, {stream::kCompose, static_cast<std::uint64_t>(episode)});
}

std::uint64_t rollout_seed(std::uint64_t root, int episode) {
  return derive_seed(root, {stream::kRollout, static_cast<std::uint64_t>(episode)});
}

int SeatAssignment::ego_count() const {
  return static_cast<int>(std::count_if(seats.begin(), seats.end(), [](const Seat& s) { return s.ego; }));
}

void validate(const EgoTrainConfig& cfg, const Population* pop) {
  if (cfg.num_agents < 2 || cfg.num_agents > kMaxSeats) {
    throw Error(ErrorCode::InvalidConfig, "n must be between 2 and 9");
  }
  if (cfg.num_collaborators < 0 || cfg.num_collaborators > cfg.num_agents - 1) {
    throw Error(ErrorCode::InvalidConfig, "x must satisfy 0 <= x <= n-1");
  }
  if (cfg.total_episodes < 0 || cfg.horizon < 0 || cfg.batch_episodes < 1 || cfg.checkpoints_to_save < 1) {
    throw Error(ErrorCode::InvalidConfig, "episodes and horizon must be >= 0, batch and checkpoints >= 1");
  }
  if (!(cfg.lr > 0.0) || !(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "lr must be positive and gamma in [0, 1]");
  }
  if (cfg.num_collaborators > 0) {
    if (!pop) throw Error(ErrorCode::PopulationRequired, "x > 0 needs a collaborator population");
    if (pop->num_agents != cfg.num_agents) {
      throw Error(ErrorCode::InvalidConfig, "population was built for n=" + std::to_string(pop->num_agents) +
                                                ", training uses n=" + std::to_string(cfg.num_agents));
    }
    if (pop->checkpoints.empty()) throw Error(ErrorCode::EmptyPopulation, "population has no checkpoints");
  }
}

SeatAssignment compose_episode(int num_agents, int num_collaborators, const Population* pop, Rng& rng,
                               SamplingMode sampling) {
  if (num_collaborators < 0 || num_collaborators > num_agents - 1) {
    throw Error(ErrorCode::InvalidConfig, "x must satisfy 0 <= x <= n-1");
  }
  if (num_collaborators > 0 && !pop) throw Error(ErrorCode::PopulationRequired, "x > 0 needs a population");

  std::vector<int> order(static_cast<std::size_t>(num_agents));
  std::iota(order.begin(), order.end(), 0);
  const int ego = num_agents - num_collaborators;
  for (int i = 0; i < ego; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_agents - i)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  SeatAssignment out;
  out.seats.assign(static_cast<std::size_t>(num_agents), Seat{false, 0});
  for (int i = 0; i < ego; ++i) out.seats[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])].ego = true;
  if (num_collaborators > 0) {
    const auto draws = sample_collaborators(*pop, num_collaborators, rng, sampling);
    std::size_t next = 0;
    for (Seat& s : out.seats) {
      if (!s.ego) s.checkpoint = draws[next++];
    }
  }
  return out;
}

EpisodeResult run_episode(const SeatAssignment& assignment, const PolicyParams& ego_params, const Population* pop,
                          const Layout& layout, const EpisodeOptions& options, Rng& rng) {
  const int n = layout.num_agents();
  if (static_cast<int>(assignment.seats.size()) != n) {
    throw Error(ErrorCode::ActionCountMismatch, "seat assignment does not match the layout's seat count");
  }
  const std::size_t len = feature_length(n);

  std::vector<const PolicyParams*> policies(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const Seat& s = assignment.seats[static_cast<std::size_t>(i)];
    if (s.ego) {
      policies[static_cast<std::size_t>(i)] = &ego_params;
    } else {
      if (!pop || s.checkpoint >= pop->checkpoints.size()) {
        throw Error(ErrorCode::InvalidConfig, "collaborator seat refers to a missing checkpoint");
      }
      policies[static_cast<std::size_t>(i)] = &pop->checkpoints[s.checkpoint].params;
    }
  }

  EpisodeResult result;
  std::vector<int> traj_of(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (assignment.seats[static_cast<std::size_t>(i)].ego && options.record_trajectories) {
      traj_of[static_cast<std::size_t>(i)] = static_cast<int>(result.ego_trajectories.size());
      result.ego_trajectories.emplace_back(len);
      result.ego_trajectories.back().observations.reserve(len * static_cast<std::size_t>(options.horizon));
    }
  }

  GameState state = reset(layout);
  std::vector<double> obs(len * static_cast<std::size_t>(n));
  std::vector<Action> actions(static_cast<std::size_t>(n));
  std::vector<double> shaped(static_cast<std::size_t>(n));

  for (int t = 0; t < options.horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      const PolicyParams& p = *policies[static_cast<std::size_t>(i)];
      const auto seat_obs = std::span<double>(obs).subspan(static_cast<std::size_t>(i) * len, len);
      if (p.kind == PolicyKind::Linear || traj_of[static_cast<std::size_t>(i)] >= 0) {
        featurize_into(state, i, layout, options.engine, seat_obs);
      }
      const PolicyContext ctx{state, layout, i};
      const ActionMode mode = assignment.seats[static_cast<std::size_t>(i)].ego ? options.ego_mode : ActionMode::Sample;
      actions[static_cast<std::size_t>(i)] = select_action(p, seat_obs, &ctx, mode, rng);
    }
    const double r = advance(state, actions, layout, options.engine, shaped, nullptr);
    result.collective_reward += r;
    for (int i = 0; i < n; ++i) {
      const int k = traj_of[static_cast<std::size_t>(i)];
      if (assignment.seats[static_cast<std::size_t>(i)].ego) result.ego_return += r + shaped[static_cast<std::size_t>(i)];
      if (k < 0) continue;
      result.ego_trajectories[static_cast<std::size_t>(k)].push(
          std::span<const double>(obs).subspan(static_cast<std::size_t>(i) * len, len),
          actions[static_cast<std::size_t>(i)], r + shaped[static_cast<std::size_t>(i)]);
    }
    const std::uint64_t d = state_digest(state, layout);
    result.digest = chain(result.digest, d);
    if (options.replay) options.replay->record(t, actions, r, d);
  }
  result.deliveries = state.deliveries;
  return result;
}

std::vector<int> snapshot_episodes(int total_episodes, int count) {
  std::vector<int> out;
  if (count <= 1) {
    out.push_back(total_episodes);
    return out;
  }
  for (int k = 0; k < count; ++k) {
    const double at = static_cast<double>(k) * total_episodes / (count - 1);
    out.push_back(static_cast<int>(std::lround(at)));
  }
  return out;
}

TrainResult train_ego(const EgoTrainConfig& cfg, const Layout& layout, const Population* pop,
                      const ProgressFn& progress) {
  validate(cfg, pop);
  if (cfg.num_agents != layout.num_agents()) {
    throw Error(ErrorCode::InvalidConfig, "n=" + std::to_string(cfg.num_agents) + " but layout has " +
                                              std::to_string(layout.num_agents()) + " seats");
  }

  const std::string run_id = "ego-x" + std::to_string(cfg.num_collaborators) + "-s" + std::to_string(cfg.seed);
  TrainResult out;
  out.final_params = PolicyParams::zeros(feature_length(cfg.num_agents));
  Baseline baseline;

  EpisodeOptions options;
  options.horizon = cfg.horizon;
  options.engine.horizon = cfg.horizon;
  options.engine.shaping = cfg.shaping;
  options.ego_mode = ActionMode::Sample;

  const std::vector<int> wanted = snapshot_episodes(cfg.total_episodes, cfg.checkpoints_to_save);
  std::size_t next_snapshot = 0;
  auto take_snapshots = [&](int completed) {
    while (next_snapshot < wanted.size() && wanted[next_snapshot] <= completed) {
      out.checkpoints.push_back(snapshot(out.final_params, run_id, completed, out.episode_rewards));
      ++next_snapshot;
    }
  };

  double ema = 0.0;
  for (int begin = 0; begin < cfg.total_episodes; begin += cfg.batch_episodes) {
    take_snapshots(begin);
    const int count = std::min(cfg.batch_episodes, cfg.total_episodes - begin);
    std::vector<EpisodeResult> batch(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), cfg.threads, [&](std::size_t i) {
      const int episode = begin + static_cast<int>(i);
      Rng compose_rng(compose_seed(cfg.seed, episode));
      const SeatAssignment seats =
          compose_episode(cfg.num_agents, cfg.num_collaborators, pop, compose_rng, cfg.sampling);
      Rng rollout_rng(rollout_seed(cfg.seed, episode));
      batch[i] = run_episode(seats, out.final_params, pop, layout, options, rollout_rng);
    });

    std::vector<Trajectory> experience;
    for (EpisodeResult& r : batch) {
      out.episode_rewards.push_back(r.collective_reward);
      out.episode_returns.push_back(r.ego_return);
      out.episode_digests.push_back(r.digest);
      for (Trajectory& t : r.ego_trajectories) experience.push_back(std::move(t));
      const int episode = static_cast<int>(out.episode_rewards.size());
      ema = episode == 1 ? r.collective_reward : 0.95 * ema + 0.05 * r.collective_reward;
      if (progress && episode % 100 == 0) progress(episode, ema);
    }
    if (cfg.horizon == 0) continue;
    try {
      UpdateResult u = reinforce_update(out.final_params, experience, cfg.lr, cfg.gamma, baseline);
      out.final_params = std::move(u.params);
      baseline = u.baseline;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFiniteGradient) throw;
      throw Error(ErrorCode::NonFiniteGradient,
                  "update after episode " + std::to_string(begin + count - 1) + ": " + e.what());
    }
  }
  take_snapshots(cfg.total_episodes);
  return out;
}

TrainResult train_ego(const EgoTrainConfig& cfg, const Layout& layout, const ProgressFn& progress) {
  if (cfg.num_collaborators > 0) {
    if (cfg.population_path.empty()) throw Error(ErrorCode::PopulationRequired, "x > 0 needs --population");
    const Population pop = load_population(cfg.population_path);
    return train_ego(cfg, layout, &pop, progress);
  }
  return train_ego(cfg, layout, nullptr, progress);
}

TrainResult train_self_play(const Layout& layout, int episodes, int horizon, double lr, double gamma,
                            std::uint64_t seed, bool shaping, int checkpoints_to_save) {
  const int n = layout.num_agents();
  const std::size_t len = feature_length(n);
  EngineConfig engine;
  engine.horizon = horizon;
  engine.shaping = shaping;

  TrainResult out;
  out.final_params = PolicyParams::zeros(len);
  Baseline baseline;
  const std::string run_id = "sp-s" + std::to_string(seed);
  const std::vector<int> wanted = snapshot_episodes(episodes, checkpoints_to_save);
  auto maybe_snapshot = [&](int completed) {
    for (int w : wanted) {
      if (w == completed) out.checkpoints.push_back(snapshot(out.final_params, run_id, completed, out.episode_rewards));
    }
  };

  std::vector<double> obs(len);
  std::vector<Action> actions(static_cast<std::size_t>(n));
  std::vector<double> shaped(static_cast<std::size_t>(n));
  for (int ep = 0; ep < episodes; ++ep) {
    maybe_snapshot(ep);
    Rng rng(rollout_seed(seed, ep));
    GameState state = reset(layout);
    std::vector<Trajectory> trajs(static_cast<std::size_t>(n), Trajectory(len));
    std::vector<std::vector<double>> seat_obs(static_cast<std::size_t>(n));
    double collective = 0.0;
    double ret = 0.0;
    std::uint64_t digest = EpisodeResult::kFnvEpisodeSeed;
    for (int t = 0; t < horizon; ++t) {
      for (int i = 0; i < n; ++i) {
        seat_obs[static_cast<std::size_t>(i)] = featurize(state, i, layout, engine);
        actions[static_cast<std::size_t>(i)] =
            sample_action(action_distribution(out.final_params, seat_obs[static_cast<std::size_t>(i)]), rng);
      }
      const double r = advance(state, actions, layout, engine, shaped, nullptr);
      collective += r;
      for (int i = 0; i < n; ++i) {
        const double ri = r + shaped[static_cast<std::size_t>(i)];
        trajs[static_cast<std::size_t>(i)].push(seat_obs[static_cast<std::size_t>(i)],
                                                actions[static_cast<std::size_t>(i)], ri);
        ret += ri;
      }
      digest = chain(digest, state_digest(state, layout));
    }
    out.episode_rewards.push_back(collective);
    out.episode_returns.push_back(ret);
    out.episode_digests.push_back(digest);
    if (horizon > 0) {
      UpdateResult u = reinforce_update(out.final_params, trajs, lr, gamma, baseline);
      out.final_params = std::move(u.params);
      baseline = u.baseline;
    }
  }
  maybe_snapshot(episodes);
  return out;
}

double evaluate_self_play(const PolicyParams& params, const Layout& layout, int episodes, int horizon,
                          std::uint64_t seed, ActionMode mode) {
  if (episodes <= 0) throw Error(ErrorCode::EvalEpisodesZero, "need at least one evaluation episode");
  SeatAssignment all_ego;
  all_ego.seats.assign(static_cast<std::size_t>(layout.num_agents()), Seat{true, 0});
  EpisodeOptions options;
  options.horizon = horizon;
  options.engine.horizon = horizon;
  options.ego_mode = mode;
  options.record_trajectories = false;
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Rng rng(derive_seed(seed, {stream::kCheckpointEval, static_cast<std::uint64_t>(ep)}));
    total += run_episode(all_ego, params, nullptr, layout, options, rng).collective_reward;
  }
  return total / episodes;
}

}  // namespace nxplay
