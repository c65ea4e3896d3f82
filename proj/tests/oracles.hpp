#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nxplay/engine.hpp"
#include "nxplay/policy.hpp"
#include "nxplay/random.hpp"

// Reference computations written against the rules, shared by the unit and
// acceptance suites. None of them call into the code they check.
namespace nxplay::testing {

// Onions ever taken from a dispenser, counted where they now live. A soup or
// a Cooking/Ready pot holds three; a delivered soup took three away.
inline long onions_in_world(const GameState& s) {
  long total = 0;
  for (const auto& a : s.agents) {
    if (a.held == HeldObject::Onion) total += 1;
    if (a.held == HeldObject::Soup) total += 3;
  }
  for (const auto& p : s.pots) total += p.phase == PotPhase::Idle ? p.onions : 3;
  for (HeldObject h : s.counters) {
    if (h == HeldObject::Onion) total += 1;
    if (h == HeldObject::Soup) total += 3;
  }
  return total + 3L * s.deliveries;
}

// Dishes ever taken from a dispenser: each one is a dish, a soup, or delivered.
inline long dishes_in_world(const GameState& s) {
  long total = 0;
  for (const auto& a : s.agents) total += a.held == HeldObject::Dish || a.held == HeldObject::Soup;
  for (HeldObject h : s.counters) total += h == HeldObject::Dish || h == HeldObject::Soup;
  return total + s.deliveries;
}

inline Trajectory random_trajectory(Rng& rng, std::size_t len, std::size_t steps) {
  Trajectory t(len);
  std::vector<double> obs(len);
  for (std::size_t k = 0; k < steps; ++k) {
    for (double& x : obs) x = rng.uniform() * 2 - 1;
    t.push(obs, static_cast<Action>(rng.below(kNumActions)), std::floor(rng.uniform() * 5) - 1);
  }
  return t;
}

// Mean over timesteps of A_t * log pi(a_t | o_t), A_t held fixed.
inline double surrogate(const PolicyParams& p, const std::vector<Trajectory>& batch, double gamma, double b) {
  double total = 0;
  std::size_t steps = 0;
  for (const auto& traj : batch) {
    std::vector<double> g(traj.size());
    double acc = 0;
    for (std::size_t t = traj.size(); t-- > 0;) g[t] = acc = traj.rewards[t] + gamma * acc;
    for (std::size_t t = 0; t < traj.size(); ++t) {
      std::array<double, kNumActions> logits{};
      const auto obs = traj.obs(t);
      for (int a = 0; a < kNumActions; ++a) {
        for (std::size_t f = 0; f < obs.size(); ++f) logits[static_cast<std::size_t>(a)] += obs[f] * p.weight(f, a);
      }
      double m = logits[0];
      for (double v : logits) m = std::max(m, v);
      double z = 0;
      for (double v : logits) z += std::exp(v - m);
      const double logp = logits[static_cast<std::size_t>(traj.actions[t])] - m - std::log(z);
      total += (g[t] - b) * logp;
      ++steps;
    }
  }
  return total / static_cast<double>(steps);
}

// Largest relative gap between policy_gradient and central differences of
// the surrogate on a random problem.
inline double worst_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t len = 5;
  PolicyParams p = PolicyParams::zeros(len);
  for (double& w : p.weights) w = rng.uniform() - 0.5;
  std::vector<Trajectory> batch;
  for (int e = 0; e < 3; ++e) batch.push_back(random_trajectory(rng, len, 6 + static_cast<std::size_t>(e)));
  const double gamma = 0.9;
  const double b = 0.75;
  const auto grad = policy_gradient(p, batch, gamma, b);
  double worst = 0;
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const double h = 1e-5;
    PolicyParams up = p, down = p;
    up.weights[i] += h;
    down.weights[i] -= h;
    const double fd = (surrogate(up, batch, gamma, b) - surrogate(down, batch, gamma, b)) / (2 * h);
    const double rel = std::abs(fd - grad[i]) / std::max(1e-8, std::max(std::abs(fd), std::abs(grad[i])));
    worst = std::max(worst, rel);
  }
  return worst;
}

inline double interact_probability(const PolicyParams& p) {
  return action_distribution(p, std::vector<double>{1.0})[static_cast<std::size_t>(Action::Interact)];
}

// One state, one step per episode; only Interact pays 1. Returns the update
// count at which P(Interact) first exceeds target, or -1.
inline int bandit_updates_to(double target, std::uint64_t seed, int limit) {
  PolicyParams p = PolicyParams::zeros(1);
  Baseline b;
  Rng rng(seed);
  const std::vector<double> obs = {1.0};
  for (int u = 1; u <= limit; ++u) {
    Trajectory t(1);
    const Action a = select_action(p, obs, nullptr, ActionMode::Sample, rng);
    t.push(obs, a, a == Action::Interact ? 1.0 : 0.0);
    const std::vector<Trajectory> batch = {t};
    auto r = reinforce_update(p, batch, 0.1, 0.99, b);
    p = std::move(r.params);
    b = r.baseline;
    if (interact_probability(p) > target) return u;
  }
  return -1;
}

}  // namespace nxplay::testing
