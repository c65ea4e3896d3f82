#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nxplay/engine.hpp"
#include "nxplay/random.hpp"

namespace nxplay {

enum class PolicyKind : std::uint8_t { Linear, Scripted };
enum class ScriptedName : std::uint8_t { Random, Stationary, GreedyCook };

std::string_view to_string(ScriptedName name);
ScriptedName scripted_name_from_string(std::string_view name);  // throws UnknownName

struct PolicyParams {
  PolicyKind kind = PolicyKind::Linear;
  ScriptedName script = ScriptedName::Random;  // meaningful for Scripted only
  std::size_t feature_len = 0;
  std::vector<double> weights;  // row-major [feature_len x 6]; empty for Scripted

  static PolicyParams zeros(std::size_t feature_len);

  double weight(std::size_t feature, int action) const {
    return weights[feature * kNumActions + static_cast<std::size_t>(action)];
  }
  double& weight(std::size_t feature, int action) {
    return weights[feature * kNumActions + static_cast<std::size_t>(action)];
  }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

using ActionDistribution = std::array<double, kNumActions>;

// What a scripted policy needs to see beyond the feature vector.
struct PolicyContext {
  const GameState& state;
  const Layout& layout;
  int seat;
};

enum class ActionMode : std::uint8_t { Sample, Greedy };

PolicyParams scripted_policy(std::string_view name);
PolicyParams scripted_policy(ScriptedName name);

// Linear: softmax(obs^T W). Scripted: the script's distribution (one-hot for
// Stationary and GreedyCook); GreedyCook requires a context.
ActionDistribution action_distribution(const PolicyParams& params, std::span<const double> obs,
                                       const PolicyContext* context = nullptr);

// Index of the largest probability; ties go to the lowest action index.
Action argmax_action(const ActionDistribution& dist);
Action sample_action(const ActionDistribution& dist, Rng& rng);

// Greedy mode takes the argmax of Linear policies; scripted policies always
// follow their own rule (Random keeps sampling).
Action select_action(const PolicyParams& params, std::span<const double> obs, const PolicyContext* context,
                     ActionMode mode, Rng& rng);

// The GreedyCook subgoal cycle, as a pure function of the state.
Action greedy_cook_action(const GameState& state, int seat, const Layout& layout);

// Per-seat experience in flat storage.
struct Trajectory {
  std::size_t feature_len = 0;
  std::vector<double> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;

  explicit Trajectory(std::size_t len = 0) : feature_len(len) {}
  std::size_t size() const noexcept { return actions.size(); }
  std::span<const double> obs(std::size_t t) const {
    return std::span<const double>(observations).subspan(t * feature_len, feature_len);
  }
  void push(std::span<const double> obs, Action action, double reward) {
    observations.insert(observations.end(), obs.begin(), obs.end());
    actions.push_back(action);
    rewards.push_back(reward);
  }
};

inline constexpr double kBaselineDecay = 0.99;

// Running mean of returns. The first batch initializes it to that batch's
// mean return.
struct Baseline {
  double value = 0.0;
  bool initialized = false;
  friend bool operator==(const Baseline&, const Baseline&) = default;
};

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

// Average over every timestep of (G_t - baseline) * d/dW log pi(a_t | o_t).
std::vector<double> policy_gradient(const PolicyParams& params, std::span<const Trajectory> episodes, double gamma,
                                    double baseline);

struct UpdateResult {
  PolicyParams params;
  Baseline baseline;
};

UpdateResult reinforce_update(const PolicyParams& params, std::span<const Trajectory> episodes, double lr,
                              double gamma, Baseline baseline);

// Weights table: header "<feature_len> cols=6", then one row per feature.
void write_weights(std::ostream& out, const PolicyParams& params);
PolicyParams read_weights(std::istream& in);

}  // namespace nxplay
