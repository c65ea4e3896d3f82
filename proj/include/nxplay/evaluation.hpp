#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nxplay/layout.hpp"
#include "nxplay/policy.hpp"
#include "nxplay/population.hpp"

namespace nxplay {

struct EvalRow {
  std::string layout_name;
  int n = 0;
  int x = 0;
  double ratio = 0.0;  // exactly x / n
  double mean_reward = 0.0;
  double std_reward = 0.0;  // population standard deviation over episodes
  int episodes = 0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// The ego under test plus the root seed of the population it trained with.
struct EgoPolicy {
  PolicyParams params;
  std::optional<std::uint64_t> trained_with_seed;
};

struct EvalOptions {
  int horizon = 400;
  int threads = 1;
  SamplingMode sampling = SamplingMode::Uniform;
};

// Throws SeedCollision when the evaluation population is the one the ego
// trained against.
void check_unseen(const EgoPolicy& ego, const Population& unseen);

// `episodes` rollouts with a fresh uniform ego-seat subset of size n - x and x
// independent unseen draws each; the ego acts greedily. Episode e of cell x
// draws from derive_seed(seed, {eval, x, e}), so rows do not depend on
// threading or on which other cells are evaluated.
EvalRow evaluate_cell(const EgoPolicy& ego, const Population& unseen, const Layout& layout, int n, int x,
                      int episodes, std::uint64_t seed, const EvalOptions& options = {});

struct EvalConfig {
  std::string layout_name;
  int n = 2;
  std::vector<int> x_values;
  int episodes_per_cell = 100;
  std::uint64_t seed = 0;
};

EvalReport ratio_sweep(const EvalConfig& cfg, const EgoPolicy& ego, const Population& unseen, const Layout& layout,
                       const EvalOptions& options = {});

enum class ReportFormat : std::uint8_t { Csv, Text };

// Csv columns: layout,n,x,ratio,mean_reward,std_reward,episodes (ratio to 4
// decimals). Text is a lossless line format readable by load_report.
std::string emit_report(const EvalReport& report, ReportFormat format);
EvalReport load_report(std::string_view text);

}  // namespace nxplay
