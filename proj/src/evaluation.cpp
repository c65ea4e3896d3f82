#include "nxplay/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nxplay/error.hpp"
#include "nxplay/parallel.hpp"
#include "nxplay/random.hpp"
#include "nxplay/text.hpp"
#include "nxplay/training.hpp"

namespace nxplay {

namespace {

constexpr std::string_view kTextMagic = "nxplay-eval-report 1";

std::string ratio_text(int x, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(x) / n);
  return buf;
}

}  // namespace

void check_unseen(const EgoPolicy& ego, const Population& unseen) {
  if (ego.trained_with_seed && *ego.trained_with_seed == unseen.seed) {
    throw Error(ErrorCode::SeedCollision, "evaluation population seed " + std::to_string(unseen.seed) +
                                              " is the ego's training population");
  }
}

EvalRow evaluate_cell(const EgoPolicy& ego, const Population& unseen, const Layout& layout, int n, int x,
                      int episodes, std::uint64_t seed, const EvalOptions& options) {
  check_unseen(ego, unseen);
  if (n != layout.num_agents()) {
    throw Error(ErrorCode::InvalidConfig,
                "n=" + std::to_string(n) + " but layout has " + std::to_string(layout.num_agents()) + " seats");
  }
  if (x < 0 || x > n - 1) throw Error(ErrorCode::InvalidConfig, "x must satisfy 0 <= x <= n-1");
  if (episodes <= 0) throw Error(ErrorCode::EvalEpisodesZero, "episodes per cell must be positive");
  if (x > 0 && unseen.num_agents != n) {
    throw Error(ErrorCode::InvalidConfig, "unseen population was built for n=" + std::to_string(unseen.num_agents));
  }

  EpisodeOptions episode;
  episode.horizon = options.horizon;
  episode.engine.horizon = options.horizon;
  episode.engine.shaping = false;
  episode.ego_mode = ActionMode::Greedy;
  episode.record_trajectories = false;

  std::vector<double> rewards(static_cast<std::size_t>(episodes));
  parallel_for(rewards.size(), options.threads, [&](std::size_t e) {
    Rng rng(derive_seed(seed, {stream::kEval, static_cast<std::uint64_t>(x), e}));
    const SeatAssignment seats = compose_episode(n, x, &unseen, rng, options.sampling);
    rewards[e] = run_episode(seats, ego.params, &unseen, layout, episode, rng).collective_reward;
  });

  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / episodes;
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);

  EvalRow row;
  row.layout_name = layout.name();
  row.n = n;
  row.x = x;
  row.ratio = static_cast<double>(x) / n;
  row.mean_reward = mean;
  row.std_reward = std::sqrt(sq / episodes);
  row.episodes = episodes;
  return row;
}

EvalReport ratio_sweep(const EvalConfig& cfg, const EgoPolicy& ego, const Population& unseen, const Layout& layout,
                       const EvalOptions& options) {
  check_unseen(ego, unseen);
  std::vector<int> xs = cfg.x_values;
  std::sort(xs.begin(), xs.end());
  EvalReport report;
  for (int x : xs) {
    report.rows.push_back(evaluate_cell(ego, unseen, layout, cfg.n, x, cfg.episodes_per_cell, cfg.seed, options));
  }
  return report;
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out += "layout,n,x,ratio,mean_reward,std_reward,episodes\n";
    for (const EvalRow& r : report.rows) {
      out += r.layout_name + ',' + std::to_string(r.n) + ',' + std::to_string(r.x) + ',' + ratio_text(r.x, r.n) +
             ',' + format_double(r.mean_reward) + ',' + format_double(r.std_reward) + ',' +
             std::to_string(r.episodes) + '\n';
    }
    return out;
  }
  out += kTextMagic;
  out += '\n';
  for (const EvalRow& r : report.rows) {
    out += "row layout=" + r.layout_name + " n=" + std::to_string(r.n) + " x=" + std::to_string(r.x) +
           " ratio=" + ratio_text(r.x, r.n) + " mean_reward=" + format_double(r.mean_reward) +
           " std_reward=" + format_double(r.std_reward) + " episodes=" + std::to_string(r.episodes) + '\n';
  }
  return out;
}

EvalReport load_report(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kTextMagic) throw Error(ErrorCode::MalformedFile, "not an eval report");
  EvalReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto parts = split(lines[i], ' ');
    if (parts.size() != 8 || parts[0] != "row") throw Error(ErrorCode::MalformedFile, "bad report row");
    auto value = [&](std::size_t k, std::string_view key) {
      const std::string_view p = parts[k];
      if (p.substr(0, key.size() + 1) != std::string(key) + "=") {
        throw Error(ErrorCode::MalformedFile, "expected field " + std::string(key));
      }
      return p.substr(key.size() + 1);
    };
    EvalRow r;
    r.layout_name = std::string(value(1, "layout"));
    const auto n = parse_int(value(2, "n"));
    const auto x = parse_int(value(3, "x"));
    const auto mean = parse_double(value(5, "mean_reward"));
    const auto sd = parse_double(value(6, "std_reward"));
    const auto eps = parse_int(value(7, "episodes"));
    if (!n || !x || !mean || !sd || !eps || *n <= 0) throw Error(ErrorCode::MalformedFile, "bad report value");
    value(4, "ratio");
    r.n = static_cast<int>(*n);
    r.x = static_cast<int>(*x);
    r.ratio = static_cast<double>(r.x) / r.n;
    r.mean_reward = *mean;
    r.std_reward = *sd;
    r.episodes = static_cast<int>(*eps);
    report.rows.push_back(std::move(r));
  }
  return report;
}

}  // namespace nxplay
