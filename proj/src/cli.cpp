#include "nxplay/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include "nxplay/error.hpp"
#include "nxplay/evaluation.hpp"
#include "nxplay/layout.hpp"
#include "nxplay/population.hpp"
#include "nxplay/render.hpp"
#include "nxplay/replay.hpp"
#include "nxplay/text.hpp"
#include "nxplay/training.hpp"

namespace nxplay {

namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  bool quiet = false;
  int threads = 1;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Logger {
 public:
  Logger(std::ostream& err, bool quiet) : err_(err), quiet_(quiet), start_(std::chrono::steady_clock::now()) {}

  void config(const std::string& line) {
    if (!quiet_) err_ << "config: " << line << '\n';
  }
  void line(const std::string& text) {
    if (!quiet_) err_ << text << '\n';
  }
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::ostream& err_;
  bool quiet_;
  std::chrono::steady_clock::time_point start_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
}

int validate_layout_cmd(const std::string& path, Logger& log, std::ostream& out, bool quiet) {
  log.config("command=validate-layout path=" + path);
  const Layout layout = load_layout_file(path);
  const auto findings = check_reachability(layout);
  for (const auto& f : findings) out << to_string(f) << '\n';
  if (!findings.empty()) return 1;
  if (!quiet) {
    out << "ok " << layout.name() << " " << layout.width() << "x" << layout.height() << " seats=" << layout.num_agents()
        << '\n';
  }
  return 0;
}

struct PopulationArgs {
  std::string layout;
  std::string out;
  int runs = 4;
  int checkpoints = 3;
  int episodes = 2000;
  int eval_episodes = 20;
  int horizon = 400;
  double lr = 0.01;
  double gamma = 0.99;
  bool no_shaping = false;
  std::vector<std::string> scripted;
  int size = 12;
};

int population_cmd(const PopulationArgs& a, const Globals& g, Logger& log) {
  const Layout layout = load_layout_file(a.layout);
  std::ostringstream cfg;
  cfg << "command=population layout=" << a.layout << " seed=" << g.seed << " eval_episodes=" << a.eval_episodes
      << " horizon=" << a.horizon << " out=" << a.out;
  Population pop;
  if (!a.scripted.empty()) {
    std::vector<ScriptedName> names;
    for (const auto& s : a.scripted) names.push_back(scripted_name_from_string(s));
    cfg << " scripted=" << a.scripted.size() << " size=" << a.size;
    log.config(cfg.str());
    pop = build_scripted_population(layout, names, a.size, a.eval_episodes, a.horizon, g.seed);
  } else {
    cfg << " runs=" << a.runs << " checkpoints=" << a.checkpoints << " episodes=" << a.episodes << " lr=" << a.lr
        << " gamma=" << a.gamma << " shaping=" << !a.no_shaping;
    log.config(cfg.str());
    SelfPlayTrainConfig train;
    train.episodes = a.episodes;
    train.horizon = a.horizon;
    train.lr = a.lr;
    train.gamma = a.gamma;
    train.shaping = !a.no_shaping;
    pop = build_population(layout, a.runs, a.checkpoints, train, a.eval_episodes, g.seed, {g.threads});
  }
  save_population(pop, a.out);
  for (const Checkpoint& c : pop.checkpoints) {
    log.line("checkpoint " + c.id + " eval_reward=" + format_double(c.eval_reward) +
             " tier=" + (c.tier ? std::string(to_string(*c.tier)) : "none"));
  }
  return 0;
}

struct TrainArgs {
  std::string layout;
  std::string population;
  std::string out;
  int n = 0;
  int x = 0;
  int episodes = 1000;
  int horizon = 400;
  double lr = 0.01;
  double gamma = 0.99;
  int checkpoints = 3;
  int batch = 1;
  bool shaping = false;
};

int train_cmd(const TrainArgs& a, const Globals& g, Logger& log) {
  if (a.x < 0 || a.x > a.n - 1) throw UsageError("x must satisfy 0 <= x <= n-1");
  const Layout layout = load_layout_file(a.layout);
  EgoTrainConfig cfg;
  cfg.layout_name = layout.name();
  cfg.num_agents = a.n;
  cfg.num_collaborators = a.x;
  cfg.total_episodes = a.episodes;
  cfg.horizon = a.horizon;
  cfg.lr = a.lr;
  cfg.gamma = a.gamma;
  cfg.seed = g.seed;
  cfg.population_path = a.population;
  cfg.checkpoints_to_save = a.checkpoints;
  cfg.shaping = a.shaping;
  cfg.batch_episodes = a.batch;
  cfg.threads = g.threads;

  std::ostringstream line;
  line << "command=train layout=" << a.layout << " n=" << a.n << " x=" << a.x << " episodes=" << a.episodes
       << " seed=" << g.seed << " population=" << (a.population.empty() ? "none" : a.population)
       << " horizon=" << a.horizon << " lr=" << a.lr << " gamma=" << a.gamma << " checkpoints=" << a.checkpoints
       << " batch=" << a.batch << " shaping=" << a.shaping << " out=" << a.out;
  log.config(line.str());

  std::optional<Population> pop;
  if (a.x > 0) {
    if (a.population.empty()) throw Error(ErrorCode::PopulationRequired, "x > 0 needs --population");
    pop = load_population(a.population);
  }
  const TrainResult result = train_ego(cfg, layout, pop ? &*pop : nullptr, [&](int episode, double ema) {
    std::ostringstream p;
    p << episode << ", " << format_double(ema) << ", " << log.seconds();
    log.line(p.str());
  });

  ensure_dir(a.out);
  Population ego;
  ego.layout_name = layout.name();
  ego.num_agents = layout.num_agents();
  ego.seed = g.seed;
  if (pop) ego.partner_seed = pop->seed;
  ego.checkpoints = result.checkpoints;
  save_population(ego, a.out);

  std::string csv = "episode,collective_reward,ego_return,digest\n";
  for (std::size_t i = 0; i < result.episode_rewards.size(); ++i) {
    csv += std::to_string(i) + ',' + format_double(result.episode_rewards[i]) + ',' +
           format_double(result.episode_returns[i]) + ',' + hex64(result.episode_digests[i]) + '\n';
  }
  write_file((fs::path(a.out) / "train_log.csv").string(), csv);

  // One more episode with the final policy, kept as a replay.
  EpisodeOptions options;
  options.horizon = a.horizon;
  options.engine.horizon = a.horizon;
  options.engine.shaping = a.shaping;
  options.record_trajectories = false;
  ReplayWriter replay(layout, options.engine);
  options.replay = &replay;
  Rng compose_rng(compose_seed(g.seed, a.episodes));
  const SeatAssignment seats = compose_episode(a.n, a.x, pop ? &*pop : nullptr, compose_rng);
  Rng rollout_rng(rollout_seed(g.seed, a.episodes));
  run_episode(seats, result.final_params, pop ? &*pop : nullptr, layout, options, rollout_rng);
  write_file((fs::path(a.out) / "replay.jsonl").string(), replay.text());
  return 0;
}

struct EvalArgs {
  std::string ego;
  std::string ego_id;
  std::string population;
  std::string layout;
  std::string out;
  std::string format;
  int n = 0;
  std::vector<int> x;
  int episodes = 100;
  int horizon = 400;
};

int eval_cmd(const EvalArgs& a, const Globals& g, Logger& log) {
  for (int x : a.x) {
    if (x < 0 || x > a.n - 1) throw UsageError("x must satisfy 0 <= x <= n-1");
  }
  std::string format = a.format;
  if (format.empty()) format = fs::path(a.out).extension() == ".csv" ? "csv" : "text";
  std::ostringstream line;
  line << "command=eval ego=" << a.ego << " ego_id=" << (a.ego_id.empty() ? "last" : a.ego_id)
       << " population=" << a.population << " layout=" << a.layout << " n=" << a.n << " x=";
  for (std::size_t i = 0; i < a.x.size(); ++i) line << (i ? "," : "") << a.x[i];
  line << " episodes=" << a.episodes << " horizon=" << a.horizon << " seed=" << g.seed << " format=" << format
       << " out=" << a.out;
  log.config(line.str());

  const Layout layout = load_layout_file(a.layout);
  const Population ego_dir = load_population(a.ego);
  if (ego_dir.checkpoints.empty()) throw Error(ErrorCode::EmptyPopulation, "ego directory has no checkpoints");
  const Checkpoint* chosen = nullptr;
  for (const Checkpoint& c : ego_dir.checkpoints) {
    if (a.ego_id.empty() ? (!chosen || c.training_episodes >= chosen->training_episodes) : c.id == a.ego_id) {
      chosen = &c;
    }
  }
  if (!chosen) throw Error(ErrorCode::UnknownName, "no ego checkpoint '" + a.ego_id + "'");
  const Population unseen = load_population(a.population);

  EvalConfig cfg;
  cfg.layout_name = layout.name();
  cfg.n = a.n;
  cfg.x_values = a.x;
  cfg.episodes_per_cell = a.episodes;
  cfg.seed = g.seed;
  EvalOptions options;
  options.horizon = a.horizon;
  options.threads = g.threads;
  const EvalReport report = ratio_sweep(cfg, {chosen->params, ego_dir.partner_seed}, unseen, layout, options);
  write_file(a.out, emit_report(report, format == "csv" ? ReportFormat::Csv : ReportFormat::Text));
  for (const EvalRow& r : report.rows) {
    log.line("x=" + std::to_string(r.x) + " mean_reward=" + format_double(r.mean_reward) +
             " std_reward=" + format_double(r.std_reward));
  }
  return 0;
}

int replay_cmd(const std::string& path, int fps, Logger& log, std::ostream& out) {
  log.config("command=replay path=" + path + " fps=" + std::to_string(fps));
  const Replay replay = parse_replay(read_file(path));
  const Layout layout = parse_layout(replay.layout_text, replay.layout_name);
  const std::vector<GameState> states = simulate_replay(replay, layout);
  out << "tick 0 score 0\n" << render_frame(reset(layout), layout, replay.config);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (fps > 0) std::this_thread::sleep_for(std::chrono::milliseconds(1000 / fps));
    std::string codes;
    for (Action act : replay.ticks[i].actions) codes.push_back(action_code(act));
    out << "tick " << states[i].tick << " actions " << codes << " score " << format_double(states[i].score) << '\n'
        << render_frame(states[i], layout, replay.config);
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"N-player Overcooked engine and N-XPlay training pipeline", "nxplay"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Root seed for every random stream");
  app.add_flag("--quiet", g.quiet, "Suppress config and progress logging");
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 256));

  std::string layout_path;
  auto* validate = app.add_subcommand("validate-layout", "Check a .layout file");
  validate->add_option("path", layout_path, "Layout file")->required();

  PopulationArgs pa;
  auto* population = app.add_subcommand("population", "Build and save a collaborator population");
  population->add_option("--layout", pa.layout)->required();
  population->add_option("--out", pa.out)->required();
  population->add_option("--runs", pa.runs)->check(CLI::PositiveNumber);
  population->add_option("--checkpoints", pa.checkpoints)->check(CLI::Range(2, 1000));
  population->add_option("--episodes", pa.episodes)->check(CLI::NonNegativeNumber);
  population->add_option("--eval-episodes", pa.eval_episodes)->check(CLI::PositiveNumber);
  population->add_option("--horizon", pa.horizon)->check(CLI::NonNegativeNumber);
  population->add_option("--lr", pa.lr)->check(CLI::PositiveNumber);
  population->add_option("--gamma", pa.gamma)->check(CLI::Range(0.0, 1.0));
  population->add_flag("--no-shaping", pa.no_shaping);
  population->add_option("--scripted", pa.scripted, "Scripted members instead of training")->delimiter(',');
  population->add_option("--size", pa.size, "Member count for --scripted")->check(CLI::PositiveNumber);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train an ego policy with N-XPlay (X=0 is self-play)");
  train->add_option("--layout", ta.layout)->required();
  train->add_option("--n", ta.n)->required();
  train->add_option("--x", ta.x)->required();
  train->add_option("--episodes", ta.episodes)->required()->check(CLI::NonNegativeNumber);
  train->add_option("--population", ta.population);
  train->add_option("--out", ta.out)->required();
  train->add_option("--horizon", ta.horizon)->check(CLI::NonNegativeNumber);
  train->add_option("--lr", ta.lr)->check(CLI::PositiveNumber);
  train->add_option("--gamma", ta.gamma)->check(CLI::Range(0.0, 1.0));
  train->add_option("--checkpoints", ta.checkpoints)->check(CLI::PositiveNumber);
  train->add_option("--batch", ta.batch)->check(CLI::PositiveNumber);
  train->add_flag("--shaping", ta.shaping);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Cross-play evaluation against an unseen population");
  eval->add_option("--ego", ea.ego)->required();
  eval->add_option("--ego-id", ea.ego_id);
  eval->add_option("--population", ea.population)->required();
  eval->add_option("--layout", ea.layout)->required();
  eval->add_option("--n", ea.n)->required();
  eval->add_option("--x", ea.x)->required()->delimiter(',');
  eval->add_option("--episodes", ea.episodes)->check(CLI::PositiveNumber);
  eval->add_option("--horizon", ea.horizon)->check(CLI::NonNegativeNumber);
  eval->add_option("--out", ea.out)->required();
  eval->add_option("--format", ea.format)->check(CLI::IsMember({"csv", "text"}));

  std::string replay_path;
  int fps = 0;
  auto* replay = app.add_subcommand("replay", "Render a replay file as ASCII frames");
  replay->add_option("path", replay_path)->required();
  replay->add_option("--fps", fps)->check(CLI::NonNegativeNumber);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("nxplay");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  }

  Logger log(err, g.quiet);
  try {
    if (*validate) return validate_layout_cmd(layout_path, log, out, g.quiet);
    if (*population) return population_cmd(pa, g, log);
    if (*train) return train_cmd(ta, g, log);
    if (*eval) return eval_cmd(ea, g, log);
    if (*replay) return replay_cmd(replay_path, fps, log, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace nxplay
