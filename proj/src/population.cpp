#include "nxplay/population.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "nxplay/error.hpp"
#include "nxplay/fnv.hpp"
#include "nxplay/parallel.hpp"
#include "nxplay/text.hpp"
#include "nxplay/training.hpp"

namespace nxplay {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestMagic = "nxplay-population";
constexpr int kManifestVersion = 1;

std::optional<Tier> tier_from_string(std::string_view s) {
  if (s == "Low") return Tier::Low;
  if (s == "Medium") return Tier::Medium;
  if (s == "High") return Tier::High;
  return std::nullopt;
}

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
           c == '.';
  });
}

std::string kind_string(const PolicyParams& p) {
  if (p.kind == PolicyKind::Linear) return "linear";
  return "scripted:" + std::string(to_string(p.script));
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedFile, "manifest: " + what); }

}  // namespace

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::Low: return "Low";
    case Tier::Medium: return "Medium";
    case Tier::High: return "High";
  }
  return "?";
}

std::vector<Checkpoint> assign_tiers(std::vector<Checkpoint> checkpoints) {
  if (checkpoints.size() < 3) {
    throw Error(ErrorCode::TooFewCheckpoints, "tiering needs at least 3 checkpoints, got " +
                                                  std::to_string(checkpoints.size()));
  }
  std::sort(checkpoints.begin(), checkpoints.end(), [](const Checkpoint& a, const Checkpoint& b) {
    if (a.eval_reward != b.eval_reward) return a.eval_reward < b.eval_reward;
    return a.id < b.id;
  });
  const std::size_t n = checkpoints.size();
  const std::size_t base = n / 3;
  const std::size_t extra = n % 3;
  const std::size_t low = base + (extra > 0 ? 1 : 0);
  const std::size_t medium = base + (extra > 1 ? 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    checkpoints[i].tier = i < low ? Tier::Low : (i < low + medium ? Tier::Medium : Tier::High);
  }
  return checkpoints;
}

std::vector<std::size_t> sample_collaborators(const Population& pop, int count, Rng& rng, SamplingMode mode) {
  std::vector<std::size_t> out;
  if (count <= 0) return out;
  if (pop.checkpoints.empty()) throw Error(ErrorCode::EmptyPopulation, "cannot sample from an empty population");
  out.reserve(static_cast<std::size_t>(count));

  if (mode == SamplingMode::Uniform) {
    for (int i = 0; i < count; ++i) out.push_back(rng.below(pop.checkpoints.size()));
    return out;
  }

  std::array<std::vector<std::size_t>, 3> by_tier;
  for (std::size_t i = 0; i < pop.checkpoints.size(); ++i) {
    const auto& t = pop.checkpoints[i].tier;
    if (!t) throw Error(ErrorCode::InvalidConfig, "stratified sampling needs tiered checkpoints");
    by_tier[static_cast<std::size_t>(*t)].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> present;
  for (const auto& members : by_tier) {
    if (!members.empty()) present.push_back(&members);
  }
  for (int i = 0; i < count; ++i) {
    const auto& members = *present[rng.below(present.size())];
    out.push_back(members[rng.below(members.size())]);
  }
  return out;
}

void save_population(const Population& pop, const std::string& directory) {
  const fs::path root(directory);
  std::error_code ec;
  fs::create_directories(root / "weights", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + (root / "weights").string() + ": " + ec.message());

  std::ostringstream manifest;
  manifest << kManifestMagic << '\n'
           << "version " << kManifestVersion << '\n'
           << "layout " << pop.layout_name << '\n'
           << "n " << pop.num_agents << '\n'
           << "seed " << pop.seed << '\n'
           << "partner_seed " << (pop.partner_seed ? std::to_string(*pop.partner_seed) : "none") << '\n'
           << "checkpoints " << pop.checkpoints.size() << '\n';
  for (const Checkpoint& c : pop.checkpoints) {
    if (!valid_id(c.id) || !valid_id(c.run_id)) {
      throw Error(ErrorCode::InvalidConfig, "checkpoint ids may only use [A-Za-z0-9._-]: '" + c.id + "'");
    }
    std::ostringstream weights;
    write_weights(weights, c.params);
    const std::string rel = "weights/" + c.id + ".txt";
    write_file((root / rel).string(), weights.str());
    manifest << "checkpoint id=" << c.id << " run_id=" << c.run_id << " training_episodes=" << c.training_episodes
             << " eval_reward=" << format_double(c.eval_reward)
             << " tier=" << (c.tier ? std::string(to_string(*c.tier)) : "none") << " kind=" << kind_string(c.params)
             << " weights=" << rel << " checksum=" << hex64(fnv1a(weights.str())) << '\n';
  }
  write_file((root / "manifest.txt").string(), manifest.str());
}

Population load_population(const std::string& directory) {
  const fs::path root(directory);
  const std::string text = read_file((root / "manifest.txt").string());
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();

  std::size_t at = 0;
  auto next_field = [&](std::string_view key) -> std::string_view {
    if (at >= lines.size()) malformed("missing '" + std::string(key) + "' line");
    const std::string_view line = lines[at++];
    if (line.substr(0, key.size() + 1) != std::string(key) + " ") malformed("expected '" + std::string(key) + "'");
    return line.substr(key.size() + 1);
  };

  if (lines.empty() || lines[at++] != kManifestMagic) malformed("not a population manifest");
  const auto version = parse_int(next_field("version"));
  if (!version) malformed("bad version");
  if (*version != kManifestVersion) {
    throw Error(ErrorCode::ManifestVersionMismatch,
                "manifest version " + std::to_string(*version) + ", expected " + std::to_string(kManifestVersion));
  }

  Population pop;
  pop.layout_name = std::string(next_field("layout"));
  const auto n = parse_int(next_field("n"));
  const std::string seed_text(next_field("seed"));
  const std::string partner_text(next_field("partner_seed"));
  const auto count = parse_int(next_field("checkpoints"));
  if (!n || !count || *count < 0) malformed("bad n or checkpoint count");
  pop.num_agents = static_cast<int>(*n);
  try {
    pop.seed = std::stoull(seed_text);
    if (partner_text != "none") pop.partner_seed = std::stoull(partner_text);
  } catch (const std::exception&) {
    malformed("bad seed");
  }

  for (long long k = 0; k < *count; ++k) {
    const std::string_view line = next_field("checkpoint");
    std::vector<std::pair<std::string_view, std::string_view>> fields;
    for (std::string_view part : split(line, ' ')) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos) malformed("field without '='");
      fields.emplace_back(part.substr(0, eq), part.substr(eq + 1));
    }
    auto get = [&](std::string_view key) -> std::string_view {
      for (const auto& [k2, v] : fields) {
        if (k2 == key) return v;
      }
      malformed("checkpoint entry lacks '" + std::string(key) + "'");
    };

    Checkpoint c;
    c.id = std::string(get("id"));
    c.run_id = std::string(get("run_id"));
    const auto episodes = parse_int(get("training_episodes"));
    const auto reward = parse_double(get("eval_reward"));
    if (!episodes || !reward) malformed("bad numeric field for " + c.id);
    c.training_episodes = static_cast<int>(*episodes);
    c.eval_reward = *reward;
    if (const std::string_view t = get("tier"); t != "none") {
      c.tier = tier_from_string(t);
      if (!c.tier) malformed("bad tier for " + c.id);
    }

    const fs::path weights_path = root / std::string(get("weights"));
    if (!fs::exists(weights_path)) {
      throw Error(ErrorCode::MissingWeightsFile, "checkpoint " + c.id + ": " + weights_path.string());
    }
    const std::string weights = read_file(weights_path.string());
    if (hex64(fnv1a(weights)) != get("checksum")) {
      throw Error(ErrorCode::ChecksumMismatch, "checkpoint " + c.id + " weights do not match the manifest");
    }
    const std::string_view kind = get("kind");
    if (kind == "linear") {
      std::istringstream in(weights);
      c.params = read_weights(in);
    } else if (kind.substr(0, 9) == "scripted:") {
      c.params = scripted_policy(kind.substr(9));
    } else {
      malformed("unknown policy kind for " + c.id);
    }
    pop.checkpoints.push_back(std::move(c));
  }
  return pop;
}

std::uint64_t population_weights_digest(const Population& pop) {
  Fnv1a h;
  for (const Checkpoint& c : pop.checkpoints) {
    h.bytes(c.id);
    h.byte(static_cast<std::uint8_t>(c.params.kind));
    h.byte(static_cast<std::uint8_t>(c.params.script));
    h.u64(c.params.feature_len);
    for (double w : c.params.weights) h.f64(w);
  }
  return h.value();
}

Population build_population(const Layout& layout, int num_runs, int checkpoints_per_run,
                            const SelfPlayTrainConfig& train, int eval_episodes, std::uint64_t seed,
                            const BuildOptions& options) {
  if (num_runs < 1 || checkpoints_per_run < 2) {
    throw Error(ErrorCode::InvalidConfig, "need num_runs >= 1 and checkpoints_per_run >= 2");
  }
  if (eval_episodes <= 0) throw Error(ErrorCode::EvalEpisodesZero, "eval_episodes must be positive");

  std::vector<std::vector<Checkpoint>> per_run(static_cast<std::size_t>(num_runs));
  parallel_for(per_run.size(), options.threads, [&](std::size_t r) {
    EgoTrainConfig cfg;
    cfg.layout_name = layout.name();
    cfg.num_agents = layout.num_agents();
    cfg.num_collaborators = 0;
    cfg.total_episodes = train.episodes;
    cfg.horizon = train.horizon;
    cfg.lr = train.lr;
    cfg.gamma = train.gamma;
    cfg.seed = derive_seed(seed, {stream::kRun, r});
    cfg.checkpoints_to_save = checkpoints_per_run;
    cfg.shaping = train.shaping;
    cfg.batch_episodes = train.batch_episodes;
    TrainResult result = train_ego(cfg, layout, nullptr);

    const std::string run_id = "run" + std::to_string(r);
    for (std::size_t k = 0; k < result.checkpoints.size(); ++k) {
      Checkpoint& c = result.checkpoints[k];
      c.run_id = run_id;
      c.id = run_id + "-c" + std::to_string(k);
      c.eval_reward = evaluate_self_play(c.params, layout, eval_episodes, train.horizon,
                                         derive_seed(seed, {stream::kCheckpointEval, r, k}));
    }
    per_run[r] = std::move(result.checkpoints);
  });

  Population pop;
  pop.layout_name = layout.name();
  pop.num_agents = layout.num_agents();
  pop.seed = seed;
  for (auto& run : per_run) {
    for (auto& c : run) pop.checkpoints.push_back(std::move(c));
  }
  // Fewer than three checkpoints cannot be split into tiers; they stay unlabeled.
  if (pop.checkpoints.size() >= 3) pop.checkpoints = assign_tiers(std::move(pop.checkpoints));
  return pop;
}

Population build_scripted_population(const Layout& layout, const std::vector<ScriptedName>& scripts, int size,
                                     int eval_episodes, int horizon, std::uint64_t seed) {
  if (scripts.empty() || size < 1) throw Error(ErrorCode::InvalidConfig, "need at least one script and member");
  if (eval_episodes <= 0) throw Error(ErrorCode::EvalEpisodesZero, "eval_episodes must be positive");
  Rng rng(derive_seed(seed, {stream::kRun}));
  Population pop;
  pop.layout_name = layout.name();
  pop.num_agents = layout.num_agents();
  pop.seed = seed;
  for (int k = 0; k < size; ++k) {
    Checkpoint c;
    c.params = scripted_policy(scripts[rng.below(scripts.size())]);
    c.run_id = "scripted";
    c.id = "script" + std::to_string(k) + "-" + std::string(to_string(c.params.script));
    c.eval_reward = evaluate_self_play(c.params, layout, eval_episodes, horizon,
                                       derive_seed(seed, {stream::kCheckpointEval, static_cast<std::uint64_t>(k)}));
    pop.checkpoints.push_back(std::move(c));
  }
  if (pop.checkpoints.size() >= 3) pop.checkpoints = assign_tiers(std::move(pop.checkpoints));
  return pop;
}

}  // namespace nxplay
