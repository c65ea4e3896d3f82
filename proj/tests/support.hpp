#pragma once

#include <unistd.h>

#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <filesystem>
#include <string>
#include <vector>

#include "nxplay/layout.hpp"
#include "nxplay/random.hpp"

namespace nxplay::testing {

// Bordered random kitchen: interior cells are Floor with probability
// floor_prob, each station type sits on a random non-corner border cell, and
// `seats` starts are drawn from the interior floor. Returns text so callers
// exercise the parser too; empty when the draw had too little floor.
inline std::string random_layout_text(Rng& rng, int width, int height, int seats, double floor_prob = 0.75) {
  std::vector<std::string> rows(static_cast<std::size_t>(height), std::string(static_cast<std::size_t>(width), 'X'));
  std::vector<std::pair<int, int>> floor;
  for (int y = 1; y < height - 1; ++y) {
    for (int x = 1; x < width - 1; ++x) {
      if (rng.uniform() < floor_prob) {
        rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = ' ';
        floor.emplace_back(x, y);
      }
    }
  }
  if (static_cast<int>(floor.size()) < seats) return {};
  std::vector<std::pair<int, int>> border;
  for (int x = 1; x < width - 1; ++x) border.emplace_back(x, 0), border.emplace_back(x, height - 1);
  for (int y = 1; y < height - 1; ++y) border.emplace_back(0, y), border.emplace_back(width - 1, y);
  for (char station : {'P', 'O', 'D', 'S'}) {
    for (;;) {
      const auto [x, y] = border[rng.below(border.size())];
      char& c = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      if (c != 'X') continue;
      c = station;
      break;
    }
  }
  for (int s = 0; s < seats; ++s) {
    const std::size_t k = s + rng.below(floor.size() - static_cast<std::size_t>(s));
    std::swap(floor[static_cast<std::size_t>(s)], floor[k]);
    const auto [x, y] = floor[static_cast<std::size_t>(s)];
    rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = static_cast<char>('1' + s);
  }
  std::string text;
  for (const auto& r : rows) text += r + '\n';
  return text;
}

inline Layout random_layout(Rng& rng, int width, int height, int seats, double floor_prob = 0.75) {
  for (;;) {
    const std::string text = random_layout_text(rng, width, height, seats, floor_prob);
    if (!text.empty()) return parse_layout(text, "random");
  }
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("nxplay-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Upper-tail p-value of Pearson's statistic against equal expected counts.
inline double chi_square_uniform_p(const std::vector<long>& counts) {
  long total = 0;
  for (long c : counts) total += c;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0;
  for (long c : counts) stat += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  const boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

inline std::string layouts_dir() { return NXPLAY_LAYOUT_DIR; }
inline std::string layout_path(const std::string& stem) { return layouts_dir() + "/" + stem + ".layout"; }

}  // namespace nxplay::testing
