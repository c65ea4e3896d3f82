#include "nxplay/layout.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>

#include "nxplay/error.hpp"

namespace nxplay {

namespace {

constexpr std::array kStations = {Tile::Pot, Tile::OnionDispenser, Tile::DishDispenser, Tile::ServingStation};

std::optional<Tile> tile_from_char(char c) {
  switch (c) {
    case 'X': return Tile::Counter;
    case 'P': return Tile::Pot;
    case 'O': return Tile::OnionDispenser;
    case 'D': return Tile::DishDispenser;
    case 'S': return Tile::ServingStation;
    case ' ': return Tile::Floor;
    default: break;
  }
  if (c >= '1' && c <= '9') return Tile::Floor;
  return std::nullopt;
}

std::string describe(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

}  // namespace

char tile_char(Tile t) {
  switch (t) {
    case Tile::Floor: return ' ';
    case Tile::Counter: return 'X';
    case Tile::Pot: return 'P';
    case Tile::OnionDispenser: return 'O';
    case Tile::DishDispenser: return 'D';
    case Tile::ServingStation: return 'S';
  }
  return '?';
}

std::string_view tile_name(Tile t) {
  switch (t) {
    case Tile::Floor: return "Floor";
    case Tile::Counter: return "Counter";
    case Tile::Pot: return "Pot";
    case Tile::OnionDispenser: return "OnionDispenser";
    case Tile::DishDispenser: return "DishDispenser";
    case Tile::ServingStation: return "ServingStation";
  }
  return "Unknown";
}

Layout Layout::create(std::string name, int width, int height, std::vector<Tile> grid,
                      std::vector<Cell> start_positions) {
  if (width <= 0 || height <= 0 || grid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::NotRectangular, "grid size does not match width x height");
  }
  Layout l;
  l.name_ = std::move(name);
  l.width_ = width;
  l.height_ = height;
  l.grid_ = std::move(grid);
  l.starts_ = std::move(start_positions);

  const int n = l.num_agents();
  if (n > kMaxSeats) throw Error(ErrorCode::InvalidConfig, "at most 9 seats are supported");
  for (int i = 0; i < n; ++i) {
    const Cell s = l.starts_[static_cast<std::size_t>(i)];
    if (!l.in_bounds(s) || l.tile(s) != Tile::Floor) {
      throw Error(ErrorCode::InvalidConfig, "start of seat " + std::to_string(i + 1) + " is not a floor cell");
    }
    for (int j = 0; j < i; ++j) {
      if (l.starts_[static_cast<std::size_t>(j)] == s) {
        throw Error(ErrorCode::DuplicateSeatDigit, "seats share start cell " + describe(s));
      }
    }
  }
  if (n < 2) throw Error(ErrorCode::TooFewSeats, "a layout needs at least two seats, found " + std::to_string(n));

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool border = x == 0 || y == 0 || x == width - 1 || y == height - 1;
      if (border && l.tile({x, y}) == Tile::Floor) {
        throw Error(ErrorCode::OpenBorder, "border cell " + describe({x, y}) + " is floor");
      }
    }
  }

  l.by_tile_.assign(6, {});
  l.pot_slot_.assign(l.grid_.size(), -1);
  for (int i = 0; i < static_cast<int>(l.grid_.size()); ++i) {
    const Tile t = l.grid_[static_cast<std::size_t>(i)];
    auto& bucket = l.by_tile_[static_cast<std::size_t>(t)];
    if (t == Tile::Pot) l.pot_slot_[static_cast<std::size_t>(i)] = static_cast<int>(bucket.size());
    bucket.push_back(l.cell(i));
  }
  for (Tile t : kStations) {
    if (l.cells_of(t).empty()) {
      throw Error(ErrorCode::MissingStation, "no " + std::string(tile_name(t)) + " in layout");
    }
  }
  return l;
}

Layout Layout::with_name(std::string name) const {
  Layout copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

Layout parse_layout(std::string_view text, std::string name) {
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);

  std::vector<std::string_view> rows;
  std::size_t begin = 0;
  while (true) {
    const std::size_t end = text.find('\n', begin);
    rows.push_back(text.substr(begin, end == std::string_view::npos ? std::string_view::npos : end - begin));
    if (end == std::string_view::npos) break;
    begin = end + 1;
  }

  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < rows[y].size(); ++x) {
      if (!tile_from_char(rows[y][x])) {
        throw Error(ErrorCode::UnknownChar, "byte " + std::to_string(static_cast<unsigned char>(rows[y][x])) +
                                                " at " + describe({static_cast<int>(x), static_cast<int>(y)}));
      }
    }
  }

  const std::size_t width = rows.front().size();
  if (width == 0) throw Error(ErrorCode::NotRectangular, "empty row");
  for (std::size_t y = 1; y < rows.size(); ++y) {
    if (rows[y].size() != width) {
      throw Error(ErrorCode::NotRectangular, "row " + std::to_string(y) + " has length " +
                                                 std::to_string(rows[y].size()) + ", expected " +
                                                 std::to_string(width));
    }
  }

  std::array<std::optional<Cell>, kMaxSeats> seats{};
  std::vector<Tile> grid;
  grid.reserve(width * rows.size());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const char c = rows[y][x];
      const Cell here{static_cast<int>(x), static_cast<int>(y)};
      if (c >= '1' && c <= '9') {
        auto& slot = seats[static_cast<std::size_t>(c - '1')];
        if (slot) throw Error(ErrorCode::DuplicateSeatDigit, std::string("digit '") + c + "' appears twice");
        slot = here;
      }
      grid.push_back(*tile_from_char(c));
    }
  }

  std::vector<Cell> starts;
  bool gap = false;
  for (std::size_t d = 0; d < seats.size(); ++d) {
    if (!seats[d]) {
      gap = true;
      continue;
    }
    if (gap) {
      throw Error(ErrorCode::NonContiguousSeatDigits,
                  "digit '" + std::to_string(d + 1) + "' present but a lower digit is missing");
    }
    starts.push_back(*seats[d]);
  }

  return Layout::create(std::move(name), static_cast<int>(width), static_cast<int>(rows.size()), std::move(grid),
                        std::move(starts));
}

std::string render_layout(const Layout& layout) {
  std::string out;
  out.reserve(static_cast<std::size_t>((layout.width() + 1) * layout.height()));
  for (int y = 0; y < layout.height(); ++y) {
    for (int x = 0; x < layout.width(); ++x) out.push_back(tile_char(layout.tile({x, y})));
    out.push_back('\n');
  }
  const auto& starts = layout.start_positions();
  for (std::size_t seat = 0; seat < starts.size(); ++seat) {
    const Cell s = starts[seat];
    out[static_cast<std::size_t>(s.y * (layout.width() + 1) + s.x)] = static_cast<char>('1' + seat);
  }
  return out;
}

Layout load_layout_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open layout file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return parse_layout(buf.str(), stem);
}

std::string to_string(const ReachabilityFinding& finding) {
  return std::string(tile_name(finding.station)) + "Unreachable";
}

std::vector<ReachabilityFinding> check_reachability(const Layout& layout) {
  std::vector<char> reached(layout.grid().size(), 0);
  std::queue<Cell> frontier;
  for (Cell s : layout.start_positions()) {
    reached[static_cast<std::size_t>(layout.index(s))] = 1;
    frontier.push(s);
  }
  constexpr std::array<Cell, 4> kSteps = {Cell{0, -1}, Cell{0, 1}, Cell{1, 0}, Cell{-1, 0}};
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    for (Cell d : kSteps) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (!layout.is_floor(n)) continue;
      auto& r = reached[static_cast<std::size_t>(layout.index(n))];
      if (!r) {
        r = 1;
        frontier.push(n);
      }
    }
  }

  std::vector<ReachabilityFinding> findings;
  for (Tile station : kStations) {
    const auto& cells = layout.cells_of(station);
    const bool ok = std::any_of(cells.begin(), cells.end(), [&](Cell c) {
      return std::any_of(kSteps.begin(), kSteps.end(), [&](Cell d) {
        const Cell n{c.x + d.x, c.y + d.y};
        return layout.is_floor(n) && reached[static_cast<std::size_t>(layout.index(n))];
      });
    });
    if (!ok) findings.push_back({station});
  }
  return findings;
}

}  // namespace nxplay
