#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nxplay {

struct Cell {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
  // Row-major ordering: (y, x).
  friend constexpr std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

enum class Tile : std::uint8_t { Floor, Counter, Pot, OnionDispenser, DishDispenser, ServingStation };

inline constexpr int kMaxSeats = 9;

char tile_char(Tile t);
std::string_view tile_name(Tile t);

// Immutable kitchen map. Construct through parse_layout or Layout::create;
// both validate every invariant, so a Layout value is always well formed.
class Layout {
 public:
  static Layout create(std::string name, int width, int height, std::vector<Tile> grid,
                       std::vector<Cell> start_positions);

  const std::string& name() const noexcept { return name_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int num_agents() const noexcept { return static_cast<int>(starts_.size()); }
  const std::vector<Tile>& grid() const noexcept { return grid_; }
  const std::vector<Cell>& start_positions() const noexcept { return starts_; }

  int index(Cell c) const noexcept { return c.y * width_ + c.x; }
  Cell cell(int index) const noexcept { return {index % width_, index / width_}; }
  bool in_bounds(Cell c) const noexcept { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  Tile tile(Cell c) const noexcept { return grid_[static_cast<std::size_t>(index(c))]; }
  bool is_floor(Cell c) const noexcept { return in_bounds(c) && tile(c) == Tile::Floor; }

  // Station cells of one type in row-major order.
  const std::vector<Cell>& cells_of(Tile t) const noexcept { return by_tile_[static_cast<std::size_t>(t)]; }
  const std::vector<Cell>& pot_cells() const noexcept { return cells_of(Tile::Pot); }
  // Index into pot_cells() for a pot cell, -1 otherwise.
  int pot_slot(Cell c) const noexcept { return pot_slot_[static_cast<std::size_t>(index(c))]; }

  Layout with_name(std::string name) const;

  friend bool operator==(const Layout& a, const Layout& b) {
    return a.name_ == b.name_ && a.width_ == b.width_ && a.height_ == b.height_ && a.grid_ == b.grid_ &&
           a.starts_ == b.starts_;
  }

 private:
  Layout() = default;

  std::string name_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> grid_;
  std::vector<Cell> starts_;
  std::vector<std::vector<Cell>> by_tile_;
  std::vector<int> pot_slot_;
};

// Parses the ASCII format: 'X' counter, 'P' pot, 'O' onion dispenser,
// 'D' dish dispenser, 'S' serving station, ' ' floor, '1'..'9' floor cell
// where that seat starts. A single trailing newline is accepted.
Layout parse_layout(std::string_view text, std::string name = "");

// Canonical text: one line per row, each terminated by '\n'.
std::string render_layout(const Layout& layout);

Layout load_layout_file(const std::string& path);

struct ReachabilityFinding {
  Tile station;
  friend bool operator==(const ReachabilityFinding&, const ReachabilityFinding&) = default;
};

std::string to_string(const ReachabilityFinding& finding);  // e.g. "PotUnreachable"

// One finding per station type none of whose tiles borders a floor cell
// reachable from some start position. Empty when the layout is playable.
std::vector<ReachabilityFinding> check_reachability(const Layout& layout);

}  // namespace nxplay
