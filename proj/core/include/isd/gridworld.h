// Copyright 2026 The isd-evo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef ISD_GRIDWORLD_H_
#define ISD_GRIDWORLD_H_

// Cleanup and Harvest: two partially observable grid games where
// individually greedy play depletes a shared resource.

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isd/random.h"

namespace isd {

enum class GameKind : std::uint8_t { kCleanup, kHarvest };

std::string_view to_string(GameKind game);
GameKind parse_game_kind(std::string_view text);

enum class Cell : std::uint8_t {
  kEmpty = 0,
  kWall = 1,
  kApple = 2,
  kWaste = 3,
  kAppleFieldSoil = 4,
  kAquiferSoil = 5,
};
inline constexpr int kNumCellKinds = 6;

enum class Orientation : std::uint8_t { kNorth, kEast, kSouth, kWest };

enum class Action : std::uint8_t {
  kMoveForward,
  kMoveBackward,
  kStrafeLeft,
  kStrafeRight,
  kRotateLeft,
  kRotateRight,
  kTag,
  kClean,
};

// Cleanup exposes all 8 actions; Harvest drops kClean.
int num_actions(GameKind game);
bool is_valid_action(GameKind game, Action action);
std::string_view to_string(Action action);

struct GridPos {
  int x = 0;  // column
  int y = 0;  // row, growing southwards
  auto operator<=>(const GridPos&) const = default;
};

// Unit step in the given heading; north is (0, -1).
GridPos heading(Orientation o);
Orientation rotate_left(Orientation o);
Orientation rotate_right(Orientation o);

// ASCII map: '#' wall, '.' empty, 'A' apple start, 'F' apple-field soil,
// 'Q' aquifer soil, 'W' initial waste, 'P' player spawn. Everything outside
// the rectangle behaves as wall.
struct Layout {
  std::string name;
  int width = 0;
  int height = 0;
  std::vector<char> glyphs;  // row-major, width * height

  char at(GridPos p) const { return glyphs[p.y * width + p.x]; }
  bool contains(GridPos p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }

  static Layout parse(std::string_view text, std::string name = "inline");
  // Built-in maps: "cleanup", "harvest", "cleanup_mini", "harvest_mini".
  static Layout builtin(std::string_view name);
  // A built-in name, or otherwise a path to a layout file.
  static Layout load(const std::string& name_or_path);
  static std::vector<std::string> builtin_names();
};

// Apple regrowth probability indexed by the number of apples within
// harvest_radius; counts past the end reuse the last entry.
using SpawnTable = std::vector<double>;

struct EnvConfig {
  GameKind game = GameKind::kHarvest;
  Layout layout;
  int width = 0;
  int height = 0;
  int num_players = 5;
  int episode_length = 1000;
  int obs_window = 15;
  double apple_reward = 1.0;
  double tag_cost = 1.0;
  double tag_penalty = 50.0;
  SpawnTable harvest_spawn_table = {0.0, 0.005, 0.02, 0.05};
  int harvest_radius = 2;
  double cleanup_base_spawn = 0.05;
  double waste_critical = 40.0;
  double waste_accrual = 0.5;
  int beam_length = 3;
  int beam_width = 1;
  // Moves are relative to the player's heading unless set.
  bool absolute_moves = false;
  // Steps a tagged player sits out; 0 keeps tagged players in play.
  int tag_removal_steps = 0;

  // Throws ConfigError on any violated invariant.
  void validate() const;

  static EnvConfig defaults(GameKind game);  // full-size maps
  static EnvConfig mini(GameKind game);      // 12x8 maps for tests
};

struct PlayerState {
  int id = 0;
  GridPos pos;
  Orientation orientation = Orientation::kNorth;
  double last_extrinsic_reward = 0.0;
  int removed_steps = 0;  // > 0 while sitting out after a tag

  bool active() const { return removed_steps == 0; }
  bool operator==(const PlayerState&) const = default;
};

// Codes in Observation::players.
inline constexpr std::uint8_t kNoPlayer = 0;
inline constexpr std::uint8_t kSelfPlayer = 1;
// Other players: kOtherPlayerBase + heading relative to the observer
// (0 same heading, 1 facing observer's right, 2 opposite, 3 left).
inline constexpr std::uint8_t kOtherPlayerBase = 2;

// Egocentric window rotated so the observer faces up (row 0 is ahead).
struct Observation {
  int size = 0;
  std::vector<Cell> cells;             // size * size, row-major
  std::vector<std::uint8_t> players;   // size * size, row-major

  Cell cell(int row, int col) const { return cells[row * size + col]; }
  std::uint8_t player(int row, int col) const {
    return players[row * size + col];
  }
  // 3 * size * size bytes, RGB interleaved; a view for replay renderers.
  std::vector<std::uint8_t> rgb() const;
  bool operator==(const Observation&) const = default;
};

struct AppleEaten {
  int player;
  GridPos pos;
  bool operator==(const AppleEaten&) const = default;
};
struct Tagged {
  int source;
  int target;
  bool operator==(const Tagged&) const = default;
};
struct Cleaned {
  int player;
  std::vector<GridPos> cells;
  bool operator==(const Cleaned&) const = default;
};
using Event = std::variant<AppleEaten, Tagged, Cleaned>;

struct StepOutcome {
  std::vector<double> rewards;
  std::vector<Observation> observations;
  std::vector<Event> events;
  bool done = false;
};

enum class BeamKind : std::uint8_t { kTag, kClean };

struct BeamTrace {
  std::vector<GridPos> cells;
  std::vector<int> players;      // kTag: active players hit, excluding the firer
  std::vector<GridPos> waste;    // kClean: waste cells covered
};

double harvest_spawn_probability(int neighbor_count, const SpawnTable& table);
double cleanup_spawn_probability(double waste_level, const EnvConfig& config);

// Full mutable state of one arena. Value type; single owner at a time.
class EnvState {
 public:
  static EnvState reset(const EnvConfig& config, std::uint64_t seed);

  // Advances one step. Phase order: movement and rotation, beams, apple
  // consumption, waste accrual and regrowth, clock.
  StepOutcome step(std::span<const Action> actions);

  BeamTrace beam_trace(int player, BeamKind kind) const;
  Observation observe(int player) const;

  const EnvConfig& config() const { return config_; }
  int t() const { return t_; }
  bool done() const { return t_ >= config_.episode_length; }
  Cell cell(GridPos p) const;
  double waste_level() const { return waste_level_; }
  const std::vector<PlayerState>& players() const { return players_; }
  int apple_count() const;
  int waste_cell_count() const;
  // Regrowth probability an empty field cell faces right now.
  double spawn_probability_at(GridPos p) const;
  // Player occupying p, or -1.
  int player_at(GridPos p) const;

  // Scenario setup: moves a player to a walkable, unoccupied cell. Throws
  // UsageError otherwise.
  void place_player(int id, GridPos pos, Orientation orientation);

  // Plain-text frame of the map with players drawn as their id digit.
  std::string render_text() const;

  bool operator==(const EnvState& other) const;

 private:
  EnvState() = default;

  int index(GridPos p) const { return p.y * config_.width + p.x; }
  bool walkable(GridPos p) const;
  int apples_near(GridPos p) const;
  void sync_waste_cells();
  void respawn(PlayerState& player);

  EnvConfig config_;
  int t_ = 0;
  std::vector<Cell> cells_;
  double waste_level_ = 0.0;
  std::vector<PlayerState> players_;
  std::vector<GridPos> spawn_points_;
  std::vector<GridPos> aquifer_cells_;
  std::vector<GridPos> field_cells_;
  Rng rng_;
};

inline EnvState reset(const EnvConfig& config, std::uint64_t seed) {
  return EnvState::reset(config, seed);
}

}  // namespace isd

#endif  // ISD_GRIDWORLD_H_
