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
#include "isd/gridworld.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "isd/errors.h"

namespace isd {

namespace {

#include "builtin_layouts.inc"

constexpr double kWasteEpsilon = 1e-9;

int waste_units(double level) {
  return static_cast<int>(std::floor(level + kWasteEpsilon));
}

bool is_field(char glyph) { return glyph == 'A' || glyph == 'F'; }
bool is_aquifer(char glyph) { return glyph == 'Q' || glyph == 'W'; }

}  // namespace

std::string_view to_string(GameKind game) {
  return game == GameKind::kCleanup ? "cleanup" : "harvest";
}

GameKind parse_game_kind(std::string_view text) {
  if (text == "cleanup") return GameKind::kCleanup;
  if (text == "harvest") return GameKind::kHarvest;
  throw ConfigError("unknown game '" + std::string(text) + "'");
}

int num_actions(GameKind game) { return game == GameKind::kCleanup ? 8 : 7; }

bool is_valid_action(GameKind game, Action action) {
  return static_cast<int>(action) < num_actions(game);
}

std::string_view to_string(Action action) {
  static constexpr std::array<std::string_view, 8> kNames = {
      "forward", "backward", "strafe_left", "strafe_right",
      "rotate_left", "rotate_right", "tag", "clean"};
  return kNames[static_cast<int>(action)];
}

GridPos heading(Orientation o) {
  switch (o) {
    case Orientation::kNorth: return {0, -1};
    case Orientation::kEast: return {1, 0};
    case Orientation::kSouth: return {0, 1};
    case Orientation::kWest: return {-1, 0};
  }
  return {0, 0};
}

Orientation rotate_left(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 3) % 4);
}

Orientation rotate_right(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 1) % 4);
}

// ---------------------------------------------------------------- Layout

Layout Layout::parse(std::string_view text, std::string name) {
  Layout layout;
  layout.name = std::move(name);
  std::vector<std::string> rows;
  std::string row;
  std::istringstream in{std::string(text)};
  while (std::getline(in, row)) {
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("layout '" + layout.name + "' is empty");
  layout.width = static_cast<int>(rows.front().size());
  layout.height = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != layout.width) {
      throw ConfigError("layout '" + layout.name + "' is not rectangular");
    }
    for (char c : r) {
      if (std::string_view("#.AFQWP").find(c) == std::string_view::npos) {
        throw ConfigError("layout '" + layout.name + "' has unknown glyph '" +
                          std::string(1, c) + "'");
      }
      layout.glyphs.push_back(c);
    }
  }
  return layout;
}

std::vector<std::string> Layout::builtin_names() {
  return {"cleanup", "harvest", "cleanup_mini", "harvest_mini"};
}

Layout Layout::builtin(std::string_view name) {
  if (name == "cleanup") return parse(kCleanupLayout, "cleanup");
  if (name == "harvest") return parse(kHarvestLayout, "harvest");
  if (name == "cleanup_mini") return parse(kCleanupMiniLayout, "cleanup_mini");
  if (name == "harvest_mini") return parse(kHarvestMiniLayout, "harvest_mini");
  throw ConfigError("no built-in layout named '" + std::string(name) + "'");
}

Layout Layout::load(const std::string& name_or_path) {
  for (const auto& name : builtin_names()) {
    if (name == name_or_path) return builtin(name);
  }
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("cannot open layout file '" + name_or_path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), name_or_path);
}

// ------------------------------------------------------------- EnvConfig

void EnvConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (episode_length <= 0) fail("episode_length must be positive");
  if (num_players <= 0) fail("num_players must be positive");
  if (obs_window <= 0 || obs_window % 2 == 0) {
    fail("obs_window must be a positive odd number");
  }
  if (layout.width <= 0 || layout.height <= 0) fail("layout is empty");
  if (width != layout.width || height != layout.height) {
    fail("width/height do not match layout '" + layout.name + "'");
  }
  if (beam_length <= 0 || beam_width <= 0 || beam_width % 2 == 0) {
    fail("beam_length must be positive and beam_width positive and odd");
  }
  if (tag_removal_steps < 0) fail("tag_removal_steps must be nonnegative");
  if (harvest_radius < 0) fail("harvest_radius must be nonnegative");
  if (harvest_spawn_table.empty() || harvest_spawn_table.front() != 0.0) {
    fail("harvest_spawn_table must start with table[0] = 0");
  }
  for (std::size_t i = 0; i < harvest_spawn_table.size(); ++i) {
    double p = harvest_spawn_table[i];
    if (!(p >= 0.0 && p <= 1.0)) fail("harvest spawn probability outside [0,1]");
    if (i > 0 && p < harvest_spawn_table[i - 1]) {
      fail("harvest_spawn_table must be nondecreasing");
    }
  }
  if (!(cleanup_base_spawn >= 0.0 && cleanup_base_spawn <= 1.0)) {
    fail("cleanup_base_spawn outside [0,1]");
  }
  if (!(waste_accrual >= 0.0)) fail("waste_accrual must be nonnegative");

  int spawns = 0, aquifer = 0, initial_waste = 0, field = 0;
  for (char c : layout.glyphs) {
    spawns += c == 'P';
    aquifer += is_aquifer(c);
    initial_waste += c == 'W';
    field += is_field(c);
  }
  if (spawns == 0) fail("layout has no player spawn points");
  if (spawns < num_players) {
    fail("layout has " + std::to_string(spawns) + " spawn points for " +
         std::to_string(num_players) + " players");
  }
  if (field == 0) fail("layout has no apple-field cells");
  if (game == GameKind::kCleanup) {
    if (!(waste_critical > 0.0)) fail("waste_critical must be positive");
    if (waste_units(waste_critical) > aquifer) {
      fail("waste_critical exceeds the aquifer capacity of the layout");
    }
    if (initial_waste > waste_units(waste_critical)) {
      fail("layout marks more initial waste cells than waste_critical");
    }
  }
}

EnvConfig EnvConfig::defaults(GameKind game) {
  EnvConfig config;
  config.game = game;
  config.layout = Layout::builtin(to_string(game));
  config.width = config.layout.width;
  config.height = config.layout.height;
  return config;
}

EnvConfig EnvConfig::mini(GameKind game) {
  EnvConfig config;
  config.game = game;
  config.layout = Layout::builtin(std::string(to_string(game)) + "_mini");
  config.width = config.layout.width;
  config.height = config.layout.height;
  config.num_players = 3;
  config.episode_length = 200;
  config.obs_window = 7;
  config.waste_critical = 8.0;
  config.waste_accrual = 0.25;
  config.cleanup_base_spawn = 0.05;
  return config;
}

// -------------------------------------------------------- spawn functions

double harvest_spawn_probability(int neighbor_count, const SpawnTable& table) {
  if (table.empty() || neighbor_count <= 0) return 0.0;
  std::size_t key = std::min<std::size_t>(neighbor_count, table.size() - 1);
  return table[key];
}

double cleanup_spawn_probability(double waste_level, const EnvConfig& config) {
  double fraction = 1.0 - waste_level / config.waste_critical;
  return config.cleanup_base_spawn * std::max(0.0, fraction);
}

// --------------------------------------------------------------- EnvState

EnvState EnvState::reset(const EnvConfig& config, std::uint64_t seed) {
  config.validate();
  EnvState state;
  state.config_ = config;
  state.rng_.seed(seed);
  const Layout& layout = config.layout;
  state.cells_.assign(layout.glyphs.size(), Cell::kEmpty);
  std::vector<GridPos> preferred_waste;
  for (int y = 0; y < layout.height; ++y) {
    for (int x = 0; x < layout.width; ++x) {
      GridPos p{x, y};
      char glyph = layout.at(p);
      Cell& cell = state.cells_[state.index(p)];
      switch (glyph) {
        case '#': cell = Cell::kWall; break;
        case 'A':
          cell = config.game == GameKind::kHarvest ? Cell::kApple
                                                   : Cell::kAppleFieldSoil;
          break;
        case 'F': cell = Cell::kAppleFieldSoil; break;
        case 'Q':
        case 'W':
          cell = Cell::kAquiferSoil;
          if (glyph == 'W') preferred_waste.push_back(p);
          break;
        case 'P': state.spawn_points_.push_back(p); break;
        default: break;
      }
      if (is_field(glyph)) state.field_cells_.push_back(p);
      if (is_aquifer(glyph)) state.aquifer_cells_.push_back(p);
    }
  }

  if (config.game == GameKind::kCleanup) {
    // Start saturated: no apples and zero regrowth until someone cleans.
    state.waste_level_ = config.waste_critical;
    for (GridPos p : preferred_waste) state.cells_[state.index(p)] = Cell::kWaste;
    state.sync_waste_cells();
  }

  std::vector<GridPos> spawns = state.spawn_points_;
  shuffle(std::span<GridPos>(spawns), state.rng_);
  for (int i = 0; i < config.num_players; ++i) {
    PlayerState player;
    player.id = i;
    player.pos = spawns[i];
    player.orientation = static_cast<Orientation>(uniform_index(state.rng_, 4));
    state.players_.push_back(player);
  }
  return state;
}

Cell EnvState::cell(GridPos p) const {
  if (!config_.layout.contains(p)) return Cell::kWall;
  return cells_[index(p)];
}

bool EnvState::walkable(GridPos p) const {
  return config_.layout.contains(p) && cells_[index(p)] != Cell::kWall;
}

int EnvState::player_at(GridPos p) const {
  for (const auto& player : players_) {
    if (player.active() && player.pos == p) return player.id;
  }
  return -1;
}

int EnvState::apple_count() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), Cell::kApple));
}

int EnvState::waste_cell_count() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), Cell::kWaste));
}

int EnvState::apples_near(GridPos p) const {
  const int r = config_.harvest_radius;
  int count = 0;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if ((dx == 0 && dy == 0) || dx * dx + dy * dy > r * r) continue;
      if (cell({p.x + dx, p.y + dy}) == Cell::kApple) ++count;
    }
  }
  return count;
}

double EnvState::spawn_probability_at(GridPos p) const {
  if (config_.game == GameKind::kCleanup) {
    return cleanup_spawn_probability(waste_level_, config_);
  }
  return harvest_spawn_probability(apples_near(p), config_.harvest_spawn_table);
}

// Mirrors the scalar waste level into discrete Waste cells: one cell per
// whole unit, new cells drawn uniformly from clean aquifer soil.
void EnvState::sync_waste_cells() {
  int target = waste_units(waste_level_);
  int current = waste_cell_count();
  while (current < target) {
    std::vector<GridPos> clean;
    for (GridPos p : aquifer_cells_) {
      if (cells_[index(p)] == Cell::kAquiferSoil) clean.push_back(p);
    }
    if (clean.empty()) break;
    GridPos chosen = clean[uniform_index(rng_, clean.size())];
    cells_[index(chosen)] = Cell::kWaste;
    ++current;
  }
}

void EnvState::respawn(PlayerState& player) {
  std::vector<GridPos> free;
  for (GridPos p : spawn_points_) {
    if (player_at(p) < 0) free.push_back(p);
  }
  if (free.empty()) {
    player.removed_steps = 1;  // try again next step
    return;
  }
  player.pos = free[uniform_index(rng_, free.size())];
  player.orientation = static_cast<Orientation>(uniform_index(rng_, 4));
}

void EnvState::place_player(int id, GridPos pos, Orientation orientation) {
  if (id < 0 || id >= config_.num_players) throw UsageError("place_player: invalid id");
  if (!walkable(pos)) throw UsageError("place_player: cell is not walkable");
  const int occupant = player_at(pos);
  if (occupant >= 0 && occupant != id) throw UsageError("place_player: cell is occupied");
  players_[id].pos = pos;
  players_[id].orientation = orientation;
}

BeamTrace EnvState::beam_trace(int player, BeamKind kind) const {
  if (player < 0 || player >= config_.num_players) {
    throw UsageError("beam_trace: invalid player id");
  }
  if (kind == BeamKind::kClean && config_.game != GameKind::kCleanup) {
    throw UsageError("clean beam is only available in Cleanup");
  }
  const PlayerState& self = players_[player];
  const GridPos forward = heading(self.orientation);
  const GridPos right = heading(rotate_right(self.orientation));
  const int half = config_.beam_width / 2;
  BeamTrace trace;
  for (int lane = -half; lane <= half; ++lane) {
    for (int step = 1; step <= config_.beam_length; ++step) {
      GridPos p{self.pos.x + forward.x * step + right.x * lane,
                self.pos.y + forward.y * step + right.y * lane};
      if (cell(p) == Cell::kWall) break;
      trace.cells.push_back(p);
    }
  }
  for (GridPos p : trace.cells) {
    if (kind == BeamKind::kTag) {
      int hit = player_at(p);
      if (hit >= 0 && hit != player) trace.players.push_back(hit);
    } else if (cell(p) == Cell::kWaste) {
      trace.waste.push_back(p);
    }
  }
  std::sort(trace.players.begin(), trace.players.end());
  return trace;
}

StepOutcome EnvState::step(std::span<const Action> actions) {
  if (done()) throw UsageError("step called on a finished episode");
  if (static_cast<int>(actions.size()) != config_.num_players) {
    throw UsageError("step expects one action per player");
  }
  for (Action a : actions) {
    if (!is_valid_action(config_.game, a)) {
      throw UsageError("action '" + std::string(to_string(a)) +
                       "' is not available in " +
                       std::string(to_string(config_.game)));
    }
  }

  const int n = config_.num_players;
  StepOutcome outcome;
  outcome.rewards.assign(n, 0.0);

  // (1) Movement and rotation in a seeded order; blocked movers stay put.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  shuffle(std::span<int>(order), rng_);
  for (int id : order) {
    PlayerState& player = players_[id];
    if (!player.active()) continue;
    Action a = actions[id];
    if (a == Action::kRotateLeft) {
      player.orientation = rotate_left(player.orientation);
      continue;
    }
    if (a == Action::kRotateRight) {
      player.orientation = rotate_right(player.orientation);
      continue;
    }
    Orientation dir;
    if (config_.absolute_moves) {
      switch (a) {
        case Action::kMoveForward: dir = Orientation::kNorth; break;
        case Action::kMoveBackward: dir = Orientation::kSouth; break;
        case Action::kStrafeLeft: dir = Orientation::kWest; break;
        case Action::kStrafeRight: dir = Orientation::kEast; break;
        default: continue;
      }
    } else {
      switch (a) {
        case Action::kMoveForward: dir = player.orientation; break;
        case Action::kMoveBackward:
          dir = rotate_right(rotate_right(player.orientation));
          break;
        case Action::kStrafeLeft: dir = rotate_left(player.orientation); break;
        case Action::kStrafeRight: dir = rotate_right(player.orientation); break;
        default: continue;
      }
    }
    GridPos delta = heading(dir);
    GridPos target{player.pos.x + delta.x, player.pos.y + delta.y};
    if (walkable(target) && player_at(target) < 0) player.pos = target;
  }

  // (2) Beams. Every hit is resolved against post-movement positions.
  std::vector<int> newly_tagged;
  for (int id = 0; id < n; ++id) {
    if (!players_[id].active()) continue;
    if (actions[id] == Action::kTag) {
      outcome.rewards[id] -= config_.tag_cost;
      BeamTrace trace = beam_trace(id, BeamKind::kTag);
      for (int victim : trace.players) {
        outcome.rewards[victim] -= config_.tag_penalty;
        outcome.events.push_back(Tagged{id, victim});
        newly_tagged.push_back(victim);
      }
    } else if (actions[id] == Action::kClean) {
      BeamTrace trace = beam_trace(id, BeamKind::kClean);
      if (trace.waste.empty()) continue;
      for (GridPos p : trace.waste) cells_[index(p)] = Cell::kAquiferSoil;
      waste_level_ =
          std::max(0.0, waste_level_ - static_cast<double>(trace.waste.size()));
      outcome.events.push_back(Cleaned{id, trace.waste});
    }
  }
  if (config_.tag_removal_steps > 0) {
    for (int victim : newly_tagged) {
      players_[victim].removed_steps = config_.tag_removal_steps;
    }
  }

  // (3) Apple consumption.
  for (auto& player : players_) {
    if (!player.active()) continue;
    Cell& c = cells_[index(player.pos)];
    if (c == Cell::kApple) {
      c = Cell::kAppleFieldSoil;
      outcome.rewards[player.id] += config_.apple_reward;
      outcome.events.push_back(AppleEaten{player.id, player.pos});
    }
  }

  // (4) Waste accrual, then regrowth on unoccupied field soil. Harvest
  // probabilities are read from the pre-regrowth map.
  if (config_.game == GameKind::kCleanup) {
    waste_level_ =
        std::min(config_.waste_critical, waste_level_ + config_.waste_accrual);
    sync_waste_cells();
  }
  std::vector<double> spawn_p(field_cells_.size(), 0.0);
  for (std::size_t k = 0; k < field_cells_.size(); ++k) {
    GridPos p = field_cells_[k];
    if (cells_[index(p)] != Cell::kAppleFieldSoil || player_at(p) >= 0) continue;
    spawn_p[k] = spawn_probability_at(p);
  }
  for (std::size_t k = 0; k < field_cells_.size(); ++k) {
    if (spawn_p[k] > 0.0 && bernoulli(rng_, spawn_p[k])) {
      cells_[index(field_cells_[k])] = Cell::kApple;
    }
  }
  for (auto& player : players_) {
    if (player.removed_steps > 0 &&
        std::find(newly_tagged.begin(), newly_tagged.end(), player.id) ==
            newly_tagged.end()) {
      if (--player.removed_steps == 0) respawn(player);
    }
  }

  // (5) Clock.
  ++t_;
  for (int id = 0; id < n; ++id) {
    players_[id].last_extrinsic_reward = outcome.rewards[id];
  }
  outcome.observations.reserve(n);
  for (int id = 0; id < n; ++id) outcome.observations.push_back(observe(id));
  outcome.done = done();
  return outcome;
}

Observation EnvState::observe(int player) const {
  if (player < 0 || player >= config_.num_players) {
    throw UsageError("observe: invalid player id");
  }
  const PlayerState& self = players_[player];
  const int size = config_.obs_window;
  const int half = size / 2;
  const GridPos forward = heading(self.orientation);
  const GridPos right = heading(rotate_right(self.orientation));
  Observation obs;
  obs.size = size;
  obs.cells.assign(size * size, Cell::kWall);
  obs.players.assign(size * size, kNoPlayer);
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      const int ahead = half - row;
      const int side = col - half;
      GridPos p{self.pos.x + forward.x * ahead + right.x * side,
                self.pos.y + forward.y * ahead + right.y * side};
      const int k = row * size + col;
      obs.cells[k] = cell(p);
      if (!config_.layout.contains(p)) continue;
      int other = player_at(p);
      if (other == player && self.active()) {
        obs.players[k] = kSelfPlayer;
      } else if (other >= 0) {
        int relative = (static_cast<int>(players_[other].orientation) -
                        static_cast<int>(self.orientation) + 4) % 4;
        obs.players[k] = static_cast<std::uint8_t>(kOtherPlayerBase + relative);
      }
    }
  }
  // The observer is always drawn at the centre, even while sitting out.
  obs.players[half * size + half] = kSelfPlayer;
  return obs;
}

std::vector<std::uint8_t> Observation::rgb() const {
  static constexpr std::array<std::array<std::uint8_t, 3>, kNumCellKinds>
      kPalette = {{{0, 0, 0},
                   {180, 180, 180},
                   {0, 200, 0},
                   {120, 90, 40},
                   {60, 40, 20},
                   {20, 60, 160}}};
  std::vector<std::uint8_t> out(3 * cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    std::array<std::uint8_t, 3> color = kPalette[static_cast<int>(cells[k])];
    if (players[k] == kSelfPlayer) color = {50, 100, 255};
    else if (players[k] != kNoPlayer) color = {255, 50, 50};
    for (int ch = 0; ch < 3; ++ch) out[3 * k + ch] = color[ch];
  }
  return out;
}

std::string EnvState::render_text() const {
  static constexpr std::array<char, kNumCellKinds> kGlyph = {'.', '#', '@',
                                                             '~', ',', '_'};
  std::string out;
  for (int y = 0; y < config_.height; ++y) {
    for (int x = 0; x < config_.width; ++x) {
      int id = player_at({x, y});
      out += id >= 0 ? static_cast<char>('0' + id % 10)
                     : kGlyph[static_cast<int>(cells_[index({x, y})])];
    }
    out += '\n';
  }
  return out;
}

bool EnvState::operator==(const EnvState& other) const {
  return t_ == other.t_ && cells_ == other.cells_ &&
         waste_level_ == other.waste_level_ && players_ == other.players_ &&
         rng_ == other.rng_;
}

}  // namespace isd
