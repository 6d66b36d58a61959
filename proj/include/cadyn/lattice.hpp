#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cadyn/util.hpp"

namespace cadyn {

using State = std::uint16_t;

enum class CellClass : std::uint8_t { Liquid, Solid };

// Direction sub-parts carried by solid states: the eight inward arrows plus
// the center mark. Order matches the textual names used in configuration
// files.
enum class XPart : std::int8_t { Dn = 0, Up, Lf, Rt, Dl, Dr, Ul, Ur, Bt };

inline constexpr int kXParts = 9;
inline constexpr std::array<const char*, kXParts> kXPartName = {
    "dn", "up", "lf", "rt", "dl", "dr", "ul", "ur", "bt"};

struct StateInfo {
  std::string name;
  CellClass cls = CellClass::Liquid;
  int tile = -1;   // tile id for product alphabets, -1 otherwise
  int xpart = -1;  // XPart index, -1 otherwise
};

enum class AlphabetKind : std::uint8_t { F, FTau, GTau, HTau, OneD, Custom };

// A fixed, ordered state set. Ids are dense and stable: liquid states first
// (0, U, D), then the solid component in a kind-specific layout.
class Alphabet {
 public:
  AlphabetKind kind() const { return kind_; }
  int size() const { return static_cast<int>(states_.size()); }
  int tile_count() const { return tile_count_; }
  const StateInfo& info(State s) const { return states_[s]; }
  const std::string& name(State s) const { return states_[s].name; }
  bool is_liquid(State s) const { return states_[s].cls == CellClass::Liquid; }
  bool is_solid(State s) const { return states_[s].cls == CellClass::Solid; }

  std::optional<State> by_name(const std::string& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  State require(const std::string& n) const {
    auto s = by_name(n);
    if (!s) throw ParseError("unknown state name: " + n);
    return *s;
  }

  bool same_as(const Alphabet& o) const {
    return kind_ == o.kind_ && states_.size() == o.states_.size() &&
           tile_count_ == o.tile_count_;
  }

  // 12 states: 0 U D 1 dn up lf rt dl dr ul ur.
  static std::shared_ptr<const Alphabet> make_f();
  // 0 U D, the eight border arrows, then one state per tile of tau.
  static std::shared_ptr<const Alphabet> make_f_tau(int tiles);
  // 0 U D, then tau x X tile-major (t0.dn .. t0.bt, t1.dn, ...).
  static std::shared_ptr<const Alphabet> make_g_tau(int tiles);
  // F's states followed by the tau x X block.
  static std::shared_ptr<const Alphabet> make_h_tau(int tiles);
  // k symbols named 0..k-1, used for 1D rules and their lifts.
  static std::shared_ptr<const Alphabet> make_one_d(int k);

 private:
  void add(std::string name, CellClass cls, int tile = -1, int xpart = -1) {
    index_.emplace(name, static_cast<State>(states_.size()));
    states_.push_back({std::move(name), cls, tile, xpart});
  }
  void add_liquids() {
    add("0", CellClass::Liquid);
    add("U", CellClass::Liquid);
    add("D", CellClass::Liquid);
  }
  void add_arrows() {
    for (int a = 0; a < 8; ++a) add(kXPartName[a], CellClass::Solid, -1, a);
  }
  void add_tile_block(int tiles) {
    for (int t = 0; t < tiles; ++t)
      for (int a = 0; a < kXParts; ++a)
        add("t" + std::to_string(t) + "." + kXPartName[a], CellClass::Solid, t, a);
  }

  AlphabetKind kind_ = AlphabetKind::Custom;
  std::vector<StateInfo> states_;
  int tile_count_ = 0;
  std::unordered_map<std::string, State> index_;
};

using AlphabetRef = std::shared_ptr<const Alphabet>;

inline AlphabetRef Alphabet::make_f() {
  auto a = std::make_shared<Alphabet>();
  a->kind_ = AlphabetKind::F;
  a->add_liquids();
  a->add("1", CellClass::Solid);
  a->add_arrows();
  return a;
}

inline AlphabetRef Alphabet::make_f_tau(int tiles) {
  if (tiles <= 0) throw std::invalid_argument("f_tau: empty tile set");
  auto a = std::make_shared<Alphabet>();
  a->kind_ = AlphabetKind::FTau;
  a->tile_count_ = tiles;
  a->add_liquids();
  a->add_arrows();
  for (int t = 0; t < tiles; ++t)
    a->add("t" + std::to_string(t), CellClass::Solid, t);
  return a;
}

inline AlphabetRef Alphabet::make_g_tau(int tiles) {
  if (tiles <= 0) throw std::invalid_argument("g_tau: empty tile set");
  auto a = std::make_shared<Alphabet>();
  a->kind_ = AlphabetKind::GTau;
  a->tile_count_ = tiles;
  a->add_liquids();
  a->add_tile_block(tiles);
  return a;
}

inline AlphabetRef Alphabet::make_h_tau(int tiles) {
  if (tiles <= 0) throw std::invalid_argument("h_tau: empty tile set");
  auto a = std::make_shared<Alphabet>();
  a->kind_ = AlphabetKind::HTau;
  a->tile_count_ = tiles;
  a->add_liquids();
  a->add("1", CellClass::Solid);
  a->add_arrows();
  a->add_tile_block(tiles);
  return a;
}

inline AlphabetRef Alphabet::make_one_d(int k) {
  if (k <= 0) throw std::invalid_argument("one_d: empty alphabet");
  auto a = std::make_shared<Alphabet>();
  a->kind_ = AlphabetKind::OneD;
  for (int i = 0; i < k; ++i) a->add(std::to_string(i), CellClass::Liquid);
  return a;
}

struct Position {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend auto operator<=>(const Position&, const Position&) = default;

  Position north() const { return {x, y + 1}; }
  Position south() const { return {x, y - 1}; }
  Position east() const { return {x + 1, y}; }
  Position west() const { return {x - 1, y}; }
  Position operator+(Position o) const { return {x + o.x, y + o.y}; }
  Position operator-(Position o) const { return {x - o.x, y - o.y}; }
};

inline int chebyshev(Position a, Position b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

inline int norm_inf(Position a) { return std::max(std::abs(a.x), std::abs(a.y)); }

// Inclusive integer rectangle.
struct Rect {
  std::int32_t x0 = 0, y0 = 0, x1 = -1, y1 = -1;

  friend auto operator<=>(const Rect&, const Rect&) = default;

  bool empty() const { return x1 < x0 || y1 < y0; }
  std::int64_t width() const { return empty() ? 0 : x1 - x0 + 1; }
  std::int64_t height() const { return empty() ? 0 : y1 - y0 + 1; }
  std::int64_t area() const { return width() * height(); }
  bool contains(Position p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  Rect grown(int m) const {
    if (empty()) return *this;
    return {x0 - m, y0 - m, x1 + m, y1 + m};
  }
  void absorb(Position p) {
    if (empty()) {
      x0 = x1 = p.x;
      y0 = y1 = p.y;
    } else {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  static Rect centered(Position c, int r) {
    return {c.x - r, c.y - r, c.x + r, c.y + r};
  }
};

struct AlphabetMismatch : std::runtime_error {
  AlphabetMismatch() : std::runtime_error("configurations use different alphabets") {}
};

// Uniform background plus finitely many overrides; overrides never equal the
// background (canonical sparse form).
class Configuration {
 public:
  Configuration() = default;
  Configuration(AlphabetRef alphabet, State background)
      : alphabet_(std::move(alphabet)), background_(background) {}

  const AlphabetRef& alphabet() const { return alphabet_; }
  State background() const { return background_; }
  const std::map<Position, State>& cells() const { return cells_; }
  bool is_uniform() const { return cells_.empty(); }

  State get(Position z) const {
    auto it = cells_.find(z);
    return it == cells_.end() ? background_ : it->second;
  }

  void set(Position z, State s) {
    if (s == background_)
      cells_.erase(z);
    else
      cells_[z] = s;
  }

  Rect bounding_box() const {
    Rect r;
    for (const auto& [p, s] : cells_) r.absorb(p);
    return r;
  }

  int support_radius() const {
    int r = 0;
    for (const auto& [p, s] : cells_) r = std::max(r, norm_inf(p));
    return r;
  }

  Configuration translated(Position v) const {
    Configuration out(alphabet_, background_);
    for (const auto& [p, s] : cells_) out.cells_[p + v] = s;
    return out;
  }

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.background_ == b.background_ && a.cells_ == b.cells_;
  }

 private:
  AlphabetRef alphabet_;
  State background_ = 0;
  std::map<Position, State> cells_;
};

// min{ ||z||_inf : x(z) != y(z) }, or nullopt when x = y everywhere; the
// Cantor distance is 2^-result.
inline std::optional<int> agreement_radius(const Configuration& x,
                                           const Configuration& y) {
  if (x.alphabet() && y.alphabet() && !x.alphabet()->same_as(*y.alphabet()))
    throw AlphabetMismatch();
  int bound = std::max(x.support_radius(), y.support_radius()) + 1;
  for (int r = 0; r <= bound; ++r) {
    // Chebyshev shell of radius r.
    for (int dx = -r; dx <= r; ++dx)
      for (int dy = -r; dy <= r; ++dy) {
        if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
        Position z{dx, dy};
        if (x.get(z) != y.get(z)) return r;
      }
  }
  return std::nullopt;
}

struct Window {
  Rect rect;
  std::vector<State> cells;  // row-major, north row first

  State at(Position p) const {
    auto col = p.x - rect.x0;
    auto row = rect.y1 - p.y;
    return cells[static_cast<std::size_t>(row * rect.width() + col)];
  }
};

inline Window extract_window(const Configuration& c, Rect r) {
  Window w;
  w.rect = r;
  w.cells.reserve(static_cast<std::size_t>(r.area()));
  for (std::int32_t y = r.y1; y >= r.y0; --y)
    for (std::int32_t x = r.x0; x <= r.x1; ++x) w.cells.push_back(c.get({x, y}));
  return w;
}

// --- text round-trip ---------------------------------------------------------
//
//   background <symbol>
//   <x> <y> <symbol>
//
// '#' starts a comment line; blank lines are skipped.

inline Configuration parse_configuration(const std::string& text,
                                         const AlphabetRef& alphabet) {
  std::istringstream in(text);
  std::string line;
  std::optional<Configuration> cfg;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto parts = split_ws(t);
    if (!cfg) {
      if (parts.size() != 2 || parts[0] != "background")
        throw ParseError("line " + std::to_string(lineno) +
                         ": expected 'background <symbol>'");
      cfg.emplace(alphabet, alphabet->require(parts[1]));
      continue;
    }
    if (parts.size() != 3)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected '<x> <y> <symbol>'");
    Position z;
    try {
      z.x = std::stoi(parts[0]);
      z.y = std::stoi(parts[1]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad coordinate");
    }
    cfg->set(z, alphabet->require(parts[2]));
  }
  if (!cfg) throw ParseError("empty configuration file");
  return *cfg;
}

inline std::string format_configuration(const Configuration& c) {
  std::ostringstream out;
  out << "background " << c.alphabet()->name(c.background()) << "\n";
  for (const auto& [p, s] : c.cells())
    out << p.x << " " << p.y << " " << c.alphabet()->name(s) << "\n";
  return out.str();
}

}  // namespace cadyn
