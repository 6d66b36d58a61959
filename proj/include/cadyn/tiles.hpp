#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cadyn/util.hpp"

namespace cadyn {

// Wang tiles by adjacency relation. h[a][b]: a may sit immediately west of b;
// v[a][b]: a may sit immediately north of b.
struct TileSet {
  int n = 0;
  std::vector<std::string> labels;  // optional, parallel to ids
  std::vector<char> h, v;           // n*n flattened
  int alpha = -1, beta = -1;

  bool h_ok(int a, int b) const { return h[static_cast<std::size_t>(a) * n + b]; }
  bool v_ok(int a, int b) const { return v[static_cast<std::size_t>(a) * n + b]; }
  void allow_h(int a, int b) { h[static_cast<std::size_t>(a) * n + b] = 1; }
  void allow_v(int a, int b) { v[static_cast<std::size_t>(a) * n + b] = 1; }

  static TileSet empty(int n) {
    TileSet t;
    t.n = n;
    t.h.assign(static_cast<std::size_t>(n) * n, 0);
    t.v.assign(static_cast<std::size_t>(n) * n, 0);
    t.labels.resize(n);
    return t;
  }

  // One tile, no constraints: tiles every square.
  static TileSet free_single() {
    TileSet t = empty(1);
    t.allow_h(0, 0);
    t.allow_v(0, 0);
    t.labels[0] = "free";
    return t;
  }

  // Two tiles forced to alternate in both directions.
  static TileSet checkerboard() {
    TileSet t = empty(2);
    t.allow_h(0, 1);
    t.allow_h(1, 0);
    t.allow_v(0, 1);
    t.allow_v(1, 0);
    return t;
  }
};

struct TileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Text format:
//   tiles <n>
//   h <a> <b>
//   v <a> <b>
//   alpha <k>      (optional)
//   beta <k>       (optional)
inline TileSet parse_tileset(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<TileSet> ts;
  int lineno = 0;
  auto id = [&](const std::string& tok) {
    int v;
    try {
      v = std::stoi(tok);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad tile id");
    }
    if (!ts || v < 0 || v >= ts->n)
      throw ParseError("line " + std::to_string(lineno) + ": tile id out of range");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto p = split_ws(t);
    if (!ts) {
      if (p.size() != 2 || p[0] != "tiles")
        throw ParseError("line " + std::to_string(lineno) + ": expected 'tiles <n>'");
      int n = std::stoi(p[1]);
      if (n <= 0) throw ParseError("tile set must be nonempty");
      ts = TileSet::empty(n);
      continue;
    }
    if (p[0] == "h" && p.size() == 3)
      ts->allow_h(id(p[1]), id(p[2]));
    else if (p[0] == "v" && p.size() == 3)
      ts->allow_v(id(p[1]), id(p[2]));
    else if (p[0] == "alpha" && p.size() == 2)
      ts->alpha = id(p[1]);
    else if (p[0] == "beta" && p.size() == 2)
      ts->beta = id(p[1]);
    else if (p[0] == "label" && p.size() == 3)
      ts->labels[id(p[1])] = p[2];
    else
      throw ParseError("line " + std::to_string(lineno) + ": unrecognized directive");
  }
  if (!ts) throw ParseError("empty tile set file");
  if (ts->alpha >= 0 && ts->alpha == ts->beta)
    throw ParseError("alpha and beta must differ");
  return *ts;
}

inline std::string format_tileset(const TileSet& ts) {
  std::ostringstream out;
  out << "tiles " << ts.n << "\n";
  for (int a = 0; a < ts.n; ++a)
    if (!ts.labels[a].empty()) out << "label " << a << " " << ts.labels[a] << "\n";
  for (int a = 0; a < ts.n; ++a)
    for (int b = 0; b < ts.n; ++b)
      if (ts.h_ok(a, b)) out << "h " << a << " " << b << "\n";
  for (int a = 0; a < ts.n; ++a)
    for (int b = 0; b < ts.n; ++b)
      if (ts.v_ok(a, b)) out << "v " << a << " " << b << "\n";
  if (ts.alpha >= 0) out << "alpha " << ts.alpha << "\n";
  if (ts.beta >= 0) out << "beta " << ts.beta << "\n";
  return out.str();
}

// --- square tiling search ----------------------------------------------------

enum class TileStatus { Yes, No, BudgetExceeded };

struct TilingResult {
  TileStatus status = TileStatus::No;
  std::vector<std::vector<int>> grid;  // grid[row][col], row 0 = north
  std::uint64_t nodes = 0;
};

struct ForcedCell {
  int row = 0, col = 0, tile = 0;
};

inline bool grid_satisfies(const TileSet& ts, const std::vector<std::vector<int>>& g) {
  for (std::size_t r = 0; r < g.size(); ++r)
    for (std::size_t c = 0; c < g[r].size(); ++c) {
      if (c + 1 < g[r].size() && !ts.h_ok(g[r][c], g[r][c + 1])) return false;
      if (r + 1 < g.size() && !ts.v_ok(g[r][c], g[r + 1][c])) return false;
    }
  return true;
}

namespace detail {

// Per-cell candidate sets as bit vectors over tile ids.
class Domains {
 public:
  Domains(int cells, int n) : n_(n), words_((n + 63) / 64) {
    bits_.assign(static_cast<std::size_t>(cells) * words_, ~std::uint64_t{0});
    int spare = words_ * 64 - n;
    if (spare > 0) {
      std::uint64_t mask = ~std::uint64_t{0} >> spare;
      for (int c = 0; c < cells; ++c) bits_[at(c) + words_ - 1] &= mask;
    }
  }
  void restrict_to(int cell, int tile) {
    std::uint64_t* p = &bits_[at(cell)];
    for (int wd = 0; wd < words_; ++wd) p[wd] = 0;
    p[tile / 64] = std::uint64_t{1} << (tile % 64);
  }
  bool has(int cell, int tile) const {
    return bits_[at(cell) + tile / 64] >> (tile % 64) & 1;
  }
  void remove(int cell, int tile) {
    bits_[at(cell) + tile / 64] &= ~(std::uint64_t{1} << (tile % 64));
  }
  bool empty(int cell) const {
    for (int wd = 0; wd < words_; ++wd)
      if (bits_[at(cell) + wd]) return false;
    return true;
  }
  bool intersects(int cell, const std::uint64_t* row) const {
    for (int wd = 0; wd < words_; ++wd)
      if (bits_[at(cell) + wd] & row[wd]) return true;
    return false;
  }

 private:
  std::size_t at(int cell) const { return static_cast<std::size_t>(cell) * words_; }
  int n_, words_;
  std::vector<std::uint64_t> bits_;
};

struct PairBits {
  int n = 0, words = 0;
  // west_of[t]: tiles that may sit east of t; east_of[t]: west of t;
  // north_of[t]: tiles that may sit south of t; south_of[t]: north of t.
  std::vector<std::uint64_t> west_of, east_of, north_of, south_of;

  explicit PairBits(const TileSet& ts) : n(ts.n), words((ts.n + 63) / 64) {
    auto blank = std::vector<std::uint64_t>(static_cast<std::size_t>(n) * words, 0);
    west_of = east_of = north_of = south_of = blank;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (ts.h_ok(a, b)) {  // a west of b
          set(west_of, a, b);
          set(east_of, b, a);
        }
        if (ts.v_ok(a, b)) {  // a north of b
          set(north_of, a, b);
          set(south_of, b, a);
        }
      }
  }
  const std::uint64_t* row(const std::vector<std::uint64_t>& m, int t) const {
    return &m[static_cast<std::size_t>(t) * words];
  }

 private:
  void set(std::vector<std::uint64_t>& m, int a, int b) {
    m[static_cast<std::size_t>(a) * words + b / 64] |= std::uint64_t{1} << (b % 64);
  }
};

}  // namespace detail

// Deterministic backtracking over tile ids with an arc-consistency pre-pass;
// `forced` pins cells (used to anchor alpha when probing TM-derived sets,
// where the all-blank tiling would otherwise make every square admissible —
// the pre-pass also lets anchored contradictions resolve without search).
inline TilingResult can_tile_rect(const TileSet& ts, int w, int hgt,
                                  std::uint64_t budget,
                                  const std::vector<ForcedCell>& forced = {}) {
  TilingResult res;
  const int total = w * hgt;
  detail::PairBits pb(ts);
  detail::Domains dom(total, ts.n);
  for (const auto& f : forced) dom.restrict_to(f.row * w + f.col, f.tile);

  // Propagate to fixpoint: a candidate survives only if every in-grid
  // neighbor still has a compatible candidate.
  std::vector<char> queued(total, 1);
  std::vector<int> work(total);
  for (int i = 0; i < total; ++i) work[i] = i;
  std::size_t head = 0;
  auto enqueue = [&](int cell) {
    if (!queued[cell]) {
      queued[cell] = 1;
      work.push_back(cell);
    }
  };
  while (head < work.size()) {
    int cell = work[head++];
    queued[cell] = 0;
    int r = cell / w, c = cell % w;
    bool changed = false;
    for (int t = 0; t < ts.n; ++t) {
      if (!dom.has(cell, t)) continue;
      bool ok =
          (c == 0 || dom.intersects(cell - 1, pb.row(pb.east_of, t))) &&
          (c == w - 1 || dom.intersects(cell + 1, pb.row(pb.west_of, t))) &&
          (r == 0 || dom.intersects(cell - w, pb.row(pb.south_of, t))) &&
          (r == hgt - 1 || dom.intersects(cell + w, pb.row(pb.north_of, t)));
      if (!ok) {
        dom.remove(cell, t);
        changed = true;
      }
    }
    if (changed) {
      if (dom.empty(cell)) {
        res.status = TileStatus::No;
        return res;
      }
      if (c > 0) enqueue(cell - 1);
      if (c < w - 1) enqueue(cell + 1);
      if (r > 0) enqueue(cell - w);
      if (r < hgt - 1) enqueue(cell + w);
    }
  }

  // Row-major search with forward checks against the propagated domains.
  std::vector<std::vector<int>> g(hgt, std::vector<int>(w, -1));
  std::vector<int> choice(total, -1);
  int pos = 0;
  while (true) {
    if (pos == total) {
      res.status = TileStatus::Yes;
      res.grid = g;
      return res;
    }
    int r = pos / w, c = pos % w;
    int t = choice[pos] + 1;
    bool placed = false;
    for (; t < ts.n; ++t) {
      if (!dom.has(pos, t)) continue;
      if (++res.nodes > budget) {
        res.status = TileStatus::BudgetExceeded;
        return res;
      }
      if (c > 0 && !ts.h_ok(g[r][c - 1], t)) continue;
      if (r > 0 && !ts.v_ok(g[r - 1][c], t)) continue;
      if (c < w - 1 && !dom.intersects(pos + 1, pb.row(pb.west_of, t))) continue;
      if (r < hgt - 1 && !dom.intersects(pos + w, pb.row(pb.north_of, t))) continue;
      placed = true;
      break;
    }
    if (placed) {
      choice[pos] = t;
      g[r][c] = t;
      ++pos;
    } else {
      choice[pos] = -1;
      g[r][c] = -1;
      if (--pos < 0) {
        res.status = TileStatus::No;
        return res;
      }
    }
  }
}

inline TilingResult can_tile_square(const TileSet& ts, int n,
                                    std::uint64_t budget = 50'000'000,
                                    std::optional<int> anchor_tile = std::nullopt) {
  std::vector<ForcedCell> forced;
  if (anchor_tile) forced.push_back({n / 2, n / 2, *anchor_tile});
  return can_tile_rect(ts, n, n, budget, forced);
}

struct SweepResult {
  int max_yes = 0;  // largest n with Yes (0 if none)
  std::vector<TileStatus> outcomes;  // index n-1
  bool budget_hit = false;
};

inline SweepResult max_square_tiling(const TileSet& ts, int n_max,
                                     std::uint64_t budget = 50'000'000,
                                     std::optional<int> anchor_tile = std::nullopt) {
  SweepResult sw;
  for (int n = 1; n <= n_max; ++n) {
    auto r = can_tile_square(ts, n, budget, anchor_tile);
    sw.outcomes.push_back(r.status);
    if (r.status == TileStatus::Yes) sw.max_yes = n;
    if (r.status == TileStatus::BudgetExceeded) sw.budget_hit = true;
  }
  return sw;
}

// --- Turing machines ---------------------------------------------------------

struct TmAction {
  int state = 0;
  std::string write;
  char move = 'S';  // L, R, S
};

struct TuringMachine {
  int nstates = 0;
  std::string blank;
  std::set<int> halting;
  int init = 0;
  std::map<std::pair<int, std::string>, TmAction> delta;
  std::vector<std::string> symbols;  // blank first, then by appearance

  int symbol_id(const std::string& s) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
      if (symbols[i] == s) return static_cast<int>(i);
    return -1;
  }

  // Direct simulation on a right-unbounded tape. The head cannot move left of
  // the origin: attempting to is "stuck", same as halting, matching the
  // compiled tile sets where a leftward signal into the alpha column has no
  // admissible neighbor. Returns steps until stuck, nullopt if still running
  // after `max_steps`.
  std::optional<int> run(const std::vector<std::string>& input, int max_steps) const {
    std::vector<std::string> tape = input;
    int head = 0, q = init;
    for (int step = 0; step <= max_steps; ++step) {
      if (head >= static_cast<int>(tape.size())) tape.resize(head + 1, blank);
      auto it = delta.find({q, tape[head]});
      if (it == delta.end() || halting.count(q)) return step;
      if (it->second.move == 'L' && head == 0) return step;  // wall
      tape[head] = it->second.write;
      q = it->second.state;
      if (it->second.move == 'R') ++head;
      if (it->second.move == 'L') --head;
    }
    return std::nullopt;
  }
};

// Text format:
//   states <n>
//   blank <sym>
//   init <q>            (optional, default 0)
//   halt <q> [<q> ...]  (optional)
//   d <q> <sym> <q'> <sym'> <L|R|S>
inline TuringMachine parse_tm(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  TuringMachine m;
  bool have_states = false, have_blank = false;
  int lineno = 0;
  auto state_id = [&](const std::string& tok) {
    int v = std::stoi(tok);
    if (v < 0 || v >= m.nstates)
      throw ParseError("line " + std::to_string(lineno) + ": state out of range");
    return v;
  };
  auto note_symbol = [&](const std::string& s) {
    if (m.symbol_id(s) < 0) m.symbols.push_back(s);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto p = split_ws(t);
    if (p[0] == "states" && p.size() == 2) {
      m.nstates = std::stoi(p[1]);
      if (m.nstates <= 0) throw ParseError("need at least one state");
      have_states = true;
    } else if (p[0] == "blank" && p.size() == 2) {
      m.blank = p[1];
      m.symbols.insert(m.symbols.begin(), p[1]);
      have_blank = true;
    } else if (p[0] == "init" && p.size() == 2) {
      m.init = state_id(p[1]);
    } else if (p[0] == "halt" && p.size() >= 2) {
      for (std::size_t i = 1; i < p.size(); ++i) m.halting.insert(state_id(p[i]));
    } else if (p[0] == "d" && p.size() == 6) {
      if (!have_states || !have_blank)
        throw ParseError("states/blank must precede transitions");
      int q = state_id(p[1]);
      note_symbol(p[2]);
      TmAction a;
      a.state = state_id(p[3]);
      a.write = p[4];
      note_symbol(p[4]);
      if (p[5] != "L" && p[5] != "R" && p[5] != "S")
        throw ParseError("line " + std::to_string(lineno) + ": move must be L, R or S");
      a.move = p[5][0];
      if (!m.delta.emplace(std::make_pair(q, p[2]), a).second)
        throw ParseError("line " + std::to_string(lineno) + ": duplicate transition");
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unrecognized directive");
    }
  }
  if (!have_states || !have_blank) throw ParseError("missing states/blank header");
  for (int q : m.halting)
    for (const auto& [key, act] : m.delta)
      if (key.first == q) throw ParseError("halting state has a transition");
  return m;
}

inline std::string format_tm(const TuringMachine& m) {
  std::ostringstream out;
  out << "states " << m.nstates << "\nblank " << m.blank << "\n";
  if (m.init != 0) out << "init " << m.init << "\n";
  if (!m.halting.empty()) {
    out << "halt";
    for (int q : m.halting) out << " " << q;
    out << "\n";
  }
  for (const auto& [key, a] : m.delta)
    out << "d " << key.first << " " << key.second << " " << a.state << " "
        << a.write << " " << a.move << "\n";
  return out.str();
}

// --- TM -> tile set ----------------------------------------------------------
//
// Time flows upward; tape content lives on the horizontal edges between rows.
// One machine step takes two rows: an action row that writes the cell and
// emits a move signal sideways, and a settle row that parks the head at the
// new column (so the head column changes by at most one between consecutive
// rows, and only every second row). Halting pairs (q,s) have no action tile,
// so no row can sit above an edge carrying their settled-head color. A row
// containing alpha reads (junk)* alpha w blank* within any bounded window:
// alpha emits a head-start color east, the input zone materializes w with the
// head over its first cell, and the column above alpha is walled off so the
// head cannot cross it leftward.
inline TileSet tm_to_tileset(const TuringMachine& m) {
  struct Proto {
    std::string s, n, w, e, label;
  };
  std::vector<Proto> tiles;
  auto csym = [](const std::string& s) { return "c:" + s; };
  auto hcol = [](int q, const std::string& s) {
    return "h:" + std::to_string(q) + ":" + s;
  };
  auto mcol = [](int q, const std::string& s) {
    return "m:" + std::to_string(q) + ":" + s;
  };
  auto sig = [](char side, int q) {
    return std::string(side == 'L' ? "sl:" : "sr:") + std::to_string(q);
  };

  int beta = -1;
  for (const auto& s : m.symbols) {
    if (s == m.blank) beta = static_cast<int>(tiles.size());
    tiles.push_back({csym(s), csym(s), "BZ", "BZ", "tape:" + s});
  }

  std::set<int> r_targets, l_targets;
  for (const auto& [key, a] : m.delta) {
    const auto& [q, s] = key;
    Proto t;
    t.s = hcol(q, s);
    t.label = "act:" + std::to_string(q) + ":" + s;
    if (a.move == 'S') {
      t.n = hcol(a.state, a.write);
      t.w = "BZ";
      t.e = "BZ";
    } else if (a.move == 'R') {
      t.n = csym(a.write);
      t.w = "BZ";
      t.e = sig('R', a.state);
      r_targets.insert(a.state);
    } else {
      t.n = csym(a.write);
      t.w = sig('L', a.state);
      t.e = "BZ";
      l_targets.insert(a.state);
    }
    tiles.push_back(t);
  }

  std::set<int> movers = r_targets;
  movers.insert(l_targets.begin(), l_targets.end());
  for (int q : r_targets)
    for (const auto& s : m.symbols)
      tiles.push_back({csym(s), mcol(q, s), sig('R', q), "BZ",
                       "carry-r:" + std::to_string(q) + ":" + s});
  for (int q : l_targets)
    for (const auto& s : m.symbols)
      tiles.push_back({csym(s), mcol(q, s), "BZ", sig('L', q),
                       "carry-l:" + std::to_string(q) + ":" + s});
  for (int q : movers)
    for (const auto& s : m.symbols)
      tiles.push_back({mcol(q, s), hcol(q, s), "BZ", "BZ",
                       "settle:" + std::to_string(q) + ":" + s});

  int alpha = static_cast<int>(tiles.size());
  tiles.push_back({csym(m.blank), "aC", "BZ", "HD", "alpha"});
  for (const auto& s : m.symbols)
    tiles.push_back({csym(m.blank), hcol(m.init, s), "HD", "IZ", "head0:" + s});
  for (const auto& s : m.symbols)
    if (s != m.blank)
      tiles.push_back({csym(m.blank), csym(s), "IZ", "IZ", "input:" + s});
  tiles.push_back({csym(m.blank), csym(m.blank), "IZ", "BZ", "input-end"});
  tiles.push_back({"aC", "aC", "BZ", "BZ", "alpha-column"});

  TileSet ts = TileSet::empty(static_cast<int>(tiles.size()));
  ts.alpha = alpha;
  ts.beta = beta;
  for (int i = 0; i < ts.n; ++i) {
    ts.labels[i] = tiles[i].label;
    for (int j = 0; j < ts.n; ++j) {
      if (tiles[i].e == tiles[j].w) ts.allow_h(i, j);
      if (tiles[i].s == tiles[j].n) ts.allow_v(i, j);  // i north of j
    }
  }
  return ts;
}

}  // namespace cadyn
