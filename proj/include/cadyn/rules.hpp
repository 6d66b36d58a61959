#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cadyn/lattice.hpp"
#include "cadyn/sft.hpp"
#include "cadyn/tiles.hpp"
#include "cadyn/util.hpp"

namespace cadyn {

struct RuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- movement/keep rule table over collapsed cell classes -------------------

// Class tokens: 0, U, D, any solid. Matchers are bitmasks over the four.
enum class CellToken : std::uint8_t { Zero = 0, U = 1, D = 2, Solid = 3 };

enum class Fig2Out : std::uint8_t { Keep, MakeU, MakeD };

struct Fig2Entry {
  std::array<std::uint8_t, 9> pat;  // NW,N,NE,W,C,E,SW,S,SE masks
  Fig2Out out;
};

namespace detail {

inline std::uint8_t tok_mask(char c) {
  switch (c) {
    case '0': return 1;
    case 'U': return 2;
    case 'D': return 4;
    case 'S': return 8;
    case 'L': return 7;   // {0,U,D}
    case 'a': return 9;   // {0,S}
    case 'b': return 13;  // {0,D,S}
    case 'c': return 11;  // {0,U,S}
    default: return 0;
  }
}

inline Fig2Entry entry(const char* pat, Fig2Out out) {
  Fig2Entry e{};
  for (int i = 0; i < 9; ++i) e.pat[i] = tok_mask(pat[i]);
  e.out = out;
  return e;
}

inline Fig2Entry rotate_cw(const Fig2Entry& e) {
  Fig2Entry r{};
  r.out = e.out;
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      r.pat[row * 3 + col] = e.pat[(2 - col) * 3 + row];
  return r;
}

}  // namespace detail

// The keep entries (solid corner, solid edge, solid interior — the first two
// closed under rotation) followed by the particle-movement entries.
inline const std::vector<Fig2Entry>& fig2_table() {
  static const std::vector<Fig2Entry> table = [] {
    using detail::entry;
    std::vector<Fig2Entry> t;
    auto push_rotations = [&t](Fig2Entry e) {
      t.push_back(e);
      for (int i = 0; i < 3; ++i) {
        e = detail::rotate_cw(e);
        t.push_back(e);
      }
    };
    push_rotations(entry("LLLSSLSSL", Fig2Out::Keep));  // corner keep
    push_rotations(entry("SSLSSLSSL", Fig2Out::Keep));  // edge keep
    t.push_back(entry("SSSSSSSSS", Fig2Out::Keep));     // interior keep
    t.push_back(entry("a00S00SU0", Fig2Out::MakeU));
    t.push_back(entry("000000SU0", Fig2Out::MakeU));
    t.push_back(entry("00000USSb", Fig2Out::MakeU));
    t.push_back(entry("00000U0aS", Fig2Out::MakeU));
    t.push_back(entry("0Ua00S00S", Fig2Out::MakeU));
    t.push_back(entry("0US00S00D", Fig2Out::MakeU));
    t.push_back(entry("SD0S00a00", Fig2Out::MakeD));
    t.push_back(entry("SD0000000", Fig2Out::MakeD));
    t.push_back(entry("SSc00D000", Fig2Out::MakeD));
    t.push_back(entry("0aS00D000", Fig2Out::MakeD));
    t.push_back(entry("00S00S0Da", Fig2Out::MakeD));
    t.push_back(entry("00U00S0DS", Fig2Out::MakeD));
    t.push_back(entry("aaUa0Daaa", Fig2Out::MakeD));
    t.push_back(entry("aaaa0UaaD", Fig2Out::MakeU));
    return t;
  }();
  return table;
}

inline std::optional<Fig2Out> fig2_match(const std::vector<Fig2Entry>& table,
                                         const std::array<std::uint8_t, 9>& w) {
  for (const auto& e : table) {
    bool ok = true;
    for (int i = 0; i < 9 && ok; ++i) ok = e.pat[i] & 1 << w[i];
    if (ok) return e.out;
  }
  return std::nullopt;
}

// --- 1D rules ----------------------------------------------------------------

struct Rule1D {
  AlphabetRef alphabet;  // one-dimensional alphabet, states 0..k-1
  int k = 0, radius = 1;
  std::vector<State> table;  // size k^(2r+1), window index west-to-east

  std::size_t window_index(const std::vector<State>& w) const {
    std::size_t i = 0;
    for (State s : w) i = i * k + s;
    return i;
  }
  State apply(const std::vector<State>& w) const { return table[window_index(w)]; }
};

inline Rule1D make_rule1d(int k, int radius) {
  Rule1D r;
  r.k = k;
  r.radius = radius;
  r.alphabet = Alphabet::make_one_d(k);
  std::size_t size = 1;
  for (int i = 0; i < 2 * radius + 1; ++i) size *= k;
  r.table.assign(size, 0);
  return r;
}

inline Rule1D rule1d_identity(int k, int radius = 1) {
  Rule1D r = make_rule1d(k, radius);
  int span = 2 * radius + 1;
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    std::size_t v = i;
    for (int pos = span - 1; pos > radius; --pos) v /= k;
    r.table[i] = static_cast<State>(v % k);
  }
  return r;
}

// Content moves west: f(w) = east neighbor.
inline Rule1D rule1d_left_shift(int k) {
  Rule1D r = make_rule1d(k, 1);
  for (std::size_t i = 0; i < r.table.size(); ++i)
    r.table[i] = static_cast<State>(i % k);
  return r;
}

// State q is a wall: f(a,q,c) = q, otherwise the left shift.
inline Rule1D rule1d_wall(int k, State q) {
  Rule1D r = rule1d_left_shift(k);
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    State center = static_cast<State>(i / k % k);
    if (center == q) r.table[i] = q;
  }
  return r;
}

// Text format:
//   alphabet <k>
//   radius <r>
//   default <out>
//   t <w_0> ... <w_2r> <out>
inline Rule1D parse_rule_1d(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int k = -1, radius = -1;
  bool have_default = false;
  State def = 0;
  std::vector<std::pair<std::vector<State>, State>> entries;
  auto parse_int = [](const std::string& s, const char* what) {
    try {
      return std::stoi(s);
    } catch (...) {
      throw ParseError(std::string("rule1d: bad ") + what + " '" + s + "'");
    }
  };
  auto parse_sym = [&](const std::string& s) {
    int v = parse_int(s, "symbol");
    if (v < 0 || v >= k) throw ParseError("rule1d: symbol out of range");
    return static_cast<State>(v);
  };
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty() || line[0] == '#') continue;
    auto parts = split_ws(line);
    if (parts[0] == "alphabet" && parts.size() == 2) {
      k = parse_int(parts[1], "alphabet size");
      if (k < 1 || k > 64) throw ParseError("rule1d: bad alphabet size");
    } else if (parts[0] == "radius" && parts.size() == 2) {
      radius = parse_int(parts[1], "radius");
      if (radius < 0 || radius > 3) throw ParseError("rule1d: bad radius");
    } else if (parts[0] == "default" && parts.size() == 2) {
      if (k < 0) throw ParseError("rule1d: default before alphabet");
      def = parse_sym(parts[1]);
      have_default = true;
    } else if (parts[0] == "t") {
      if (k < 0 || radius < 0)
        throw ParseError("rule1d: t before alphabet/radius");
      if (static_cast<int>(parts.size()) != 2 * radius + 3)
        throw ParseError("rule1d: bad t arity");
      std::vector<State> w;
      for (int i = 1; i <= 2 * radius + 1; ++i) w.push_back(parse_sym(parts[i]));
      entries.emplace_back(std::move(w), parse_sym(parts.back()));
    } else {
      throw ParseError("rule1d: bad line '" + line + "'");
    }
  }
  if (k < 0 || radius < 0) throw ParseError("rule1d: missing alphabet/radius");
  Rule1D r = make_rule1d(k, radius);
  std::vector<char> seen(r.table.size(), 0);
  for (auto& [w, out] : entries) {
    std::size_t i = r.window_index(w);
    if (seen[i]) throw ParseError("rule1d: duplicate entry");
    seen[i] = 1;
    r.table[i] = out;
  }
  if (!have_default) {
    for (char s : seen)
      if (!s) throw ParseError("rule1d: incomplete table without default");
  } else {
    for (std::size_t i = 0; i < r.table.size(); ++i)
      if (!seen[i]) r.table[i] = def;
  }
  return r;
}

inline std::string format_rule_1d(const Rule1D& r) {
  std::ostringstream out;
  out << "alphabet " << r.k << "\n";
  out << "radius " << r.radius << "\n";
  int span = 2 * r.radius + 1;
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    out << "t";
    std::vector<int> w(span);
    std::size_t v = i;
    for (int pos = span - 1; pos >= 0; --pos) {
      w[pos] = static_cast<int>(v % r.k);
      v /= r.k;
    }
    for (int s : w) out << " " << s;
    out << " " << r.table[i] << "\n";
  }
  return out.str();
}

// --- the 2D rules ------------------------------------------------------------

enum class RuleKind { F, FTau, GTau, HTau, GHat, Lifted1D, Custom };

class CARule {
 public:
  RuleKind kind = RuleKind::F;
  AlphabetRef alphabet;
  int radius = 2;
  LocalLanguage lang;       // language behind rule case 1
  LocalLanguage lang_obst;  // secondary language (mixed-alphabet rule only)
  std::vector<Fig2Entry> fig2;
  Rule1D rule1d;  // lifted kind only

  State u_state = 0, d_state = 0;
  std::vector<std::uint8_t> cls;  // state -> CellToken
  std::vector<std::uint8_t> fam;  // state -> 0 liquid, 1 plain solid, 2 tiled

  State keep_or(State center, Fig2Out out) const {
    switch (out) {
      case Fig2Out::MakeU: return u_state;
      case Fig2Out::MakeD: return d_state;
      default: return center;
    }
  }
};

namespace detail {

inline void fill_classes(CARule& r) {
  const Alphabet& a = *r.alphabet;
  r.u_state = a.require("U");
  r.d_state = a.require("D");
  r.cls.resize(a.size());
  r.fam.resize(a.size());
  for (State s = 0; s < a.size(); ++s) {
    const StateInfo& info = a.info(s);
    if (info.cls == CellClass::Liquid) {
      r.cls[s] = static_cast<std::uint8_t>(
          info.name == "U" ? CellToken::U
                           : info.name == "D" ? CellToken::D : CellToken::Zero);
      r.fam[s] = 0;
    } else {
      r.cls[s] = static_cast<std::uint8_t>(CellToken::Solid);
      r.fam[s] = info.tile >= 0 ? 2 : 1;
    }
  }
}

}  // namespace detail

inline CARule rule_f() {
  CARule r;
  r.kind = RuleKind::F;
  r.alphabet = Alphabet::make_f();
  r.lang = generate_sigma_S();
  r.fig2 = fig2_table();
  detail::fill_classes(r);
  return r;
}

inline CARule rule_f_tau(const TileSet& tau) {
  CARule r;
  r.kind = RuleKind::FTau;
  r.alphabet = Alphabet::make_f_tau(tau.n);
  r.lang = generate_sigma_S_tau(tau);
  r.fig2 = fig2_table();
  detail::fill_classes(r);
  return r;
}

inline CARule rule_g_tau(const TileSet& tau) {
  CARule r;
  r.kind = RuleKind::GTau;
  r.alphabet = Alphabet::make_g_tau(tau.n);
  r.lang = generate_sigma_obst(tau);
  r.fig2 = fig2_table();
  detail::fill_classes(r);
  return r;
}

inline CARule rule_h_tau(const TileSet& tau) {
  CARule r;
  r.kind = RuleKind::HTau;
  r.alphabet = Alphabet::make_h_tau(tau.n);
  r.lang = generate_sigma_S();
  r.lang_obst = generate_sigma_obst(tau);
  r.fig2 = fig2_table();
  detail::fill_classes(r);
  return r;
}

inline CARule rule_g_hat(const TileSet& tau, int alpha = -1, int beta = -1) {
  if (alpha < 0) alpha = tau.alpha;
  if (beta < 0) beta = tau.beta;
  if (alpha < 0 || beta < 0)
    throw RuleError("rule_g_hat: tile set lacks designated alpha/beta");
  CARule r;
  r.kind = RuleKind::GHat;
  r.alphabet = Alphabet::make_g_tau(tau.n);
  r.lang = generate_sigma_prime(tau, alpha, beta);
  r.fig2 = fig2_table();
  detail::fill_classes(r);
  return r;
}

inline CARule rule_custom(std::vector<Fig2Entry> entries) {
  CARule r;
  r.kind = RuleKind::Custom;
  r.alphabet = Alphabet::make_f();
  r.lang = generate_sigma_S();
  r.fig2 = std::move(entries);
  detail::fill_classes(r);
  return r;
}

// Canonical lift: the 2D rule reads only its own row.
inline CARule lift_1d_to_2d(Rule1D rule) {
  CARule r;
  r.kind = RuleKind::Lifted1D;
  r.alphabet = rule.alphabet;
  r.radius = rule.radius;
  r.rule1d = std::move(rule);
  r.u_state = r.d_state = 0;
  r.cls.assign(r.alphabet->size(), static_cast<std::uint8_t>(CellToken::Zero));
  r.fam.assign(r.alphabet->size(), 0);
  return r;
}

// --- local evaluation ---------------------------------------------------------

namespace detail {

// Per-instance erosion triggers of the obstacle-preserving rules, evaluated
// at cell z: (ii) some violated instance inside z's inside mask, (iii) some
// violated pair instance involving z itself.
struct GTriggers {
  bool inside = false;
  bool pair = false;
};

inline bool instance_inside_of(InstanceKind kind, Rect cells, Position a,
                               Position b, Position z, XPart zx) {
  auto cell_ok = [&](Position c) {
    Position d{c.x - z.x, c.y - z.y};
    if (d.x == 0 && d.y == 0) return true;
    if (std::max(std::abs(d.x), std::abs(d.y)) > 1) return false;
    return !is_outside_of(zx, d);
  };
  switch (kind) {
    case InstanceKind::Win3:
    case InstanceKind::X22: {
      for (int y = cells.y0; y <= cells.y1; ++y)
        for (int x = cells.x0; x <= cells.x1; ++x)
          if (!cell_ok({x, y})) return false;
      return true;
    }
    case InstanceKind::Unary:
      return cell_ok(a);
    default:
      return cell_ok(a) && cell_ok(b);
  }
}

inline bool is_pair_kind(InstanceKind k) {
  return k == InstanceKind::PairTau || k == InstanceKind::PairPi ||
         k == InstanceKind::PairBetaEast;
}

}  // namespace detail

// Applies the rule's local function to one window of side 2·radius+1.
inline State apply_local(const CARule& rule, const Window& w) {
  int side = 2 * rule.radius + 1;
  if (w.rect.width() != side || w.rect.height() != side)
    throw RuleError("apply_local: window side mismatch");
  Position z{w.rect.x0 + rule.radius, w.rect.y0 + rule.radius};
  const Alphabet& a = *rule.alphabet;

  if (rule.kind == RuleKind::Lifted1D) {
    std::vector<State> row(static_cast<std::size_t>(side));
    for (int i = 0; i < side; ++i) row[i] = w.at({w.rect.x0 + i, z.y});
    return rule.rule1d.apply(row);
  }

  auto class_window = [&](std::array<std::uint8_t, 9>& out) {
    int i = 0;
    for (int dy = 1; dy >= -1; --dy)
      for (int dx = -1; dx <= 1; ++dx, ++i)
        out[i] = rule.cls[w.at({z.x + dx, z.y + dy})];
  };

  // Case cascade shared by the plain and tiled erosion rules.
  auto run_cases = [&](const LocalLanguage& lang, bool keep_solids) -> State {
    DenseTokens dt;
    dt.box = w.rect;
    dt.w = dt.h = side;
    dt.tok.resize(w.cells.size());
    dt.xt.resize(w.cells.size());
    dt.tile.resize(w.cells.size());
    for (std::size_t i = 0; i < w.cells.size(); ++i) {
      dt.tok[i] = lang.token(a, w.cells[i]);
      dt.xt[i] = lang.xtoken(a, w.cells[i]);
      dt.tile[i] = a.info(w.cells[i]).tile;
    }
    bool violated = false;
    detail::GTriggers trig;
    bool z_solid = rule.cls[w.at(z)] == static_cast<std::uint8_t>(CellToken::Solid);
    XPart zx = XPart::Bt;
    if (int xp = a.info(w.at(z)).xpart; xp >= 0) zx = static_cast<XPart>(xp);
    // Confined enumeration: only instances fully inside the window count.
    for_each_violated_instance(
        lang, dt, w.rect, [&](InstanceKind k, Rect cells, Position pa, Position pb) {
          if (!w.rect.contains({cells.x0, cells.y0}) ||
              !w.rect.contains({cells.x1, cells.y1}))
            return;
          violated = true;
          if (!z_solid) return;
          if (detail::is_pair_kind(k) && (pa == z || pb == z)) trig.pair = true;
          if (!trig.inside && detail::instance_inside_of(k, cells, pa, pb, z, zx))
            trig.inside = true;
        });
    State center = w.at(z);
    if (violated) {
      if (keep_solids && z_solid) return trig.inside || trig.pair ? 0 : center;
      return 0;
    }
    std::array<std::uint8_t, 9> cw;
    class_window(cw);
    if (auto out = fig2_match(rule.fig2, cw)) return rule.keep_or(center, *out);
    return keep_solids && z_solid ? center : 0;
  };

  switch (rule.kind) {
    case RuleKind::F:
    case RuleKind::FTau:
    case RuleKind::Custom:
      return run_cases(rule.lang, false);
    case RuleKind::GTau:
    case RuleKind::GHat:
      return run_cases(rule.lang, true);
    case RuleKind::HTau: {
      bool any_plain = false, any_tiled = false;
      for (State s : w.cells) {
        if (rule.fam[s] == 1) any_plain = true;
        if (rule.fam[s] == 2) any_tiled = true;
      }
      if (any_plain && any_tiled) return 0;
      if (any_tiled) return run_cases(rule.lang_obst, true);
      return run_cases(rule.lang, false);
    }
    default:
      throw RuleError("apply_local: unsupported rule kind");
  }
}

// --- the stepping engine -------------------------------------------------------

namespace detail {

struct DenseStates {
  Rect box{0, 0, -1, -1};
  int w = 0;
  State bg = 0;
  std::vector<State> st;

  State at(Position p) const {
    if (!box.contains(p)) return bg;
    return st[static_cast<std::size_t>(box.y1 - p.y) * w + (p.x - box.x0)];
  }
};

inline DenseStates make_dense_states(const Configuration& cfg, Rect box) {
  DenseStates d;
  d.box = box;
  d.w = static_cast<int>(box.width());
  d.bg = cfg.background();
  d.st.assign(static_cast<std::size_t>(box.width()) * box.height(), d.bg);
  for (const auto& [p, s] : cfg.cells())
    if (box.contains(p))
      d.st[static_cast<std::size_t>(box.y1 - p.y) * d.w + (p.x - box.x0)] = s;
  return d;
}

// Per-candidate flags for one language: bit 0 violated-in-5x5, bit 1 inside
// trigger, bit 2 pair trigger.
struct LangFlags {
  Rect box{0, 0, -1, -1};
  int w = 0;
  std::vector<std::uint8_t> bits;

  void init(Rect b) {
    box = b;
    w = static_cast<int>(b.width());
    bits.assign(static_cast<std::size_t>(b.width()) * b.height(), 0);
  }
  void mark(Position p, std::uint8_t m) {
    if (box.contains(p))
      bits[static_cast<std::size_t>(box.y1 - p.y) * w + (p.x - box.x0)] |= m;
  }
  std::uint8_t get(Position p) const {
    if (!box.contains(p)) return 0;
    return bits[static_cast<std::size_t>(box.y1 - p.y) * w + (p.x - box.x0)];
  }
};

inline void build_lang_flags(const LocalLanguage& lang,
                             const Configuration& cfg, Rect zbox, Rect dbox,
                             bool with_triggers, LangFlags& out) {
  out.init(zbox);
  DenseTokens dt = make_dense_tokens(lang, cfg, dbox);
  for_each_violated_instance(
      lang, dt, dbox, [&](InstanceKind k, Rect cells, Position pa, Position pb) {
        for (int y = std::max(cells.y1 - 2, zbox.y0);
             y <= std::min(cells.y0 + 2, zbox.y1); ++y)
          for (int x = std::max(cells.x1 - 2, zbox.x0);
               x <= std::min(cells.x0 + 2, zbox.x1); ++x)
            out.mark({x, y}, 1);
        if (!with_triggers) return;
        if (is_pair_kind(k)) {
          if (dt.x_at(pa) < kLiquidX) out.mark(pa, 4);
          if (dt.x_at(pb) < kLiquidX) out.mark(pb, 4);
        }
        for (int y = cells.y1 - 1; y <= cells.y0 + 1; ++y)
          for (int x = cells.x1 - 1; x <= cells.x0 + 1; ++x) {
            Position zz{x, y};
            std::uint8_t zx = dt.x_at(zz);
            if (zx >= kLiquidX) continue;
            if (instance_inside_of(k, cells, pa, pb, zz, static_cast<XPart>(zx)))
              out.mark(zz, 2);
          }
      });
}

}  // namespace detail

// One synchronous step. `threads` = 0 picks a worker count automatically;
// parallel and sequential evaluation produce identical configurations.
inline Configuration step(const CARule& rule, const Configuration& cfg,
                          int threads = 0) {
  if (!cfg.alphabet() || !cfg.alphabet()->same_as(*rule.alphabet))
    throw RuleError("step: configuration alphabet does not match rule");
  State bg = cfg.background();
  {
    Window wq;
    wq.rect = Rect::centered({0, 0}, rule.radius);
    wq.cells.assign(static_cast<std::size_t>(wq.rect.area()), bg);
    if (apply_local(rule, wq) != bg) throw RuleError("NonQuiescentBackground");
  }
  Configuration next(cfg.alphabet(), bg);
  if (cfg.is_uniform()) return next;

  Rect bbox = cfg.bounding_box();
  Rect zbox = bbox.grown(rule.radius);
  Rect dbox = bbox.grown(2 * rule.radius);
  detail::DenseStates ds = detail::make_dense_states(cfg, dbox);

  detail::LangFlags fa, fb;
  bool erosion_keep = rule.kind == RuleKind::GTau || rule.kind == RuleKind::GHat;
  if (rule.kind != RuleKind::Lifted1D) {
    detail::build_lang_flags(rule.lang, cfg, zbox, dbox, erosion_keep, fa);
    if (rule.kind == RuleKind::HTau)
      detail::build_lang_flags(rule.lang_obst, cfg, zbox, dbox, true, fb);
  }

  auto eval_cascade = [&](Position z, const detail::LangFlags& flags,
                          bool keep_solids) -> State {
    State center = ds.at(z);
    bool z_solid =
        rule.cls[center] == static_cast<std::uint8_t>(CellToken::Solid);
    std::uint8_t f = flags.get(z);
    if (f & 1) {
      if (keep_solids && z_solid) return f & 6 ? 0 : center;
      return 0;
    }
    std::array<std::uint8_t, 9> cw;
    int i = 0;
    for (int dy = 1; dy >= -1; --dy)
      for (int dx = -1; dx <= 1; ++dx, ++i) cw[i] = rule.cls[ds.at({z.x + dx, z.y + dy})];
    if (auto out = fig2_match(rule.fig2, cw)) return rule.keep_or(center, *out);
    return keep_solids && z_solid ? center : 0;
  };

  auto eval_cell = [&](Position z) -> State {
    switch (rule.kind) {
      case RuleKind::Lifted1D: {
        int span = 2 * rule.radius + 1;
        std::vector<State> row(static_cast<std::size_t>(span));
        for (int i = 0; i < span; ++i)
          row[i] = ds.at({z.x - rule.radius + i, z.y});
        return rule.rule1d.apply(row);
      }
      case RuleKind::HTau: {
        bool any_plain = false, any_tiled = false;
        for (int dy = -2; dy <= 2; ++dy)
          for (int dx = -2; dx <= 2; ++dx) {
            std::uint8_t fm = rule.fam[ds.at({z.x + dx, z.y + dy})];
            if (fm == 1) any_plain = true;
            if (fm == 2) any_tiled = true;
          }
        if (any_plain && any_tiled) return 0;
        if (any_tiled) return eval_cascade(z, fb, true);
        return eval_cascade(z, fa, false);
      }
      default:
        return eval_cascade(z, fa, erosion_keep);
    }
  };

  int rows = static_cast<int>(zbox.height());
  int nthreads = threads > 0 ? threads
                             : static_cast<int>(std::max(
                                   1u, std::thread::hardware_concurrency()));
  nthreads = std::min(nthreads, 8);
  nthreads = std::min(nthreads, rows);
  if (static_cast<long long>(rows) * zbox.width() < 4096) nthreads = 1;

  std::vector<std::vector<std::pair<Position, State>>> parts(
      static_cast<std::size_t>(nthreads));
  auto work = [&](int id) {
    auto& out = parts[static_cast<std::size_t>(id)];
    for (int row = id; row < rows; row += nthreads) {
      int y = zbox.y1 - row;
      for (int x = zbox.x0; x <= zbox.x1; ++x) {
        State s = eval_cell({x, y});
        if (s != bg) out.emplace_back(Position{x, y}, s);
      }
    }
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(work, i);
    for (auto& t : pool) t.join();
  }
  for (const auto& part : parts)
    for (const auto& [p, s] : part) next.set(p, s);
  return next;
}

inline Configuration iterate(const CARule& rule, Configuration cfg, int t,
                             int threads = 0) {
  for (int i = 0; i < t; ++i) cfg = step(rule, cfg, threads);
  return cfg;
}

// Iterates and hands every configuration (including the initial one) to fn.
template <typename Fn>
Configuration iterate_trace(const CARule& rule, Configuration cfg, int t,
                            Fn&& fn, int threads = 0) {
  fn(0, cfg);
  for (int i = 1; i <= t; ++i) {
    cfg = step(rule, cfg, threads);
    fn(i, cfg);
  }
  return cfg;
}

// --- rule-table verification ---------------------------------------------------

struct TableConflict {
  std::uint32_t window;  // base-4 class window, NW-first digits
  int entry_a, entry_b;
  Fig2Out out_a, out_b;
};

struct RuleTableReport {
  std::uint64_t windows = 0;
  std::uint64_t conflict_windows = 0;
  std::vector<TableConflict> sample;  // first few conflicts

  bool clean() const { return conflict_windows == 0; }
};

// Exhaustively enumerates all 4^9 collapsed class windows and reports windows
// matched by two table entries with different outputs.
inline RuleTableReport verify_rule_table(const CARule& rule) {
  RuleTableReport rep;
  const auto& table = rule.fig2;
  std::array<std::uint8_t, 9> w{};
  for (std::uint32_t code = 0; code < 262144; ++code) {
    std::uint32_t v = code;
    for (int i = 8; i >= 0; --i) {
      w[i] = static_cast<std::uint8_t>(v & 3);
      v >>= 2;
    }
    ++rep.windows;
    int first = -1;
    bool conflict = false;
    for (int e = 0; e < static_cast<int>(table.size()); ++e) {
      bool ok = true;
      for (int i = 0; i < 9 && ok; ++i) ok = table[e].pat[i] & 1 << w[i];
      if (!ok) continue;
      if (first < 0) {
        first = e;
      } else if (table[e].out != table[first].out) {
        conflict = true;
        if (rep.sample.size() < 32)
          rep.sample.push_back(
              {code, first, e, table[first].out, table[e].out});
        break;
      }
    }
    if (conflict) ++rep.conflict_windows;
  }
  return rep;
}

}  // namespace cadyn
