#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cadyn/lattice.hpp"
#include "cadyn/tiles.hpp"

namespace cadyn {

struct SftError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LanguageKind { SigmaS, SigmaSTau, SigmaObstTau, SigmaPrime };

enum class ViolationReason { BadWindow, BadPair, BadInside };

struct ViolationItem {
  Position pos;
  ViolationReason reason;
  bool operator==(const ViolationItem&) const = default;
};

struct ViolationReport {
  std::vector<ViolationItem> items;  // row-major: north row first, west to east
  bool empty() const { return items.empty(); }
};

// Violation instances — minimal witnessing cell sets, used both for scan
// reports and for the erosion triggers of the obstacle-preserving rules.
enum class InstanceKind { Win3, X22, PairTau, PairPi, Unary, PairBetaEast };

inline ViolationReason reason_of(InstanceKind k) {
  switch (k) {
    case InstanceKind::Win3:
    case InstanceKind::Unary:
      return ViolationReason::BadWindow;
    case InstanceKind::X22:
      return ViolationReason::BadInside;
    default:
      return ViolationReason::BadPair;
  }
}

// Concentric border-layer field of an odd square: arrows point inward, the
// center carries the bottom mark.
inline XPart onion_xpart(int dx, int dy) {
  int ax = std::abs(dx), ay = std::abs(dy);
  if (ax == 0 && ay == 0) return XPart::Bt;
  if (ax > ay) return dx < 0 ? XPart::Rt : XPart::Lf;
  if (ay > ax) return dy > 0 ? XPart::Dn : XPart::Up;
  if (dx < 0) return dy > 0 ? XPart::Dr : XPart::Ur;
  return dy > 0 ? XPart::Dl : XPart::Ul;
}

// Neighbor offsets on the far side of an arrow (Fig. 5 outside positions);
// everything else around the cell counts as inside.
inline const std::vector<Position>& outside_offsets(XPart x) {
  static const std::array<std::vector<Position>, kXParts> table = [] {
    std::array<std::vector<Position>, kXParts> t;
    auto set = [&t](XPart p, std::vector<Position> v) {
      t[static_cast<int>(p)] = std::move(v);
    };
    set(XPart::Dn, {{-1, 1}, {0, 1}, {1, 1}});
    set(XPart::Up, {{-1, -1}, {0, -1}, {1, -1}});
    set(XPart::Lf, {{1, 1}, {1, 0}, {1, -1}});
    set(XPart::Rt, {{-1, 1}, {-1, 0}, {-1, -1}});
    set(XPart::Dr, {{-1, 1}, {0, 1}, {1, 1}, {-1, 0}, {-1, -1}});
    set(XPart::Dl, {{-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}});
    set(XPart::Ur, {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {-1, 1}});
    set(XPart::Ul, {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}});
    set(XPart::Bt, {});
    return t;
  }();
  return table[static_cast<int>(x)];
}

inline bool is_outside_of(XPart x, Position delta) {
  const auto& offs = outside_offsets(x);
  return std::find(offs.begin(), offs.end(), delta) != offs.end();
}

// Scan tokens. 0 is always the liquid class; kAlienTok marks states outside
// the language's vocabulary and never matches. X-level tokens are the nine
// arrow parts plus kLiquidX for liquid; values above kLiquidX are alien.
inline constexpr std::uint8_t kAlienTok = 15;
inline constexpr std::uint8_t kLiquidX = 9;

// Canonical pair offsets for the X-level pair tables: east half-plane plus
// straight north, Chebyshev radius 2.
inline const std::array<Position, 12>& pi_offsets() {
  static const std::array<Position, 12> offs = [] {
    std::array<Position, 12> o{};
    int i = 0;
    for (int dx = 0; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy) {
        if (dx == 0 && dy <= 0) continue;
        o[i++] = Position{dx, dy};
      }
    return o;
  }();
  return offs;
}

class LocalLanguage {
 public:
  LanguageKind kind = LanguageKind::SigmaS;
  std::vector<std::uint64_t> windows;  // packed 3x3 token windows, sorted
  bool has_tau = false;
  TileSet tau;  // adjacency constraints between adjacent tile-bearing cells
  bool has_x = false;
  std::vector<std::uint16_t> x22;  // packed all-solid 2x2 X windows, sorted
  std::array<std::bitset<100>, 12> pi{};  // X-level pair tables per offset
  bool prime = false;
  int alpha = -1, beta = -1;

  bool window_ok(std::uint64_t w) const {
    return std::binary_search(windows.begin(), windows.end(), w);
  }
  bool x22_ok(std::uint16_t w) const {
    return std::binary_search(x22.begin(), x22.end(), w);
  }
  bool pi_ok(int offset_index, int a, int b) const {
    return pi[offset_index].test(a * 10 + b);
  }

  std::uint8_t token(const Alphabet& a, State s) const {
    const StateInfo& info = a.info(s);
    if (info.cls == CellClass::Liquid) return 0;
    switch (kind) {
      case LanguageKind::SigmaS:
        if (info.name == "1") return 1;
        if (info.tile < 0 && info.xpart >= 0)
          return static_cast<std::uint8_t>(2 + info.xpart);
        return kAlienTok;
      case LanguageKind::SigmaSTau:
        if (info.tile < 0 && info.xpart >= 0)
          return static_cast<std::uint8_t>(1 + info.xpart);
        if (info.tile >= 0 && info.xpart < 0) return 9;
        return kAlienTok;
      default:
        return info.tile >= 0 && info.xpart >= 0 ? 1 : kAlienTok;
    }
  }
  std::uint8_t xtoken(const Alphabet& a, State s) const {
    const StateInfo& info = a.info(s);
    if (info.cls == CellClass::Liquid) return kLiquidX;
    if (info.xpart >= 0 && info.tile >= 0)
      return static_cast<std::uint8_t>(info.xpart);
    return kLiquidX + 1;
  }
};

// Dense token view of a configuration over a box; reads outside the box fall
// back to the background's tokens.
struct DenseTokens {
  Rect box{0, 0, -1, -1};
  int w = 0, h = 0;
  std::uint8_t bg_tok = 0, bg_x = kLiquidX;
  std::int16_t bg_tile = -1;
  std::vector<std::uint8_t> tok, xt;
  std::vector<std::int16_t> tile;

  std::size_t idx(Position p) const {
    return static_cast<std::size_t>(box.y1 - p.y) * w + (p.x - box.x0);
  }
  std::uint8_t tok_at(Position p) const {
    return box.contains(p) ? tok[idx(p)] : bg_tok;
  }
  std::uint8_t x_at(Position p) const {
    return box.contains(p) ? xt[idx(p)] : bg_x;
  }
  std::int16_t tile_at(Position p) const {
    return box.contains(p) ? tile[idx(p)] : bg_tile;
  }
};

inline DenseTokens make_dense_tokens(const LocalLanguage& lang,
                                     const Configuration& cfg, Rect box) {
  DenseTokens dt;
  dt.box = box;
  dt.w = box.width();
  dt.h = box.height();
  const Alphabet& a = *cfg.alphabet();
  dt.bg_tok = lang.token(a, cfg.background());
  dt.bg_x = lang.xtoken(a, cfg.background());
  dt.bg_tile = a.info(cfg.background()).tile;
  std::size_t cells = static_cast<std::size_t>(dt.w) * dt.h;
  dt.tok.assign(cells, dt.bg_tok);
  dt.xt.assign(cells, dt.bg_x);
  dt.tile.assign(cells, dt.bg_tile);
  for (const auto& [p, s] : cfg.cells()) {
    if (!box.contains(p)) continue;
    const StateInfo& info = a.info(s);
    dt.tok[dt.idx(p)] = lang.token(a, s);
    dt.xt[dt.idx(p)] = lang.xtoken(a, s);
    dt.tile[dt.idx(p)] = info.tile;
  }
  return dt;
}

// Enumerates violated instances whose north-west cell lies in `anchors`.
// fn(kind, cell bounding rect, first cell, second cell).
template <typename Fn>
void for_each_violated_instance(const LocalLanguage& lang,
                                const DenseTokens& dt, Rect anchors, Fn&& fn) {
  const auto& offs = pi_offsets();
  for (int y = anchors.y1; y >= anchors.y0; --y) {
    for (int x = anchors.x0; x <= anchors.x1; ++x) {
      Position p{x, y};
      // 3x3 window with north-west corner at p.
      std::uint64_t w = 0;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          w = w << 4 | dt.tok_at({x + c, y - r});
      if (w != 0 && !lang.window_ok(w))
        fn(InstanceKind::Win3, Rect{x, y - 2, x + 2, y}, p, p);
      if (lang.has_tau) {
        std::int16_t t = dt.tile_at(p);
        if (t >= 0) {
          std::int16_t te = dt.tile_at(p.east());
          if (te >= 0 && !lang.tau.h_ok(t, te))
            fn(InstanceKind::PairTau, Rect{x, y, x + 1, y}, p, p.east());
          std::int16_t ts = dt.tile_at(p.south());
          if (ts >= 0 && !lang.tau.v_ok(t, ts))
            fn(InstanceKind::PairTau, Rect{x, y - 1, x, y}, p, p.south());
        }
      }
      if (lang.has_x) {
        std::uint8_t nw = dt.x_at(p), ne = dt.x_at(p.east());
        std::uint8_t sw = dt.x_at(p.south()), se = dt.x_at(p.south().east());
        if (nw < kLiquidX && ne < kLiquidX && sw < kLiquidX && se < kLiquidX) {
          std::uint16_t q = static_cast<std::uint16_t>(nw << 12 | ne << 8 |
                                                       sw << 4 | se);
          if (!lang.x22_ok(q))
            fn(InstanceKind::X22, Rect{x, y - 1, x + 1, y}, p, p);
        }
        for (int i = 0; i < 12; ++i) {
          Position q = p + offs[i];
          std::uint8_t a = nw, b = dt.x_at(q);
          if ((a == kLiquidX && b == kLiquidX) || a > kLiquidX || b > kLiquidX)
            continue;
          if (!lang.pi_ok(i, a, b))
            fn(InstanceKind::PairPi,
               Rect{std::min(x, q.x), std::min(y, q.y), std::max(x, q.x),
                    std::max(y, q.y)},
               p, q);
        }
      }
      if (lang.prime) {
        std::int16_t t = dt.tile_at(p);
        if (t >= 0 && dt.x_at(p) == static_cast<int>(XPart::Bt) &&
            t != lang.alpha)
          fn(InstanceKind::Unary, Rect{x, y, x, y}, p, p);
        if (t >= 0 && t != lang.beta && dt.tok_at(p.east()) == 0)
          fn(InstanceKind::PairBetaEast, Rect{x, y, x + 1, y}, p, p.east());
      }
    }
  }
}

// Positions in `region` whose radius-2 box contains a violated instance.
inline ViolationReport scan_violations(const LocalLanguage& lang,
                                       const Configuration& cfg, Rect region) {
  ViolationReport rep;
  if (region.empty()) return rep;
  DenseTokens dt = make_dense_tokens(lang, cfg, region.grown(6));
  int rw = region.width();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(rw) *
                                 region.height());
  for_each_violated_instance(
      lang, dt, region.grown(4),
      [&](InstanceKind k, Rect cells, Position, Position) {
        int zx0 = std::max(cells.x1 - 2, region.x0);
        int zx1 = std::min(cells.x0 + 2, region.x1);
        int zy0 = std::max(cells.y1 - 2, region.y0);
        int zy1 = std::min(cells.y0 + 2, region.y1);
        std::uint8_t bit = 1 << static_cast<int>(reason_of(k));
        for (int y = zy0; y <= zy1; ++y)
          for (int x = zx0; x <= zx1; ++x)
            mask[static_cast<std::size_t>(region.y1 - y) * rw +
                 (x - region.x0)] |= bit;
      });
  for (int y = region.y1; y >= region.y0; --y)
    for (int x = region.x0; x <= region.x1; ++x) {
      std::uint8_t m =
          mask[static_cast<std::size_t>(region.y1 - y) * rw + (x - region.x0)];
      if (!m) continue;
      ViolationReason r =
          m & 1 << static_cast<int>(ViolationReason::BadWindow)
              ? ViolationReason::BadWindow
              : m & 1 << static_cast<int>(ViolationReason::BadPair)
                    ? ViolationReason::BadPair
                    : ViolationReason::BadInside;
      rep.items.push_back({Position{x, y}, r});
    }
  return rep;
}

// --- template grids used by the language generators ------------------------

struct TokenGrid {
  int w = 0, h = 0;  // row 0 is the north row
  std::vector<std::uint8_t> tok;
  std::vector<std::uint8_t> xt;

  TokenGrid(int w_, int h_)
      : w(w_), h(h_),
        tok(static_cast<std::size_t>(w_) * h_, 0),
        xt(static_cast<std::size_t>(w_) * h_, kLiquidX) {}
  std::size_t idx(int col, int row) const {
    return static_cast<std::size_t>(row) * w + col;
  }
};

// Rectangular obstacle: inward arrow border around a filled interior.
// `arrow_tok` maps XPart index to token; interior cells get `interior_tok`.
inline TokenGrid rect_template(int iw, int ih,
                               const std::array<std::uint8_t, 8>& arrow_tok,
                               std::uint8_t interior_tok, int margin = 3) {
  int bw = iw + 2, bh = ih + 2;
  TokenGrid g(bw + 2 * margin, bh + 2 * margin);
  auto arrow = [&](int col, int row) {
    bool n = row == 0, s = row == bh - 1, w = col == 0, e = col == bw - 1;
    if (n && w) return XPart::Dr;
    if (n && e) return XPart::Dl;
    if (s && w) return XPart::Ur;
    if (s && e) return XPart::Ul;
    if (n) return XPart::Dn;
    if (s) return XPart::Up;
    if (w) return XPart::Rt;
    return XPart::Lf;
  };
  for (int row = 0; row < bh; ++row)
    for (int col = 0; col < bw; ++col) {
      bool border = row == 0 || row == bh - 1 || col == 0 || col == bw - 1;
      XPart x = border ? arrow(col, row) : XPart::Bt;
      std::size_t i = g.idx(col + margin, row + margin);
      g.tok[i] = border ? arrow_tok[static_cast<int>(x)] : interior_tok;
      g.xt[i] = static_cast<std::uint8_t>(x);
    }
  return g;
}

// Odd square with the concentric-layer X field.
inline TokenGrid onion_template(int side, int margin = 3) {
  TokenGrid g(side + 2 * margin, side + 2 * margin);
  int r = side / 2, c = margin + r;
  for (int row = margin; row < margin + side; ++row)
    for (int col = margin; col < margin + side; ++col) {
      int dx = col - c, dy = c - row;
      std::size_t i = g.idx(col, row);
      g.tok[i] = 1;
      g.xt[i] = static_cast<std::uint8_t>(onion_xpart(dx, dy));
    }
  return g;
}

namespace detail {

inline void collect_windows(const TokenGrid& g, std::set<std::uint64_t>& out) {
  for (int row = 0; row + 2 < g.h; ++row)
    for (int col = 0; col + 2 < g.w; ++col) {
      std::uint64_t w = 0;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) w = w << 4 | g.tok[g.idx(col + c, row + r)];
      out.insert(w);
    }
}

inline void collect_x(const TokenGrid& g, std::set<std::uint16_t>& x22,
                      std::array<std::bitset<100>, 12>& pi) {
  for (int row = 0; row + 1 < g.h; ++row)
    for (int col = 0; col + 1 < g.w; ++col) {
      std::uint8_t nw = g.xt[g.idx(col, row)], ne = g.xt[g.idx(col + 1, row)];
      std::uint8_t sw = g.xt[g.idx(col, row + 1)],
                   se = g.xt[g.idx(col + 1, row + 1)];
      if (nw < kLiquidX && ne < kLiquidX && sw < kLiquidX && se < kLiquidX)
        x22.insert(static_cast<std::uint16_t>(nw << 12 | ne << 8 | sw << 4 |
                                              se));
    }
  const auto& offs = pi_offsets();
  for (int row = 0; row < g.h; ++row)
    for (int col = 0; col < g.w; ++col)
      for (int i = 0; i < 12; ++i) {
        int qc = col + offs[i].x, qr = row - offs[i].y;
        if (qc < 0 || qc >= g.w || qr < 0 || qr >= g.h) continue;
        pi[i].set(g.xt[g.idx(col, row)] * 10 + g.xt[g.idx(qc, qr)]);
      }
}

inline std::array<std::uint8_t, 8> arrow_tokens(std::uint8_t base) {
  std::array<std::uint8_t, 8> t{};
  for (int i = 0; i < 8; ++i) t[i] = static_cast<std::uint8_t>(base + i);
  return t;
}

}  // namespace detail

// Rectangular obstacles: arrow border, filled-1 interior, liquid surround.
inline LocalLanguage generate_sigma_S() {
  LocalLanguage lang;
  lang.kind = LanguageKind::SigmaS;
  std::set<std::uint64_t> ws;
  ws.insert(0);  // all-liquid window
  for (int iw = 3; iw <= 4; ++iw)
    for (int ih = 3; ih <= 4; ++ih)
      detail::collect_windows(rect_template(iw, ih, detail::arrow_tokens(2), 1),
                              ws);
  lang.windows.assign(ws.begin(), ws.end());
  return lang;
}

// Same geometry with tile-bearing interiors constrained by τ adjacency.
inline LocalLanguage generate_sigma_S_tau(const TileSet& tau) {
  if (tau.n <= 0) throw SftError("EmptyTileSet");
  LocalLanguage lang;
  lang.kind = LanguageKind::SigmaSTau;
  std::set<std::uint64_t> ws;
  ws.insert(0);
  for (int iw = 3; iw <= 4; ++iw)
    for (int ih = 3; ih <= 4; ++ih)
      detail::collect_windows(rect_template(iw, ih, detail::arrow_tokens(1), 9),
                              ws);
  lang.windows.assign(ws.begin(), ws.end());
  lang.has_tau = true;
  lang.tau = tau;
  return lang;
}

// Concentric-layer squares: two-token window geometry plus the X-level 2x2
// set and pair tables extracted from odd onion templates.
inline LocalLanguage generate_sigma_obst(const TileSet& tau,
                                         int template_bound = 11) {
  if (tau.n <= 0) throw SftError("EmptyTileSet");
  LocalLanguage lang;
  lang.kind = LanguageKind::SigmaObstTau;
  std::set<std::uint64_t> ws;
  ws.insert(0);
  std::array<std::uint8_t, 8> solid{};
  solid.fill(1);
  for (int iw = 3; iw <= 4; ++iw)
    for (int ih = 3; ih <= 4; ++ih)
      detail::collect_windows(rect_template(iw, ih, solid, 1), ws);
  std::set<std::uint16_t> xs;
  for (int side = 3; side <= template_bound; side += 2) {
    TokenGrid g = onion_template(side);
    detail::collect_windows(g, ws);
    detail::collect_x(g, xs, lang.pi);
  }
  lang.windows.assign(ws.begin(), ws.end());
  lang.x22.assign(xs.begin(), xs.end());
  lang.has_tau = true;
  lang.tau = tau;
  lang.has_x = true;
  return lang;
}

// Σ_obst plus the marked-center/skin-tile restrictions: the bottom mark
// forces tile α, and only tile β may sit immediately west of liquid.
inline LocalLanguage generate_sigma_prime(const TileSet& tau, int alpha,
                                          int beta) {
  if (alpha < 0 || alpha >= tau.n || beta < 0 || beta >= tau.n)
    throw SftError("TileNotInSet");
  LocalLanguage lang = generate_sigma_obst(tau);
  lang.kind = LanguageKind::SigmaPrime;
  lang.prime = true;
  lang.alpha = alpha;
  lang.beta = beta;
  return lang;
}

}  // namespace cadyn
