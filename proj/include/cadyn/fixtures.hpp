#pragma once

#include <string>

#include "cadyn/lattice.hpp"
#include "cadyn/sft.hpp"

namespace cadyn {

// Arrow of a rectangular obstacle border cell; (col, row) counted from the
// block's south-west corner, block size bw x bh.
inline XPart rect_border_xpart(int col, int row, int bw, int bh) {
  bool n = row == bh - 1, s = row == 0, w = col == 0, e = col == bw - 1;
  if (n && w) return XPart::Dr;
  if (n && e) return XPart::Dl;
  if (s && w) return XPart::Ur;
  if (s && e) return XPart::Ul;
  if (n) return XPart::Dn;
  if (s) return XPart::Up;
  if (w) return XPart::Rt;
  return XPart::Lf;
}

// Plain obstacle: inward arrow border, interior filled with "1"; `sw` is the
// south-west cell of the (iw+2) x (ih+2) solid block.
inline void place_rect_obstacle(Configuration& cfg, Position sw, int iw,
                                int ih) {
  const Alphabet& a = *cfg.alphabet();
  int bw = iw + 2, bh = ih + 2;
  for (int row = 0; row < bh; ++row)
    for (int col = 0; col < bw; ++col) {
      bool border = row == 0 || row == bh - 1 || col == 0 || col == bw - 1;
      std::string name =
          border ? kXPartName[static_cast<int>(rect_border_xpart(col, row, bw,
                                                                 bh))]
                 : "1";
      cfg.set({sw.x + col, sw.y + row}, a.require(name));
    }
}

// Tiled obstacle: arrow border, interior tiles picked by tile_fn(ix, iy)
// over interior coordinates (0,0) = south-west interior cell.
template <typename Fn>
void place_rect_obstacle_tau(Configuration& cfg, Position sw, int iw, int ih,
                             Fn&& tile_fn) {
  const Alphabet& a = *cfg.alphabet();
  int bw = iw + 2, bh = ih + 2;
  for (int row = 0; row < bh; ++row)
    for (int col = 0; col < bw; ++col) {
      bool border = row == 0 || row == bh - 1 || col == 0 || col == bw - 1;
      std::string name =
          border ? std::string(kXPartName[static_cast<int>(
                       rect_border_xpart(col, row, bw, bh))])
                 : "t" + std::to_string(tile_fn(col - 1, row - 1));
      cfg.set({sw.x + col, sw.y + row}, a.require(name));
    }
}

// Concentric-layer square of odd `side` centered at `center`; tiles picked
// by tile_fn(dx, dy) over offsets from the center.
template <typename Fn>
void place_onion_with(Configuration& cfg, Position center, int side,
                      Fn&& tile_fn) {
  const Alphabet& a = *cfg.alphabet();
  int r = side / 2;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      std::string name = "t" + std::to_string(tile_fn(dx, dy)) + "." +
                         kXPartName[static_cast<int>(onion_xpart(dx, dy))];
      cfg.set({center.x + dx, center.y + dy}, a.require(name));
    }
}

inline void place_onion(Configuration& cfg, Position center, int side,
                        int tile = 0) {
  place_onion_with(cfg, center, side, [tile](int, int) { return tile; });
}

}  // namespace cadyn
