#pragma once
// Frame renderers: fixed-width text grids for eyeballing, binary PGM
// (one state-id byte per cell) for lossless round-trips.

#include <string>

#include "cadyn/lattice.hpp"

namespace cadyn {

// Liquid zero '.', particles 'u'/'d'; solid cells draw the border-arrow
// family ('v^<>/\' by direction, '#' for interiors and centers). States
// outside those groups fall back to the first character of their name.
inline char render_char(const Alphabet& a, State s) {
  static constexpr char kSolid[kXParts] = {'v', '^', '<', '>', '/',
                                           '\\', '\\', '/', '#'};
  const StateInfo& info = a.info(s);
  if (info.cls == CellClass::Solid)
    return info.xpart >= 0 ? kSolid[info.xpart] : '#';
  if (info.name == "0") return '.';
  if (info.name == "U") return 'u';
  if (info.name == "D") return 'd';
  return info.name.empty() ? '?' : info.name[0];
}

inline std::string render_text(const Configuration& cfg, Rect rect) {
  const Alphabet& a = *cfg.alphabet();
  std::string out;
  if (rect.empty()) return out;
  out.reserve(static_cast<std::size_t>(rect.area()) +
              static_cast<std::size_t>(rect.height()));
  for (int y = rect.y1; y >= rect.y0; --y) {
    for (int x = rect.x0; x <= rect.x1; ++x)
      out.push_back(render_char(a, cfg.get({x, y})));
    out.push_back('\n');
  }
  return out;
}

inline std::string render_pgm(const Configuration& cfg, Rect rect) {
  std::string out = "P5\n" + std::to_string(rect.empty() ? 0 : rect.width()) +
                    " " + std::to_string(rect.empty() ? 0 : rect.height()) +
                    "\n255\n";
  if (rect.empty()) return out;
  for (int y = rect.y1; y >= rect.y0; --y)
    for (int x = rect.x0; x <= rect.x1; ++x)
      out.push_back(static_cast<char>(cfg.get({x, y}) & 0xff));
  return out;
}

}  // namespace cadyn
