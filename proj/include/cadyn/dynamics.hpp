#pragma once

// Erosion runs, obstacle extraction, infiltration paths, sensitivity and
// equicontinuity probes, and the 1D blocking-word predicate.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cadyn/fixtures.hpp"
#include "cadyn/lattice.hpp"
#include "cadyn/rules.hpp"
#include "cadyn/sft.hpp"
#include "cadyn/util.hpp"

namespace cadyn {

namespace detail {

inline void require_erosion_kind(const CARule& rule, const char* op) {
  if (rule.kind == RuleKind::Lifted1D)
    throw RuleError(std::string(op) + ": lifted 1D rules have no erosion semantics");
}

inline void require_same_alphabet(const CARule& rule, const Configuration& cfg) {
  if (!cfg.alphabet() || !cfg.alphabet()->same_as(*rule.alphabet))
    throw AlphabetMismatch{};
}

inline bool solid_state(const CARule& rule, State s) { return rule.fam[s] != 0; }

inline bool particle_state(const CARule& rule, State s) {
  return s == rule.u_state || s == rule.d_state;
}

}  // namespace detail

inline std::string format_position(Position p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

inline std::string format_rect(Rect r) {
  if (r.empty()) return "none";
  return format_position({r.x0, r.y0}) + ".." + format_position({r.x1, r.y1});
}

// --- erosion -------------------------------------------------------------------

enum class ErosionStatus { Settled, Timeout };

struct ErosionReport {
  ErosionStatus status = ErosionStatus::Settled;
  int t0 = 0;                       // -1 on timeout
  Configuration final;              // state at t0, or at t_max on timeout
  std::vector<Position> particles;  // U/D cells of `final`, north-first
  Rect solid_bbox;                  // bounding box of solid cells of `final`

  bool timed_out() const { return status == ErosionStatus::Timeout; }
};

// A configuration counts as settled when its support scans clean in the
// rule's language and every particle sits strictly west of every solid cell.
// The mixed-alphabet rule has no single language; solid stability under one
// step is the membership check there.
inline bool erosion_clean(const CARule& rule, const Configuration& cfg) {
  detail::require_erosion_kind(rule, "erosion_clean");
  detail::require_same_alphabet(rule, cfg);
  bool have_solid = false, have_particle = false;
  int min_solid_x = 0, max_particle_x = 0;
  for (const auto& [p, s] : cfg.cells()) {
    if (detail::solid_state(rule, s)) {
      min_solid_x = have_solid ? std::min(min_solid_x, p.x) : p.x;
      have_solid = true;
    } else if (detail::particle_state(rule, s)) {
      max_particle_x = have_particle ? std::max(max_particle_x, p.x) : p.x;
      have_particle = true;
    }
  }
  if (have_solid && have_particle && max_particle_x >= min_solid_x) return false;
  Rect box = cfg.bounding_box();
  if (box.empty()) return true;
  if (rule.kind == RuleKind::HTau) {
    Configuration next = step(rule, cfg);
    for (const auto& [p, s] : cfg.cells())
      if (detail::solid_state(rule, s) && next.get(p) != s) return false;
    return true;
  }
  return scan_violations(rule.lang, cfg, box.grown(4)).empty();
}

inline ErosionReport erode(const CARule& rule, Configuration cfg, int t_max) {
  detail::require_erosion_kind(rule, "erode");
  if (cfg.background() != 0)
    throw RuleError("erode: background must be the quiescent liquid state");
  ErosionReport rep;
  auto finish = [&](ErosionStatus status, int t0) {
    rep.status = status;
    rep.t0 = t0;
    rep.final = cfg;
    std::vector<Position> ps;
    for (const auto& [p, s] : cfg.cells()) {
      if (detail::particle_state(rule, s))
        ps.push_back(p);
      else if (detail::solid_state(rule, s))
        rep.solid_bbox.absorb(p);
    }
    std::sort(ps.begin(), ps.end(), [](Position a, Position b) {
      return a.y != b.y ? a.y > b.y : a.x < b.x;
    });
    rep.particles = std::move(ps);
    return rep;
  };
  for (int t = 0; t <= t_max; ++t) {
    if (erosion_clean(rule, cfg)) return finish(ErosionStatus::Settled, t);
    cfg = step(rule, cfg);
  }
  return finish(ErosionStatus::Timeout, -1);
}

inline std::string format_erosion_report(const ErosionReport& r) {
  std::ostringstream out;
  out << "status=" << (r.timed_out() ? "timeout" : "settled") << "\n";
  out << "t0=" << r.t0 << "\n";
  out << "solid_bbox=" << format_rect(r.solid_bbox) << "\n";
  out << "particles=" << r.particles.size() << "\n";
  for (Position p : r.particles) out << "particle_at=" << format_position(p) << "\n";
  return out.str();
}

// --- obstacle extraction ---------------------------------------------------------

enum class ObstacleKind { Plain, Onion };

struct Obstacle {
  Rect rect;
  ObstacleKind kind = ObstacleKind::Plain;
  int tile = -1;  // onion center tile, -1 for plain blocks

  long half_perimeter() const {
    return static_cast<long>(rect.width() + rect.height());
  }
  // Outside corners of the block, north-west / north-east / south-east.
  Position corner_a() const { return {rect.x0 - 1, rect.y1 + 1}; }
  Position corner_b() const { return {rect.x1 + 1, rect.y1 + 1}; }
  Position corner_c() const { return {rect.x1 + 1, rect.y0 - 1}; }
};

enum class ObstacleErrorKind { NotInLanguage, ShapeViolation };

struct ObstacleError : std::runtime_error {
  ObstacleErrorKind kind;
  ObstacleError(ObstacleErrorKind k, const std::string& what)
      : std::runtime_error(what), kind(k) {}
};

namespace detail {

// Minimum Chebyshev distance between cells of two disjoint rectangles.
inline int rect_gap(Rect a, Rect b) {
  int dx = std::max({0, b.x0 - a.x1, a.x0 - b.x1});
  int dy = std::max({0, b.y0 - a.y1, a.y0 - b.y1});
  return std::max(dx, dy);
}

inline bool onion_cell(const Alphabet& a, State s) {
  const StateInfo& i = a.info(s);
  return i.tile >= 0 && i.xpart >= 0;
}

}  // namespace detail

inline std::vector<Obstacle> extract_obstacles(const CARule& rule,
                                               const Configuration& cfg) {
  detail::require_erosion_kind(rule, "extract_obstacles");
  detail::require_same_alphabet(rule, cfg);
  const Alphabet& a = *rule.alphabet;
  Rect box = cfg.bounding_box();
  if (!box.empty()) {
    bool member;
    if (rule.kind == RuleKind::HTau) {
      Configuration next = step(rule, cfg);
      member = true;
      for (const auto& [p, s] : cfg.cells())
        if (detail::solid_state(rule, s) && next.get(p) != s) member = false;
    } else {
      member = scan_violations(rule.lang, cfg, box.grown(4)).empty();
    }
    if (!member)
      throw ObstacleError(ObstacleErrorKind::NotInLanguage,
                          "configuration violates the target language");
  }

  std::set<Position> solids;
  for (const auto& [p, s] : cfg.cells())
    if (detail::solid_state(rule, s)) solids.insert(p);

  std::vector<Obstacle> out;
  std::set<Position> seen;
  for (Position seedp : solids) {
    if (seen.count(seedp)) continue;
    std::vector<Position> stack{seedp}, comp;
    seen.insert(seedp);
    while (!stack.empty()) {
      Position p = stack.back();
      stack.pop_back();
      comp.push_back(p);
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
          Position q{p.x + dx, p.y + dy};
          if ((dx || dy) && solids.count(q) && !seen.count(q)) {
            seen.insert(q);
            stack.push_back(q);
          }
        }
    }
    Rect r;
    for (Position p : comp) r.absorb(p);
    if (static_cast<std::int64_t>(comp.size()) != r.area())
      throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                          "solid component is not a filled rectangle at " +
                              format_rect(r));
    bool onion = detail::onion_cell(a, cfg.get(comp.front()));
    for (Position p : comp)
      if (detail::onion_cell(a, cfg.get(p)) != onion)
        throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                            "solid component mixes obstacle families at " +
                                format_rect(r));
    Obstacle ob;
    ob.rect = r;
    if (onion) {
      ob.kind = ObstacleKind::Onion;
      int side = static_cast<int>(r.width());
      if (r.width() != r.height() || side % 2 == 0 || side < 3)
        throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                            "onion obstacle is not an odd square at " +
                                format_rect(r));
      Position c{r.x0 + side / 2, r.y0 + side / 2};
      ob.tile = a.info(cfg.get(c)).tile;
      for (Position p : comp) {
        XPart want = onion_xpart(p.x - c.x, p.y - c.y);
        if (a.info(cfg.get(p)).xpart != static_cast<int>(want))
          throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                              "onion arrow field broken at " + format_position(p));
      }
    } else {
      ob.kind = ObstacleKind::Plain;
      int bw = static_cast<int>(r.width()), bh = static_cast<int>(r.height());
      if (bw < 4 || bh < 4)
        throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                            "plain obstacle below minimum size at " +
                                format_rect(r));
      for (Position p : comp) {
        int col = p.x - r.x0, row = p.y - r.y0;
        const StateInfo& info = a.info(cfg.get(p));
        bool border = row == 0 || row == bh - 1 || col == 0 || col == bw - 1;
        if (border) {
          if (info.xpart != static_cast<int>(rect_border_xpart(col, row, bw, bh)))
            throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                                "border arrow field broken at " +
                                    format_position(p));
        } else if (info.xpart >= 0) {
          throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                              "arrow state inside a plain interior at " +
                                  format_position(p));
        }
      }
    }
    out.push_back(ob);
  }

  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (detail::rect_gap(out[i].rect, out[j].rect) < 3)
        throw ObstacleError(ObstacleErrorKind::ShapeViolation,
                            "obstacles closer than the spacing bound: " +
                                format_rect(out[i].rect) + " vs " +
                                format_rect(out[j].rect));

  std::sort(out.begin(), out.end(), [](const Obstacle& a_, const Obstacle& b_) {
    return a_.rect.y1 != b_.rect.y1 ? a_.rect.y1 > b_.rect.y1
                                    : a_.rect.x0 < b_.rect.x0;
  });
  return out;
}

inline std::string format_obstacles(const std::vector<Obstacle>& obs) {
  std::ostringstream out;
  out << "obstacles=" << obs.size() << "\n";
  for (const Obstacle& ob : obs) {
    out << "obstacle=" << (ob.kind == ObstacleKind::Onion ? "onion" : "plain")
        << " rect=" << format_rect(ob.rect) << " p=" << ob.half_perimeter();
    if (ob.tile >= 0) out << " tile=" << ob.tile;
    out << "\n";
  }
  return out.str();
}

// --- infiltration ---------------------------------------------------------------

struct DetourRecord {
  std::size_t from_index = 0;  // milestone index where the walk was blocked
  Rect rect;                   // the obstacle bypassed
  long added = 0;              // path entries contributed by the detour
};

struct Path {
  Position start{};  // pair anchor of index 0: z0, or north(z0) when mirrored
  bool mirrored = false;
  int t0 = 0;          // erosion time of the input configuration
  std::size_t n0 = 0;  // first milestone index carrying the arrival guarantee
  std::vector<Position> points;
  std::vector<std::size_t> milestones;  // increasing indices into points
  std::vector<DetourRecord> detours;
};

enum class InfiltrationErrorKind { BadStart, NotEroded };

struct InfiltrationError : std::runtime_error {
  InfiltrationErrorKind kind;
  InfiltrationError(InfiltrationErrorKind k, const std::string& what)
      : std::runtime_error(what), kind(k) {}
};

namespace detail {

inline XPart flip_xpart(XPart x) {
  switch (x) {
    case XPart::Dn: return XPart::Up;
    case XPart::Up: return XPart::Dn;
    case XPart::Dl: return XPart::Ul;
    case XPart::Ul: return XPart::Dl;
    case XPart::Dr: return XPart::Ur;
    case XPart::Ur: return XPart::Dr;
    default: return x;
  }
}

inline State flip_state(const Alphabet& a, State s) {
  const StateInfo& i = a.info(s);
  if (i.cls == CellClass::Liquid) {
    if (i.name == "U") return a.require("D");
    if (i.name == "D") return a.require("U");
    return s;
  }
  if (i.xpart < 0) return s;
  XPart f = flip_xpart(static_cast<XPart>(i.xpart));
  if (static_cast<int>(f) == i.xpart) return s;
  std::string name = kXPartName[static_cast<int>(f)];
  if (i.tile >= 0) name = "t" + std::to_string(i.tile) + "." + name;
  return a.require(name);
}

// Vertical reflection about the row `axis_y`. Swapping U with D and flipping
// the arrow sub-parts makes this an exact symmetry of the movement rules.
inline Configuration reflect_vertical(const Configuration& cfg, int axis_y) {
  Configuration out(cfg.alphabet(), cfg.background());
  const Alphabet& a = *cfg.alphabet();
  for (const auto& [p, s] : cfg.cells())
    out.set({p.x, 2 * axis_y - p.y}, flip_state(a, s));
  return out;
}

// Southern-branch construction on a particle-free, language-valid field:
// free steps go east while east and south-east are liquid; a blocking
// obstacle is bypassed by releasing the pair at the mirrored row beyond its
// east side and harvesting the simulated flight backwards.
inline Path build_path_south(const CARule& rule, const Configuration& base,
                             Position z0, std::size_t n_milestones) {
  std::vector<Obstacle> obstacles = extract_obstacles(rule, base);
  auto solid_at = [&](Position p) { return solid_state(rule, base.get(p)); };
  if (solid_at(z0))
    throw InfiltrationError(InfiltrationErrorKind::BadStart,
                            "start cell is not liquid");
  Path path;
  path.start = z0;
  path.points.push_back(z0);
  path.milestones.push_back(0);
  while (path.milestones.size() < n_milestones) {
    Position cur = path.points[path.milestones.back()];
    Position e = cur.east(), se = cur.east().south();
    if (!solid_at(e) && !solid_at(se)) {
      path.points.push_back(e);
      path.milestones.push_back(path.points.size() - 1);
      continue;
    }
    Position hit = solid_at(e) ? e : se;
    const Obstacle* blocker = nullptr;
    for (const Obstacle& ob : obstacles)
      if (ob.rect.contains(hit)) blocker = &ob;
    if (!blocker || cur.x != blocker->rect.x0 - 1 ||
        cur.y < blocker->rect.y0 || cur.y > blocker->rect.y1 + 1)
      throw RuleError("infiltration: walk blocked outside an obstacle face");
    Rect r = blocker->rect;
    Position release{r.x1 + 1, r.y1 + r.y0 + 1 - cur.y};
    Configuration sim = base, target = base;
    sim.set(release, rule.u_state);
    sim.set(release.south(), rule.d_state);
    target.set(cur, rule.u_state);
    target.set(cur.south(), rule.d_state);
    std::vector<Position> u_track{release};
    long p = blocker->half_perimeter();
    bool formed = false;
    for (long t = 1; t <= 2 * p + 8 && !formed; ++t) {
      sim = step(rule, sim);
      Position upos = u_track.back();
      int found = 0;
      for (const auto& [q, s] : sim.cells())
        if (s == rule.u_state) {
          upos = q;
          ++found;
        }
      u_track.push_back(found == 1 ? upos : u_track.back());
      formed = sim == target;
    }
    if (!formed) throw RuleError("infiltration: detour failed to re-form");
    long added = static_cast<long>(u_track.size()) - 1;
    path.detours.push_back({path.milestones.back(), r, added});
    for (long j = 1; j <= added; ++j)
      path.points.push_back(u_track[static_cast<std::size_t>(added - j)]);
    path.milestones.push_back(path.points.size() - 1);
  }
  return path;
}

}  // namespace detail

inline Path infiltration_path(const CARule& rule, const Configuration& cfg,
                              Position z0, std::size_t n_milestones,
                              int t_max) {
  detail::require_erosion_kind(rule, "infiltration_path");
  ErosionReport er = erode(rule, cfg, t_max);
  if (er.timed_out())
    throw InfiltrationError(InfiltrationErrorKind::NotEroded,
                            "configuration did not settle within t_max");
  Configuration base = er.final;
  for (Position p : er.particles) base.set(p, 0);
  auto solid_at = [&](Position p) {
    return detail::solid_state(rule, base.get(p));
  };
  if (solid_at(z0))
    throw InfiltrationError(InfiltrationErrorKind::BadStart,
                            "start cell is not liquid");
  Path path;
  if (!solid_at(z0.south())) {
    path = detail::build_path_south(rule, base, z0, n_milestones);
  } else if (!solid_at(z0.north())) {
    Configuration rbase = detail::reflect_vertical(base, z0.y);
    Path rp = detail::build_path_south(rule, rbase, z0, n_milestones);
    path.mirrored = true;
    path.points.reserve(rp.points.size());
    for (Position q : rp.points)
      path.points.push_back({q.x, 2 * z0.y - q.y + 1});
    path.milestones = std::move(rp.milestones);
    for (DetourRecord d : rp.detours) {
      Rect r = d.rect;
      d.rect = {r.x0, 2 * z0.y - r.y1, r.x1, 2 * z0.y - r.y0};
      path.detours.push_back(d);
    }
    path.start = path.points.front();
  } else {
    throw InfiltrationError(InfiltrationErrorKind::BadStart,
                            "start cell has solid neighbours above and below");
  }
  path.t0 = er.t0;
  path.n0 = path.points.size();
  for (std::size_t m : path.milestones)
    if (static_cast<int>(m) >= er.t0) {
      path.n0 = m;
      break;
    }
  return path;
}

// Places the pair at path index n on top of `cfg`, runs n steps and checks
// that the start cell holds a particle.
inline bool verify_infiltration(const CARule& rule, const Configuration& cfg,
                                Position z0, const Path& path, std::size_t n) {
  detail::require_same_alphabet(rule, cfg);
  if (n >= path.points.size()) return false;
  Position z = path.points[n];
  Configuration x = cfg;
  if (detail::solid_state(rule, x.get(z)) ||
      detail::solid_state(rule, x.get(z.south())))
    return false;
  x.set(z, rule.u_state);
  x.set(z.south(), rule.d_state);
  for (std::size_t t = 0; t < n; ++t) x = step(rule, x);
  State s = x.get(z0);
  return s == rule.u_state || s == rule.d_state;
}

inline std::string format_path(const Path& path) {
  std::ostringstream out;
  out << "start=" << format_position(path.start) << "\n";
  out << "mirrored=" << (path.mirrored ? 1 : 0) << "\n";
  out << "t0=" << path.t0 << "\n";
  out << "n0=" << path.n0 << "\n";
  out << "points=" << path.points.size() << "\n";
  out << "milestones=" << path.milestones.size() << "\n";
  for (const DetourRecord& d : path.detours)
    out << "detour_at=" << d.from_index << " rect=" << format_rect(d.rect)
        << " added=" << d.added << "\n";
  return out.str();
}

// --- sensitivity / equicontinuity probes -----------------------------------------

enum class ProbeMode { Sensitivity, Equicontinuity };
enum class ProbeStrategy { Constructive, Certificate, Random };
enum class ProbeOutcome { WitnessFound, NoWitness, CertificateHolds };

struct ProbeReport {
  ProbeMode mode = ProbeMode::Sensitivity;
  ProbeStrategy strategy = ProbeStrategy::Constructive;
  int m = 0, k = 0, t_max = 0;
  ProbeOutcome outcome = ProbeOutcome::NoWitness;
  std::uint64_t seed = 0;
  int trials = 0;
  int witness_trial = -1;
  int witness_time = -1;
  std::optional<Position> witness_cell;  // divergence cell inside B_m
  std::optional<Position> perturb_at;    // pair anchor of the constructive witness
  std::optional<Configuration> witness;  // the perturbed configuration
  int certified_radius = -1;
  std::string note;
};

inline std::string format_probe_report(const ProbeReport& r) {
  std::ostringstream out;
  out << "mode="
      << (r.mode == ProbeMode::Sensitivity ? "sensitivity" : "equicontinuity")
      << "\n";
  out << "strategy=";
  switch (r.strategy) {
    case ProbeStrategy::Constructive: out << "constructive"; break;
    case ProbeStrategy::Certificate: out << "certificate"; break;
    case ProbeStrategy::Random: out << "random"; break;
  }
  out << "\n";
  out << "m=" << r.m << "\n";
  out << "k=" << r.k << "\n";
  out << "t_max=" << r.t_max << "\n";
  out << "outcome=";
  switch (r.outcome) {
    case ProbeOutcome::WitnessFound: out << "witness"; break;
    case ProbeOutcome::NoWitness: out << "no-witness"; break;
    case ProbeOutcome::CertificateHolds: out << "certificate-holds"; break;
  }
  out << "\n";
  out << "seed=" << r.seed << "\n";
  out << "trials=" << r.trials << "\n";
  if (r.witness_trial >= 0) out << "witness_trial=" << r.witness_trial << "\n";
  if (r.witness_time >= 0) out << "witness_time=" << r.witness_time << "\n";
  if (r.witness_cell) out << "witness_at=" << format_position(*r.witness_cell) << "\n";
  if (r.perturb_at) out << "perturb_at=" << format_position(*r.perturb_at) << "\n";
  if (r.certified_radius >= 0)
    out << "certified_radius=" << r.certified_radius << "\n";
  if (!r.note.empty()) out << "note=" << r.note << "\n";
  return out.str();
}

namespace detail {

struct TrialHit {
  int time = -1;
  Position cell{};
  Configuration y;
};

// One seeded perturbation outside B_k, simulated against the reference run.
inline std::optional<TrialHit> divergence_trial(
    const CARule& rule, const Configuration& x,
    const std::vector<Window>& x_frames, int m, int k, int t_max,
    std::uint64_t seed, int trial) {
  Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1)));
  Configuration y = x;
  int span = k + 16;
  auto sample_outside = [&](bool with_south) {
    Position p{};
    do {
      p = {rng.range(-span, span), rng.range(-span, span)};
    } while (norm_inf(p) <= k || (with_south && norm_inf(p.south()) <= k));
    return p;
  };
  // Half the trials drop a coherent free pair; scattered lone states mostly
  // decay in place and say nothing about propagation.
  bool pair = rule.u_state != rule.d_state && rng.chance(0.5);
  if (pair) {
    Position p = sample_outside(true);
    y.set(p, rule.u_state);
    y.set(p.south(), rule.d_state);
  }
  int count = pair ? static_cast<int>(rng.below(4))
                   : 1 + static_cast<int>(rng.below(8));
  for (int i = 0; i < count; ++i)
    y.set(sample_outside(false),
          static_cast<State>(rng.below(rule.alphabet->size())));
  Rect ball = Rect::centered({0, 0}, m);
  Configuration cur = y;
  for (int t = 1; t <= t_max; ++t) {
    cur = step(rule, cur);
    Window w = extract_window(cur, ball);
    const Window& ref = x_frames[static_cast<std::size_t>(t)];
    if (w.cells != ref.cells) {
      for (std::size_t i = 0; i < w.cells.size(); ++i)
        if (w.cells[i] != ref.cells[i]) {
          int row = static_cast<int>(i) / static_cast<int>(ball.width());
          int col = static_cast<int>(i) % static_cast<int>(ball.width());
          return TrialHit{t, {ball.x0 + col, ball.y1 - row}, y};
        }
    }
  }
  return std::nullopt;
}

// Reference frames of x restricted to B_m, then seeded trials in parallel
// merged by trial index.
inline void run_random_trials(const CARule& rule, const Configuration& x,
                              ProbeReport& rep) {
  std::vector<Window> frames;
  frames.reserve(static_cast<std::size_t>(rep.t_max) + 1);
  Rect ball = Rect::centered({0, 0}, rep.m);
  Configuration cur = x;
  frames.push_back(extract_window(cur, ball));
  for (int t = 1; t <= rep.t_max; ++t) {
    cur = step(rule, cur);
    frames.push_back(extract_window(cur, ball));
  }
  std::vector<std::optional<TrialHit>> hits(
      static_cast<std::size_t>(rep.trials));
  int nthreads = static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min({nthreads, 8, rep.trials}));
  auto work = [&](int part) {
    for (int i = part; i < rep.trials; i += nthreads)
      hits[static_cast<std::size_t>(i)] = divergence_trial(
          rule, x, frames, rep.m, rep.k, rep.t_max, rep.seed, i);
  };
  if (nthreads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int part = 0; part < nthreads; ++part) pool.emplace_back(work, part);
    for (auto& th : pool) th.join();
  }
  for (int i = 0; i < rep.trials; ++i) {
    if (hits[static_cast<std::size_t>(i)]) {
      TrialHit& h = *hits[static_cast<std::size_t>(i)];
      rep.outcome = ProbeOutcome::WitnessFound;
      rep.witness_trial = i;
      rep.witness_time = h.time;
      rep.witness_cell = h.cell;
      rep.witness = std::move(h.y);
      return;
    }
  }
  rep.outcome = ProbeOutcome::NoWitness;
}

}  // namespace detail

inline ProbeReport sensitivity_probe(const CARule& rule, const Configuration& x,
                                     int m, int k, int t_max,
                                     ProbeStrategy strategy =
                                         ProbeStrategy::Constructive,
                                     std::uint64_t seed = 0, int trials = 20) {
  if (m > k) throw RuleError("sensitivity_probe: m must not exceed k");
  detail::require_same_alphabet(rule, x);
  ProbeReport rep;
  rep.mode = ProbeMode::Sensitivity;
  rep.strategy = strategy;
  rep.m = m;
  rep.k = k;
  rep.t_max = t_max;
  rep.seed = seed;
  if (strategy == ProbeStrategy::Random) {
    rep.trials = trials;
    detail::run_random_trials(rule, x, rep);
    return rep;
  }
  if (strategy != ProbeStrategy::Constructive)
    throw RuleError("sensitivity_probe: strategy must be constructive or random");
  detail::require_erosion_kind(rule, "sensitivity_probe");

  Configuration trunc(x.alphabet(), x.background());
  for (const auto& [p, s] : x.cells())
    if (norm_inf(p) <= k) trunc.set(p, s);
  ErosionReport er = erode(rule, trunc, t_max);
  if (er.timed_out()) {
    rep.note = "truncation did not settle within t_max";
    return rep;
  }
  Configuration base = er.final;
  for (Position p : er.particles) base.set(p, 0);

  std::optional<Position> z0;
  for (int y = m; y >= -m && !z0; --y)
    for (int xx = -m; xx <= m && !z0; ++xx) {
      Position p{xx, y};
      if (detail::solid_state(rule, base.get(p))) continue;
      if (detail::solid_state(rule, base.get(p.south())) &&
          detail::solid_state(rule, base.get(p.north())))
        continue;
      z0 = p;
    }
  if (!z0) {
    rep.note = "no liquid cell within radius m";
    return rep;
  }

  Path path;
  std::optional<std::size_t> idx;
  for (std::size_t want = 16; want <= 8192 && !idx; want *= 2) {
    path = infiltration_path(rule, base, *z0, want, t_max);
    for (std::size_t mi : path.milestones)
      if (mi >= path.n0 && norm_inf(path.points[mi]) > k) {
        idx = mi;
        break;
      }
  }
  if (!idx) {
    rep.note = "no milestone beyond radius k";
    return rep;
  }

  Configuration y = trunc;
  y.set(path.points[*idx], rule.u_state);
  y.set(path.points[*idx].south(), rule.d_state);
  rep.perturb_at = path.points[*idx];
  Rect ball = Rect::centered({0, 0}, m);
  Configuration cx = x, cy = y;
  int horizon = std::max(static_cast<int>(*idx), t_max);
  for (int t = 1; t <= horizon; ++t) {
    cx = step(rule, cx);
    cy = step(rule, cy);
    Window wx = extract_window(cx, ball), wy = extract_window(cy, ball);
    if (wx.cells != wy.cells) {
      for (std::size_t i = 0; i < wx.cells.size(); ++i)
        if (wx.cells[i] != wy.cells[i]) {
          int row = static_cast<int>(i) / static_cast<int>(ball.width());
          int col = static_cast<int>(i) % static_cast<int>(ball.width());
          rep.outcome = ProbeOutcome::WitnessFound;
          rep.witness_time = t;
          rep.witness_cell = Position{ball.x0 + col, ball.y1 - row};
          rep.witness = y;
          return rep;
        }
    }
  }
  rep.note = "constructive witness did not diverge";
  return rep;
}

inline ProbeReport equicontinuity_probe(const CARule& rule,
                                        const Configuration& x, int m, int k,
                                        int t_max,
                                        ProbeStrategy strategy =
                                            ProbeStrategy::Certificate,
                                        std::uint64_t seed = 0,
                                        int trials = 20) {
  if (m > k) throw RuleError("equicontinuity_probe: m must not exceed k");
  detail::require_same_alphabet(rule, x);
  ProbeReport rep;
  rep.mode = ProbeMode::Equicontinuity;
  rep.strategy = strategy;
  rep.m = m;
  rep.k = k;
  rep.t_max = t_max;
  rep.seed = seed;
  if (strategy == ProbeStrategy::Random) {
    rep.trials = trials;
    detail::run_random_trials(rule, x, rep);
    return rep;
  }
  if (strategy != ProbeStrategy::Certificate)
    throw RuleError(
        "equicontinuity_probe: strategy must be certificate or random");
  detail::require_erosion_kind(rule, "equicontinuity_probe");

  const Alphabet& a = *rule.alphabet;
  Configuration onion(x.alphabet(), x.background());
  for (int yy = -k; yy <= k; ++yy)
    for (int xx = -k; xx <= k; ++xx) {
      State s = x.get({xx, yy});
      const StateInfo& info = a.info(s);
      if (info.tile < 0 ||
          info.xpart != static_cast<int>(onion_xpart(xx, yy))) {
        rep.note = "B_k is not a full onion obstacle";
        return rep;
      }
      onion.set({xx, yy}, s);
    }
  if (!scan_violations(rule.lang, onion, onion.bounding_box().grown(4)).empty()) {
    rep.note = "onion is not in the rule's language";
    return rep;
  }
  rep.certified_radius = k - 2;
  if (m > k - 2) {
    rep.note = "certificate covers radius k-2 only";
    return rep;
  }
  rep.outcome = ProbeOutcome::CertificateHolds;
  return rep;
}

// --- 1D blocking words ------------------------------------------------------------

struct SizeGuardError : std::runtime_error {
  explicit SizeGuardError(const std::string& what) : std::runtime_error(what) {}
};

// The predicate R(u,t): with u pinned on its central cells, every filling of
// the remaining cells within the light cone produces the same central 2r+1
// columns at every time up to t.
inline bool blocking_check_1d(const Rule1D& rule, const std::vector<State>& u,
                              int t, std::uint64_t size_guard = 1ull << 22) {
  if (u.empty()) throw RuleError("blocking_check_1d: empty word");
  if (t < 0) throw RuleError("blocking_check_1d: negative horizon");
  for (State s : u)
    if (s >= rule.k) throw RuleError("blocking_check_1d: symbol outside alphabet");
  const int r = rule.radius, k = rule.k;
  const int half = static_cast<int>(u.size()) / 2;
  const int R = r * (t + 1) + half;
  const int width = 2 * R + 1;
  const int off = -half;  // u occupies [off, off + |u| - 1]

  std::vector<int> free_idx;
  for (int x = -R; x <= R; ++x)
    if (x < off || x >= off + static_cast<int>(u.size()))
      free_idx.push_back(x + R);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < free_idx.size(); ++i) {
    if (total > size_guard / static_cast<std::uint64_t>(k) + 1)
      throw SizeGuardError("blocking_check_1d: enumeration exceeds size guard");
    total *= static_cast<std::uint64_t>(k);
  }
  if (total > size_guard)
    throw SizeGuardError("blocking_check_1d: enumeration exceeds size guard");

  std::vector<State> cells(static_cast<std::size_t>(width), 0);
  for (std::size_t i = 0; i < u.size(); ++i)
    cells[static_cast<std::size_t>(off + static_cast<int>(i) + R)] = u[i];

  auto trace = [&](std::vector<State> row) {
    std::vector<State> rec;
    rec.reserve(static_cast<std::size_t>(t + 1) * (2 * r + 1));
    std::vector<State> window(static_cast<std::size_t>(2 * r + 1));
    int lo = 0, hi = width - 1;
    for (int step_no = 0;; ++step_no) {
      for (int x = -r; x <= r; ++x)
        rec.push_back(row[static_cast<std::size_t>(x + R)]);
      if (step_no == t) break;
      std::vector<State> next(row.size(), 0);
      for (int i = lo + r; i <= hi - r; ++i) {
        for (int j = -r; j <= r; ++j)
          window[static_cast<std::size_t>(j + r)] =
              row[static_cast<std::size_t>(i + j)];
        next[static_cast<std::size_t>(i)] = rule.apply(window);
      }
      row = std::move(next);
      lo += r;
      hi -= r;
    }
    return rec;
  };

  std::vector<State> choice(free_idx.size(), 0);
  std::optional<std::vector<State>> reference;
  for (std::uint64_t n = 0; n < total; ++n) {
    std::vector<State> row = cells;
    for (std::size_t i = 0; i < free_idx.size(); ++i)
      row[static_cast<std::size_t>(free_idx[i])] = choice[i];
    std::vector<State> rec = trace(std::move(row));
    if (!reference)
      reference = std::move(rec);
    else if (rec != *reference)
      return false;
    for (std::size_t i = choice.size(); i-- > 0;) {
      if (++choice[i] < static_cast<State>(k)) break;
      choice[i] = 0;
    }
  }
  return true;
}

// First blocking word in length-then-lex order, or nothing.
inline std::optional<std::vector<State>> blocking_search_1d(
    const Rule1D& rule, int max_len, int t,
    std::uint64_t size_guard = 1ull << 22) {
  for (int len = 1; len <= max_len; ++len) {
    std::vector<State> word(static_cast<std::size_t>(len), 0);
    while (true) {
      if (blocking_check_1d(rule, word, t, size_guard)) return word;
      std::size_t i = word.size();
      while (i > 0 && ++word[i - 1] == static_cast<State>(rule.k))
        word[--i] = 0;
      if (i == 0) break;
    }
  }
  return std::nullopt;
}

inline std::string format_word(const Rule1D& rule, const std::vector<State>& u) {
  std::string out;
  for (State s : u) out += rule.alphabet->info(s).name;
  return out;
}

}  // namespace cadyn
