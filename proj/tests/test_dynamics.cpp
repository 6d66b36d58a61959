#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cadyn/dynamics.hpp"
#include "cadyn/fixtures.hpp"
#include "cadyn/lattice.hpp"
#include "cadyn/rules.hpp"
#include "cadyn/sft.hpp"
#include "cadyn/tiles.hpp"
#include "cadyn/util.hpp"

using namespace cadyn;

namespace {

TileSet two_free_tiles() {
  TileSet t = TileSet::empty(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      t.allow_h(a, b);
      t.allow_v(a, b);
    }
  t.labels = {"t0", "t1"};
  return t;
}

Configuration random_soup(const AlphabetRef& a, Rect box, std::uint64_t seed,
                          double density = 0.5) {
  Rng rng(seed);
  Configuration cfg(a, 0);
  for (int y = box.y1; y >= box.y0; --y)
    for (int x = box.x0; x <= box.x1; ++x)
      if (rng.chance(density))
        cfg.set({x, y}, static_cast<State>(
                            rng.below(static_cast<std::uint64_t>(a->size()))));
  return cfg;
}

Configuration particle_pair(const AlphabetRef& a, Position u) {
  Configuration cfg(a, a->require("0"));
  cfg.set(u, a->require("U"));
  cfg.set(u.south(), a->require("D"));
  return cfg;
}

// One 5x5 block spanning (10,0)..(14,4).
Configuration block_field(const CARule& f) {
  Configuration cfg(f.alphabet, 0);
  place_rect_obstacle(cfg, {10, 0}, 3, 3);
  return cfg;
}

}  // namespace

TEST_CASE("erosion settles canonical inputs") {
  CARule f = rule_f();

  SECTION("empty configuration is settled immediately") {
    ErosionReport r = erode(f, Configuration(f.alphabet, 0), 10);
    CHECK(r.status == ErosionStatus::Settled);
    CHECK(r.t0 == 0);
    CHECK(r.particles.empty());
    CHECK(r.solid_bbox.empty());
  }

  SECTION("valid obstacle with a particle already west") {
    Configuration cfg = block_field(f);
    cfg.set({-5, 2}, f.alphabet->require("U"));
    cfg.set({-5, 1}, f.alphabet->require("D"));
    ErosionReport r = erode(f, cfg, 10);
    CHECK(r.t0 == 0);
    CHECK(r.final == cfg);
    REQUIRE(r.particles.size() == 2);
    CHECK(r.particles[0] == Position{-5, 2});
    CHECK(r.particles[1] == Position{-5, 1});
    CHECK(r.solid_bbox == Rect{10, 0, 14, 4});
  }

  SECTION("a lone interior state dies in one step") {
    Configuration cfg(f.alphabet, 0);
    cfg.set({0, 0}, f.alphabet->require("1"));
    ErosionReport r = erode(f, cfg, 10);
    CHECK(r.t0 == 1);
    CHECK(r.final == Configuration(f.alphabet, 0));
    CHECK(format_erosion_report(r) ==
          "status=settled\nt0=1\nsolid_bbox=none\nparticles=0\n");
  }

  SECTION("particle east of a block settles once both halves pass it") {
    // Pair on a blocked row: 5 free steps to the east face, then the split
    // flight around the block; both halves reach x=-1 at t=14.
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    cfg.set({10, 2}, f.alphabet->require("U"));
    cfg.set({10, 1}, f.alphabet->require("D"));
    ErosionReport r = erode(f, cfg, 100);
    CHECK(r.status == ErosionStatus::Settled);
    CHECK(r.t0 == 14);
    REQUIRE(r.particles.size() == 2);
    CHECK(r.particles[0] == Position{-1, 5});
    CHECK(r.particles[1] == Position{-1, 0});
    CHECK(r.solid_bbox == Rect{0, 0, 4, 4});
  }

  SECTION("timeout is a value") {
    Configuration cfg(f.alphabet, 0);
    cfg.set({10, 2}, f.alphabet->require("U"));
    cfg.set({10, 1}, f.alphabet->require("D"));
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    ErosionReport r = erode(f, cfg, 5);
    CHECK(r.timed_out());
    CHECK(r.t0 == -1);
    CHECK(!r.final.cells().empty());
  }

  SECTION("onion field sheds liquid noise") {
    TileSet free1 = TileSet::free_single();
    CARule g = rule_g_tau(free1);
    Configuration onion(g.alphabet, 0);
    place_onion(onion, {0, 0}, 7);
    Configuration cfg = onion;
    Rng rng(404);
    for (int i = 0; i < 10; ++i) {
      Position p{rng.range(5, 12), rng.range(-6, 6)};
      cfg.set(p, rng.chance(0.5) ? g.u_state : g.d_state);
    }
    ErosionReport r = erode(g, cfg, 200);
    REQUIRE(r.status == ErosionStatus::Settled);
    for (const auto& [p, s] : onion.cells()) CHECK(r.final.get(p) == s);
    std::vector<Obstacle> obs = extract_obstacles(g, r.final);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].kind == ObstacleKind::Onion);
    CHECK(obs[0].rect == Rect{-3, -3, 3, 3});
  }

  SECTION("preconditions") {
    Configuration bad(f.alphabet, f.alphabet->require("1"));
    REQUIRE_THROWS_AS(erode(f, bad, 5), RuleError);
    CARule lifted = lift_1d_to_2d(rule1d_identity(2));
    REQUIRE_THROWS_AS(erode(lifted, Configuration(lifted.alphabet, 0), 5),
                      RuleError);
    TileSet free1 = TileSet::free_single();
    CARule g = rule_g_tau(free1);
    REQUIRE_THROWS_AS(erode(g, Configuration(f.alphabet, 0), 5),
                      AlphabetMismatch);
  }
}

TEST_CASE("seeded soups erode and extract cleanly") {
  CARule f = rule_f();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Configuration cfg = random_soup(f.alphabet, {-10, -10, 9, 9}, seed, 0.4);
    ErosionReport r = erode(f, cfg, 4 * 20 * 20);
    REQUIRE(r.status == ErosionStatus::Settled);
    std::vector<Obstacle> obs = extract_obstacles(f, r.final);
    for (std::size_t i = 0; i < obs.size(); ++i)
      for (std::size_t j = i + 1; j < obs.size(); ++j)
        CHECK(cadyn::detail::rect_gap(obs[i].rect, obs[j].rect) >= 3);
  }
}

TEST_CASE("obstacle extraction reads shapes, kinds and spacing") {
  CARule f = rule_f();

  SECTION("all-liquid gives an empty list") {
    CHECK(extract_obstacles(f, Configuration(f.alphabet, 0)).empty());
  }

  SECTION("single plain block with derived corners") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {2, 3}, 3, 3);
    std::vector<Obstacle> obs = extract_obstacles(f, cfg);
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].kind == ObstacleKind::Plain);
    CHECK(obs[0].rect == Rect{2, 3, 6, 7});
    CHECK(obs[0].half_perimeter() == 10);
    CHECK(obs[0].tile == -1);
    CHECK(obs[0].corner_a() == Position{1, 8});
    CHECK(obs[0].corner_b() == Position{7, 8});
    CHECK(obs[0].corner_c() == Position{7, 2});
  }

  SECTION("minimum block and several obstacles sort north-first") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 2, 2);    // 4x4 block
    place_rect_obstacle(cfg, {10, 5}, 3, 2);   // 5x4 block further north
    std::vector<Obstacle> obs = extract_obstacles(f, cfg);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].rect == Rect{10, 5, 14, 8});
    CHECK(obs[1].rect == Rect{0, 0, 3, 3});
    CHECK(format_obstacles(obs) ==
          "obstacles=2\n"
          "obstacle=plain rect=(10,5)..(14,8) p=9\n"
          "obstacle=plain rect=(0,0)..(3,3) p=8\n");
  }

  SECTION("onion and plain kinds coexist under the mixed rule") {
    TileSet free1 = TileSet::free_single();
    CARule h = rule_h_tau(free1);
    Configuration cfg(h.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    place_onion(cfg, {20, 3}, 5);
    std::vector<Obstacle> obs = extract_obstacles(h, cfg);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].kind == ObstacleKind::Onion);
    CHECK(obs[0].rect == Rect{18, 1, 22, 5});
    CHECK(obs[0].tile == 0);
    CHECK(obs[1].kind == ObstacleKind::Plain);
  }

  SECTION("obstacles at legal minimum spacing extract cleanly") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    place_rect_obstacle(cfg, {7, 0}, 3, 3);  // two liquid columns between
    std::vector<Obstacle> obs = extract_obstacles(f, cfg);
    REQUIRE(obs.size() == 2);
    CHECK(cadyn::detail::rect_gap(obs[0].rect, obs[1].rect) == 3);
  }

  SECTION("obstacles too close violate the language") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    place_rect_obstacle(cfg, {6, 0}, 3, 3);  // one liquid column between
    try {
      extract_obstacles(f, cfg);
      FAIL("expected ObstacleError");
    } catch (const ObstacleError& e) {
      CHECK(e.kind == ObstacleErrorKind::NotInLanguage);
    }
  }

  SECTION("damaged block violates the language") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {0, 0}, 3, 3);
    cfg.set({2, 2}, 0);
    REQUIRE_THROWS_AS(extract_obstacles(f, cfg), ObstacleError);
  }
}

TEST_CASE("vertical reflection with state flip commutes with the rules") {
  CARule f = rule_f();
  for (std::uint64_t seed : {3u, 4u}) {
    Configuration cfg = random_soup(f.alphabet, {-6, -6, 6, 6}, seed, 0.4);
    for (int axis : {0, 2}) {
      Configuration a = cadyn::detail::reflect_vertical(step(f, cfg), axis);
      Configuration b = step(f, cadyn::detail::reflect_vertical(cfg, axis));
      REQUIRE(a == b);
    }
  }
  Configuration cfg = block_field(f);
  cfg.set({20, 2}, f.alphabet->require("U"));
  cfg.set({20, 1}, f.alphabet->require("D"));
  for (int t = 0; t < 20; ++t) {
    REQUIRE(cadyn::detail::reflect_vertical(step(f, cfg), 1) ==
            step(f, cadyn::detail::reflect_vertical(cfg, 1)));
    cfg = step(f, cfg);
  }
  TileSet free1 = TileSet::free_single();
  CARule g = rule_g_tau(free1);
  Configuration ocfg(g.alphabet, 0);
  place_onion(ocfg, {0, 0}, 5);
  ocfg.set({8, 3}, g.u_state);
  ocfg.set({8, 2}, g.d_state);
  for (int t = 0; t < 8; ++t) {
    REQUIRE(cadyn::detail::reflect_vertical(step(g, ocfg), 0) ==
            step(g, cadyn::detail::reflect_vertical(ocfg, 0)));
    ocfg = step(g, ocfg);
  }
}

TEST_CASE("infiltration path runs east and detours around a block") {
  CARule f = rule_f();

  SECTION("no obstacles: straight east ray") {
    Configuration cfg(f.alphabet, 0);
    Path path = infiltration_path(f, cfg, {3, -2}, 12, 10);
    CHECK(path.start == Position{3, -2});
    CHECK(!path.mirrored);
    CHECK(path.t0 == 0);
    CHECK(path.n0 == 0);
    REQUIRE(path.points.size() == 12);
    for (int n = 0; n < 12; ++n)
      CHECK(path.points[static_cast<std::size_t>(n)] == Position{3 + n, -2});
    CHECK(path.detours.empty());
  }

  SECTION("single block detour adds exactly p+1 entries") {
    Configuration cfg = block_field(f);
    Path path = infiltration_path(f, cfg, {0, 2}, 15, 100);
    REQUIRE(path.milestones.size() == 15);
    REQUIRE(path.detours.size() == 1);
    CHECK(path.detours[0].from_index == 9);
    CHECK(path.detours[0].rect == Rect{10, 0, 14, 4});
    CHECK(path.detours[0].added == 11);  // half perimeter 10, plus one

    // Free prefix west of the block.
    for (int n = 0; n <= 9; ++n)
      CHECK(path.points[static_cast<std::size_t>(n)] == Position{n, 2});
    // The harvested flight, backwards: down the west face, over the top,
    // east to the release column, down to the release row.
    const std::vector<Position> detour = {
        {9, 3},  {9, 4},  {9, 5},  {10, 5}, {11, 5}, {12, 5},
        {13, 5}, {14, 5}, {15, 5}, {15, 4}, {15, 3}};
    for (std::size_t i = 0; i < detour.size(); ++i)
      CHECK(path.points[10 + i] == detour[i]);
    CHECK(path.milestones[10] == 20);
    CHECK(path.points[21] == Position{16, 3});

    // Milestone x coordinates strictly increase, so the norm diverges.
    for (std::size_t i = 1; i < path.milestones.size(); ++i)
      CHECK(path.points[path.milestones[i]].x >
            path.points[path.milestones[i - 1]].x);

    for (std::size_t i = 0; i < 12; ++i)
      CHECK(verify_infiltration(f, cfg, {0, 2}, path, path.milestones[i]));
    CHECK_FALSE(verify_infiltration(f, cfg, {5, 5}, path, 0));

    CHECK(format_path(path) ==
          "start=(0,2)\nmirrored=0\nt0=0\nn0=0\npoints=25\nmilestones=15\n"
          "detour_at=9 rect=(10,0)..(14,4) added=11\n");
  }

  SECTION("two blocks chain two detours") {
    Configuration cfg = block_field(f);
    place_rect_obstacle(cfg, {20, 1}, 4, 4);  // 6x6 block (20,1)..(25,6)
    Path path = infiltration_path(f, cfg, {0, 3}, 20, 100);
    REQUIRE(path.detours.size() == 2);
    CHECK(path.detours[0].rect == Rect{10, 0, 14, 4});
    CHECK(path.detours[0].added == 11);
    CHECK(path.detours[1].rect == Rect{20, 1, 25, 6});
    CHECK(path.detours[1].added == 13);
    for (std::size_t i = 0; i < path.milestones.size(); i += 2)
      CHECK(verify_infiltration(f, cfg, {0, 3}, path, path.milestones[i]));
  }

  SECTION("errors") {
    Configuration cfg = block_field(f);
    REQUIRE_THROWS_AS(infiltration_path(f, cfg, {12, 2}, 5, 50),
                      InfiltrationError);
    try {
      infiltration_path(f, cfg, {12, 2}, 5, 50);
    } catch (const InfiltrationError& e) {
      CHECK(e.kind == InfiltrationErrorKind::BadStart);
    }
    cfg.set({30, 10}, f.alphabet->require("U"));
    cfg.set({30, 9}, f.alphabet->require("D"));
    try {
      infiltration_path(f, cfg, {0, 2}, 5, 0);
      FAIL("expected NotEroded");
    } catch (const InfiltrationError& e) {
      CHECK(e.kind == InfiltrationErrorKind::NotEroded);
    }
  }
}

TEST_CASE("infiltration erodes junk first and indexes past t0") {
  CARule f = rule_f();
  Configuration cfg = block_field(f);
  cfg.set({25, 10}, f.alphabet->require("U"));  // free-row junk pair east
  cfg.set({25, 9}, f.alphabet->require("D"));
  cfg.set({-20, 10}, f.alphabet->require("1"));  // dies at t=1

  ErosionReport er = erode(f, cfg, 100);
  REQUIRE(er.t0 == 16);  // junk pair crosses x=10 after 16 steps

  Path path = infiltration_path(f, cfg, {0, 2}, 15, 100);
  CHECK(path.t0 == 16);
  CHECK(path.n0 == 20);  // first milestone index at or after t0
  int checked = 0;
  for (std::size_t mi : path.milestones)
    if (mi >= path.n0 && checked < 10) {
      CHECK(verify_infiltration(f, cfg, {0, 2}, path, mi));
      ++checked;
    }
  CHECK(checked >= 5);
}

TEST_CASE("mirrored infiltration starts above the blocked cell") {
  CARule f = rule_f();

  SECTION("straight ray shifted one row north") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {-2, 0}, 3, 3);  // block (-2,0)..(2,4)
    Position z0{0, 5};                        // solid south, liquid north
    Path path = infiltration_path(f, cfg, z0, 12, 50);
    CHECK(path.mirrored);
    CHECK(path.start == Position{0, 6});
    for (int n = 0; n < 12; ++n)
      CHECK(path.points[static_cast<std::size_t>(n)] == Position{n, 6});
    for (std::size_t n = 0; n < 12; n += 2)
      CHECK(verify_infiltration(f, cfg, z0, path, n));
  }

  SECTION("reflected construction re-derives the true detour") {
    Configuration cfg(f.alphabet, 0);
    place_rect_obstacle(cfg, {-2, 0}, 3, 3);   // south block under z0
    place_rect_obstacle(cfg, {10, 4}, 3, 3);   // east block (10,4)..(14,8)
    Position z0{0, 5};
    Path path = infiltration_path(f, cfg, z0, 14, 50);
    REQUIRE(path.mirrored);
    CHECK(path.start == Position{0, 6});
    REQUIRE(path.detours.size() == 1);
    CHECK(path.detours[0].from_index == 9);
    CHECK(path.detours[0].rect == Rect{10, 4, 14, 8});
    CHECK(path.detours[0].added == 11);
    CHECK(path.points[path.milestones[10]] == Position{15, 7});
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(verify_infiltration(f, cfg, z0, path, path.milestones[i]));
  }
}

TEST_CASE("sensitivity probe builds constructive witnesses") {
  CARule f = rule_f();

  SECTION("empty field: frozen witness geometry") {
    Configuration x(f.alphabet, 0);
    ProbeReport r = sensitivity_probe(f, x, 2, 6, 60);
    REQUIRE(r.outcome == ProbeOutcome::WitnessFound);
    CHECK(r.perturb_at == Position{7, 2});
    CHECK(r.witness_time == 5);
    CHECK(r.witness_cell == Position{2, 2});
    REQUIRE(r.witness.has_value());
    CHECK(agreement_radius(x, *r.witness) >= 6);
    CHECK(format_probe_report(r) ==
          "mode=sensitivity\nstrategy=constructive\nm=2\nk=6\nt_max=60\n"
          "outcome=witness\nseed=0\ntrials=0\nwitness_time=5\n"
          "witness_at=(2,2)\nperturb_at=(7,2)\n");
  }

  SECTION("witness threads through an obstacle field") {
    Configuration x = block_field(f);
    ProbeReport r = sensitivity_probe(f, x, 3, 16, 200);
    REQUIRE(r.outcome == ProbeOutcome::WitnessFound);
    CHECK(r.perturb_at == Position{17, 2});
    CHECK(r.witness_time == 19);
    CHECK(r.witness_cell == Position{3, 3});
    CHECK(agreement_radius(x, *r.witness) >= 16);
  }
}

TEST_CASE("random probe strategies share seeded trials") {
  CARule f = rule_f();
  Configuration x(f.alphabet, 0);
  ProbeReport s = sensitivity_probe(f, x, 3, 6, 40, ProbeStrategy::Random, 1, 150);
  REQUIRE(s.outcome == ProbeOutcome::WitnessFound);
  CHECK(s.trials == 150);
  CHECK(s.witness_trial >= 0);
  CHECK(norm_inf(*s.witness_cell) <= 3);
  CHECK(s.witness_time <= 40);
  REQUIRE(s.witness.has_value());
  CHECK(agreement_radius(x, *s.witness) >= 6);

  // The equicontinuity falsifier runs the identical trial schedule.
  ProbeReport e = equicontinuity_probe(f, x, 3, 6, 40, ProbeStrategy::Random, 1, 150);
  REQUIRE(e.outcome == ProbeOutcome::WitnessFound);
  CHECK(e.witness_trial == s.witness_trial);
  CHECK(e.witness_time == s.witness_time);
  CHECK(e.witness_cell == s.witness_cell);
}

TEST_CASE("equicontinuity certificate covers onion interiors") {
  TileSet free1 = TileSet::free_single();
  CARule g = rule_g_tau(free1);

  SECTION("exact onion certifies radius k-2") {
    for (int k : {5, 7}) {
      Configuration x(g.alphabet, 0);
      place_onion(x, {0, 0}, 2 * k + 1);
      ProbeReport r = equicontinuity_probe(g, x, k - 2, k, 50);
      CHECK(r.outcome == ProbeOutcome::CertificateHolds);
      CHECK(r.certified_radius == k - 2);
    }
  }

  SECTION("m beyond the certified radius is refused") {
    Configuration x(g.alphabet, 0);
    place_onion(x, {0, 0}, 11);
    ProbeReport r = equicontinuity_probe(g, x, 5, 5, 50);
    CHECK(r.outcome == ProbeOutcome::NoWitness);
    CHECK(r.certified_radius == 3);
    CHECK(r.note == "certificate covers radius k-2 only");
  }

  SECTION("bigger centered onion still certifies") {
    Configuration x(g.alphabet, 0);
    place_onion(x, {0, 0}, 15);
    ProbeReport r = equicontinuity_probe(g, x, 3, 5, 50);
    CHECK(r.outcome == ProbeOutcome::CertificateHolds);
  }

  SECTION("undersized or missing onions are rejected") {
    Configuration x(g.alphabet, 0);
    place_onion(x, {0, 0}, 9);
    CHECK(equicontinuity_probe(g, x, 3, 5, 50).note ==
          "B_k is not a full onion obstacle");
    CHECK(equicontinuity_probe(g, Configuration(g.alphabet, 0), 3, 5, 50).note ==
          "B_k is not a full onion obstacle");
  }

  SECTION("random falsification fails on a valid onion") {
    Configuration x(g.alphabet, 0);
    place_onion(x, {0, 0}, 11);
    ProbeReport r =
        equicontinuity_probe(g, x, 3, 5, 50, ProbeStrategy::Random, 9, 200);
    CHECK(r.outcome == ProbeOutcome::NoWitness);
    CHECK(r.trials == 200);
  }

  SECTION("marked-center language accepts only the designated center") {
    TileSet ts = two_free_tiles();
    CARule gh = rule_g_hat(ts, 0, 1);
    Configuration good(gh.alphabet, 0);
    place_onion_with(good, {0, 0}, 11,
                     [](int dx, int dy) { return dx == 0 && dy == 0 ? 0 : 1; });
    ProbeReport ok = equicontinuity_probe(gh, good, 3, 5, 50);
    CHECK(ok.outcome == ProbeOutcome::CertificateHolds);

    Configuration bad(gh.alphabet, 0);
    place_onion(bad, {0, 0}, 11, 1);  // beta at the center
    ProbeReport no = equicontinuity_probe(gh, bad, 3, 5, 50);
    CHECK(no.outcome == ProbeOutcome::NoWitness);
    CHECK(no.note == "onion is not in the rule's language");
  }
}

TEST_CASE("probes never report both positives at the same radii") {
  TileSet free1 = TileSet::free_single();
  CARule g = rule_g_tau(free1);
  Configuration onion(g.alphabet, 0);
  place_onion(onion, {0, 0}, 11);
  ProbeReport equ = equicontinuity_probe(g, onion, 3, 5, 50);
  ProbeReport sens = sensitivity_probe(g, onion, 3, 5, 50);
  CHECK(equ.outcome == ProbeOutcome::CertificateHolds);
  CHECK(sens.outcome == ProbeOutcome::NoWitness);
  CHECK(sens.note == "no liquid cell within radius m");

  CARule f = rule_f();
  Configuration empty(f.alphabet, 0);
  ProbeReport sens2 = sensitivity_probe(f, empty, 2, 6, 60);
  ProbeReport equ2 = equicontinuity_probe(f, empty, 2, 6, 60);
  CHECK(sens2.outcome == ProbeOutcome::WitnessFound);
  CHECK(equ2.outcome != ProbeOutcome::CertificateHolds);
}

TEST_CASE("blocking predicate matches hand enumeration") {
  Rule1D ident = rule1d_identity(2);
  Rule1D wall1 = rule1d_wall(2, 1);
  Rule1D wall0 = rule1d_wall(2, 0);
  Rule1D shift = rule1d_left_shift(2);

  SECTION("identity blocks once the word covers the central columns") {
    CHECK_FALSE(blocking_check_1d(ident, {0}, 3));
    CHECK_FALSE(blocking_check_1d(ident, {0, 0}, 3));
    CHECK(blocking_check_1d(ident, {0, 0, 0}, 3));
    CHECK(blocking_check_1d(ident, {1, 0, 1}, 3));
  }

  SECTION("wall state pins its column") {
    CHECK(blocking_check_1d(wall1, {0, 0, 1}, 4));
    CHECK(blocking_check_1d(wall1, {0, 1, 1}, 4));
    CHECK_FALSE(blocking_check_1d(wall1, {0, 0, 0}, 4));
    CHECK_FALSE(blocking_check_1d(wall1, {0, 1, 0}, 4));
    CHECK(blocking_check_1d(wall0, {0, 0, 0}, 4));
  }

  SECTION("any word of width 2r+1 blocks at horizon zero") {
    CHECK(blocking_check_1d(shift, {0, 0, 0}, 0));
    CHECK_FALSE(blocking_check_1d(shift, {0, 0}, 0));
    CHECK_FALSE(blocking_check_1d(shift, {0, 0, 0}, 1));
  }

  SECTION("size guard trips before enumeration blows up") {
    REQUIRE_THROWS_AS(blocking_check_1d(ident, {0}, 20), SizeGuardError);
    REQUIRE_THROWS_AS(blocking_check_1d(wall1, {0, 0, 1}, 4, 8), SizeGuardError);
  }
}

TEST_CASE("blocking search walks length-then-lex order") {
  Rule1D ident = rule1d_identity(2);
  auto w = blocking_search_1d(ident, 3, 3);
  REQUIRE(w.has_value());
  CHECK(*w == std::vector<State>{0, 0, 0});
  CHECK(format_word(ident, *w) == "000");

  Rule1D wall1 = rule1d_wall(2, 1);
  auto w1 = blocking_search_1d(wall1, 3, 4);
  REQUIRE(w1.has_value());
  CHECK(format_word(wall1, *w1) == "001");

  Rule1D wall0 = rule1d_wall(2, 0);
  auto w0 = blocking_search_1d(wall0, 3, 4);
  REQUIRE(w0.has_value());
  CHECK(format_word(wall0, *w0) == "000");

  CHECK_FALSE(blocking_search_1d(rule1d_left_shift(2), 3, 4).has_value());

  Rule1D wide = rule1d_identity(2, 2);
  auto w2 = blocking_search_1d(wide, 5, 2);
  REQUIRE(w2.has_value());
  CHECK(w2->size() == 5);
}

TEST_CASE("blocking words lift to column bands in two dimensions") {
  Rule1D wall1 = rule1d_wall(2, 1);
  CARule lifted = lift_1d_to_2d(wall1);
  // Rows carry the blocking word 001 on columns -1..1; everything else in
  // the band is seeded noise that differs between the two configurations.
  auto build = [&](std::uint64_t seed) {
    Rng rng(seed);
    Configuration cfg(lifted.alphabet, 0);
    for (int y = -6; y <= 6; ++y) {
      for (int x = -12; x <= 12; ++x) {
        if (x >= -1 && x <= 1)
          cfg.set({x, y}, static_cast<State>(x == 1 ? 1 : 0));
        else
          cfg.set({x, y}, static_cast<State>(rng.below(2)));
      }
    }
    return cfg;
  };
  Configuration a = build(71), b = build(72);
  REQUIRE(a.cells() != b.cells());
  Rect band{-1, -6, 1, 6};
  for (int t = 0; t < 20; ++t) {
    a = step(lifted, a);
    b = step(lifted, b);
    REQUIRE(extract_window(a, band).cells == extract_window(b, band).cells);
  }

  // The lifted left shift has no such band: a far-east difference reaches
  // the center column in exactly as many steps.
  CARule shift = lift_1d_to_2d(rule1d_left_shift(2));
  Configuration c(shift.alphabet, 0), d(shift.alphabet, 0);
  d.set({4, 0}, 1);
  for (int t = 0; t < 4; ++t) {
    c = step(shift, c);
    d = step(shift, d);
  }
  CHECK(c.get({0, 0}) != d.get({0, 0}));
}
