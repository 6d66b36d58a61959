#include <catch2/catch_amalgamated.hpp>

#include "cadyn/lattice.hpp"

using namespace cadyn;

TEST_CASE("alphabet layouts") {
  auto f = Alphabet::make_f();
  REQUIRE(f->size() == 12);
  CHECK(f->name(0) == "0");
  CHECK(f->name(1) == "U");
  CHECK(f->name(2) == "D");
  CHECK(f->name(3) == "1");
  CHECK(f->is_liquid(f->require("U")));
  CHECK(f->is_solid(f->require("1")));
  for (auto n : {"dn", "up", "lf", "rt", "dl", "dr", "ul", "ur"})
    CHECK(f->is_solid(f->require(n)));

  auto ft = Alphabet::make_f_tau(3);
  REQUIRE(ft->size() == 3 + 8 + 3);
  CHECK(ft->info(ft->require("t2")).tile == 2);
  CHECK(ft->by_name("1") == std::nullopt);

  auto gt = Alphabet::make_g_tau(2);
  REQUIRE(gt->size() == 3 + 2 * 9);
  auto s = gt->require("t1.bt");
  CHECK(gt->info(s).tile == 1);
  CHECK(gt->info(s).xpart == static_cast<int>(XPart::Bt));

  auto ht = Alphabet::make_h_tau(1);
  REQUIRE(ht->size() == 12 + 9);
  CHECK(ht->by_name("1").has_value());
  CHECK(ht->by_name("t0.dn").has_value());

  auto od = Alphabet::make_one_d(4);
  REQUIRE(od->size() == 4);
  CHECK(od->require("3") == 3);
}

TEST_CASE("configuration get/set canonical form") {
  auto f = Alphabet::make_f();
  Configuration c(f, f->require("0"));
  CHECK(c.get({5, -3}) == f->require("0"));
  c.set({0, 1}, f->require("U"));
  CHECK(c.get({0, 1}) == f->require("U"));
  CHECK(c.cells().size() == 1);
  c.set({0, 1}, f->require("0"));  // re-inserting background erases
  CHECK(c.is_uniform());

  Configuration solid_bg(f, f->require("1"));
  CHECK(solid_bg.get({9, 9}) == f->require("1"));
}

TEST_CASE("agreement radius") {
  auto f = Alphabet::make_f();
  Configuration x(f, 0), y(f, 0);
  CHECK(!agreement_radius(x, y).has_value());

  y.set({3, 0}, f->require("U"));
  CHECK(agreement_radius(x, y) == 3);
  CHECK(agreement_radius(y, x) == 3);  // symmetric

  Configuration z(f, f->require("1"));
  CHECK(agreement_radius(x, z) == 0);  // differ at origin via backgrounds

  SECTION("window characterization") {
    auto r = agreement_radius(x, y).value();
    auto wx = extract_window(x, Rect::centered({0, 0}, r - 1));
    auto wy = extract_window(y, Rect::centered({0, 0}, r - 1));
    CHECK(wx.cells == wy.cells);
  }

  SECTION("ultrametric inequality on sampled triples") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      Configuration a(f, 0), b(f, 0), c(f, 0);
      for (Configuration* cfg : {&a, &b, &c})
        for (int i = 0; i < 5; ++i)
          cfg->set({rng.range(-4, 4), rng.range(-4, 4)},
                   static_cast<State>(rng.below(12)));
      auto d = [](const Configuration& p, const Configuration& q) {
        auto r = agreement_radius(p, q);
        return r ? std::pow(2.0, -*r) : 0.0;
      };
      CHECK(d(a, c) <= std::max(d(a, b), d(b, c)) + 1e-12);
    }
  }
}

TEST_CASE("window extraction") {
  auto f = Alphabet::make_f();
  Configuration c(f, 0);
  c.set({1, 2}, f->require("D"));
  auto w = extract_window(c, {0, 0, 2, 2});
  REQUIRE(w.cells.size() == 9);
  CHECK(w.at({1, 2}) == f->require("D"));
  CHECK(w.cells[1] == f->require("D"));  // north row first
  CHECK(w.at({0, 0}) == 0);

  auto single = extract_window(c, {0, 0, 0, 0});
  CHECK(single.cells == std::vector<State>{c.get({0, 0})});
}

TEST_CASE("translation") {
  auto f = Alphabet::make_f();
  Configuration c(f, 0);
  c.set({2, 3}, f->require("1"));
  auto t = c.translated({-2, -3});
  CHECK(t.get({0, 0}) == f->require("1"));
  CHECK(t.cells().size() == 1);
}

TEST_CASE("text round trip") {
  auto f = Alphabet::make_f();
  std::string text =
      "# particle fixture\n"
      "background 0\n"
      "0 1 U\n"
      "0 0 D\n";
  auto c = parse_configuration(text, f);
  CHECK(c.get({0, 1}) == f->require("U"));
  CHECK(c.get({0, 0}) == f->require("D"));
  auto again = parse_configuration(format_configuration(c), f);
  CHECK(again == c);

  CHECK_THROWS_AS(parse_configuration("background Q\n", f), ParseError);
  CHECK_THROWS_AS(parse_configuration("0 0 U\n", f), ParseError);
  CHECK_THROWS_AS(parse_configuration("background 0\nx 0 U\n", f), ParseError);
}

TEST_CASE("chebyshev helpers") {
  CHECK(chebyshev({0, 0}, {3, -2}) == 3);
  CHECK(norm_inf({-4, 2}) == 4);
  Rect r{0, 0, 4, 4};
  CHECK(r.area() == 25);
  CHECK(r.grown(1).area() == 49);
  CHECK(r.contains({4, 0}));
  CHECK(!r.contains({5, 0}));
  Rect e;
  CHECK(e.empty());
  e.absorb({2, 2});
  e.absorb({-1, 3});
  CHECK(e == Rect{-1, 2, 2, 3});
}
