#pragma once
// Command-line surface: flag parsing, rule/config loaders, and the
// subcommands wired to the library. All output goes through the provided
// streams so runs are capturable and byte-stable.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cadyn/dynamics.hpp"
#include "cadyn/fixtures.hpp"
#include "cadyn/lattice.hpp"
#include "cadyn/render.hpp"
#include "cadyn/rules.hpp"
#include "cadyn/suite.hpp"
#include "cadyn/tiles.hpp"
#include "cadyn/util.hpp"

namespace cadyn::cli {

struct RunSpec {
  std::string rule_id = "F";
  std::string input;
  std::string out_dir;
  std::string mode = "sens";
  std::string strategy;
  int steps = 0;
  int trace_every = 1;
  int t_max = 500;
  int n_max = 8;
  int m = 3;
  int k = 5;
  int trials = 20;
  std::uint64_t seed = 0;
  std::uint64_t budget = 50'000'000;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spill(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << content;
}

// Rule ids: F | Ftau:<tiles> | Gtau:<tiles> | Htau:<tiles> | Ghat:<tiles>
// | lift:<rule1d>. File-parameterized ids load their parameter eagerly.
inline CARule rule_from_id(const std::string& id) {
  if (id == "F") return rule_f();
  auto colon = id.find(':');
  if (colon == std::string::npos)
    throw ParseError("unknown rule id '" + id + "'");
  std::string head = id.substr(0, colon), path = id.substr(colon + 1);
  if (head == "lift") return lift_1d_to_2d(parse_rule_1d(slurp(path)));
  TileSet ts = parse_tileset(slurp(path));
  if (head == "Ftau") return rule_f_tau(ts);
  if (head == "Gtau") return rule_g_tau(ts);
  if (head == "Htau") return rule_h_tau(ts);
  if (head == "Ghat") return rule_g_hat(ts);
  throw ParseError("unknown rule id '" + id + "'");
}

// Configuration text: one directive per line.
//   cell <x> <y> <state-name>
//   pair <x> <y>              particle pair, U at (x,y), D just south
//   block <x> <y> <iw> <ih>   plain obstacle, south-west corner at (x,y)
//   onion <x> <y> <side> [t]  concentric obstacle centered at (x,y)
inline Configuration load_config(const AlphabetRef& a, const std::string& text) {
  Configuration cfg(a, 0);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto want = [&](bool ok, const char* msg) {
    if (!ok)
      throw ParseError("config line " + std::to_string(lineno) + ": " + msg);
  };
  auto num = [&](const std::string& tok) {
    try {
      return std::stoi(tok);
    } catch (...) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": bad number '" + tok + "'");
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = strip(line);
    if (t.empty() || t[0] == '#') continue;
    auto p = split_ws(t);
    if (p[0] == "cell") {
      want(p.size() == 4, "cell wants: x y state");
      cfg.set({num(p[1]), num(p[2])}, a->require(p[3]));
    } else if (p[0] == "pair") {
      want(p.size() == 3, "pair wants: x y");
      Position u{num(p[1]), num(p[2])};
      cfg.set(u, a->require("U"));
      cfg.set(u.south(), a->require("D"));
    } else if (p[0] == "block") {
      want(p.size() == 5, "block wants: x y iw ih");
      Position sw{num(p[1]), num(p[2])};
      int iw = num(p[3]), ih = num(p[4]);
      want(iw >= 1 && ih >= 1, "block interior must be at least 1x1");
      if (a->by_name("1"))
        place_rect_obstacle(cfg, sw, iw, ih);
      else
        place_rect_obstacle_tau(cfg, sw, iw, ih, [](int, int) { return 0; });
    } else if (p[0] == "onion") {
      want(p.size() == 4 || p.size() == 5, "onion wants: x y side [tile]");
      int side = num(p[3]);
      want(side >= 1 && side % 2 == 1, "onion side must be odd");
      place_onion(cfg, {num(p[1]), num(p[2])}, side,
                  p.size() == 5 ? num(p[4]) : 0);
    } else {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": unknown directive '" + p[0] + "'");
    }
  }
  return cfg;
}

inline int cmd_simulate(const RunSpec& spec, std::ostream& out) {
  if (spec.steps < 0 || spec.trace_every < 1)
    throw ParseError("simulate wants steps >= 0 and trace-every >= 1");
  CARule rule = rule_from_id(spec.rule_id);
  Configuration cfg = load_config(rule.alphabet, slurp(spec.input));
  bool to_dir = !spec.out_dir.empty();
  if (to_dir) std::filesystem::create_directories(spec.out_dir);
  int traced = 0;
  auto emit = [&](int t) {
    Rect r = cfg.bounding_box().grown(1);
    std::string text = "t=" + std::to_string(t) + " rect=" + format_rect(r) +
                       "\n" + render_text(cfg, r);
    if (to_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%04d", t);
      std::string stem = spec.out_dir + "/" + name;
      spill(stem + ".txt", text);
      spill(stem + ".pgm", render_pgm(cfg, r));
    } else {
      out << text;
    }
    ++traced;
  };
  emit(0);
  for (int t = 1; t <= spec.steps; ++t) {
    cfg = step(rule, cfg);
    if (t % spec.trace_every == 0 || t == spec.steps) emit(t);
  }
  if (to_dir) out << "frames=" << traced << "\n";
  return 0;
}

inline int cmd_tile_search(const RunSpec& spec, std::ostream& out) {
  if (spec.n_max < 1) throw ParseError("tile-search wants nmax >= 1");
  TileSet ts = parse_tileset(slurp(spec.input));
  std::optional<int> anchor;
  if (ts.alpha >= 0) anchor = ts.alpha;
  SweepResult sweep = max_square_tiling(ts, spec.n_max, spec.budget, anchor);
  out << "max=" << sweep.max_yes << "\n";
  if (sweep.budget_hit) {
    out << "budget=exceeded\n";
    return 1;
  }
  return 0;
}

inline int cmd_tm_compile(const RunSpec& spec, std::ostream& out) {
  if (spec.out_dir.empty()) throw ParseError("tm-compile wants --out <file>");
  TileSet ts = tm_to_tileset(parse_tm(slurp(spec.input)));
  spill(spec.out_dir, format_tileset(ts));
  out << "tiles=" << ts.n << "\n";
  return 0;
}

inline int cmd_probe(const RunSpec& spec, std::ostream& out) {
  CARule rule = rule_from_id(spec.rule_id);
  Configuration cfg = spec.input.empty()
                          ? Configuration(rule.alphabet, 0)
                          : load_config(rule.alphabet, slurp(spec.input));
  ProbeReport rep;
  if (spec.mode == "sens") {
    ProbeStrategy s = ProbeStrategy::Constructive;
    if (spec.strategy == "random") s = ProbeStrategy::Random;
    else if (!spec.strategy.empty() && spec.strategy != "constructive")
      throw ParseError("sens strategies: constructive, random");
    rep = sensitivity_probe(rule, cfg, spec.m, spec.k, spec.t_max, s,
                            spec.seed, spec.trials);
  } else if (spec.mode == "equ") {
    ProbeStrategy s = ProbeStrategy::Certificate;
    if (spec.strategy == "random") s = ProbeStrategy::Random;
    else if (!spec.strategy.empty() && spec.strategy != "certificate")
      throw ParseError("equ strategies: certificate, random");
    rep = equicontinuity_probe(rule, cfg, spec.m, spec.k, spec.t_max, s,
                               spec.seed, spec.trials);
  } else {
    throw ParseError("probe wants --mode sens or --mode equ");
  }
  out << format_probe_report(rep);
  return 0;
}

inline int cmd_suite(const std::string& filter, std::ostream& out) {
  std::vector<suite::CriterionResult> results = suite::run_acceptance(filter);
  if (results.empty()) throw ParseError("no criterion matches '" + filter + "'");
  bool all = true;
  for (const auto& r : results) {
    out << "C" << (r.id < 10 ? "0" : "") << r.id << " " << r.name << ": "
        << (r.passed ? "pass" : "FAIL") << "\n";
    if (!r.passed) {
      std::istringstream lines(r.report);
      std::string line;
      while (std::getline(lines, line)) out << "  " << line << "\n";
      all = false;
    }
  }
  return all ? 0 : 1;
}

inline int usage(std::ostream& err) {
  err << "usage: cadyn <command> [flags]\n"
         "  simulate     --rule <id> --input <cfg> --steps <n>\n"
         "               [--trace-every <n>] [--out <dir>]\n"
         "  tile-search  --input <tiles> [--nmax <n>] [--budget <n>]\n"
         "  tm-compile   --input <tm> --out <tiles>\n"
         "  probe        --rule <id> --mode {sens,equ} [--input <cfg>]\n"
         "               [--m <n>] [--k <n>] [--tmax <n>] [--seed <n>]\n"
         "               [--strategy <s>] [--trials <n>]\n"
         "  suite        [name]\n"
         "rule ids: F, Ftau:<tiles>, Gtau:<tiles>, Htau:<tiles>,\n"
         "          Ghat:<tiles>, lift:<rule1d>\n";
  return 2;
}

inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  if (argc < 2) return usage(err);
  std::string cmd = argv[1];
  RunSpec spec;
  std::string positional;
  try {
    for (int i = 2; i < argc; ++i) {
      std::string flag = argv[i];
      if (flag.rfind("--", 0) != 0) {
        if (!positional.empty()) throw ParseError("stray argument '" + flag + "'");
        positional = flag;
        continue;
      }
      if (i + 1 >= argc) throw ParseError("flag " + flag + " wants a value");
      std::string val = argv[++i];
      auto as_int = [&] {
        try {
          return std::stoi(val);
        } catch (...) {
          throw ParseError("flag " + flag + ": bad number '" + val + "'");
        }
      };
      auto as_u64 = [&]() -> std::uint64_t {
        try {
          return std::stoull(val);
        } catch (...) {
          throw ParseError("flag " + flag + ": bad number '" + val + "'");
        }
      };
      if (flag == "--rule") spec.rule_id = val;
      else if (flag == "--input") spec.input = val;
      else if (flag == "--out") spec.out_dir = val;
      else if (flag == "--mode") spec.mode = val;
      else if (flag == "--strategy") spec.strategy = val;
      else if (flag == "--steps") spec.steps = as_int();
      else if (flag == "--trace-every") spec.trace_every = as_int();
      else if (flag == "--tmax") spec.t_max = as_int();
      else if (flag == "--nmax") spec.n_max = as_int();
      else if (flag == "--m") spec.m = as_int();
      else if (flag == "--k") spec.k = as_int();
      else if (flag == "--trials") spec.trials = as_int();
      else if (flag == "--seed") spec.seed = as_u64();
      else if (flag == "--budget") spec.budget = as_u64();
      else throw ParseError("unknown flag '" + flag + "'");
    }
    if (cmd == "simulate") return cmd_simulate(spec, out);
    if (cmd == "tile-search") return cmd_tile_search(spec, out);
    if (cmd == "tm-compile") return cmd_tm_compile(spec, out);
    if (cmd == "probe") return cmd_probe(spec, out);
    if (cmd == "suite") return cmd_suite(positional, out);
    err << "unknown command '" << cmd << "'\n";
    return usage(err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cadyn::cli
