#include <doctest.h>

#include <random>
#include <sstream>

#include "linerank/case_io.hpp"
#include "linerank/errors.hpp"
#include "oracles.hpp"

using namespace linerank;

namespace {

const char* kThreeBus = R"(function mpc = tiny
mpc.baseMVA = 100;
% bus_i type Pd
mpc.bus = [
  1 3 0;
  2 1 50;   % load
  3 1 50;
];
mpc.gen = [
  1 100;
];
mpc.branch = [
  1 2 0 0.1 0 60 60 60 0;
  2 3 0 0.1 0 60 60 60 0;
  1 3 0 0.1 0 60 60 60 0;
];
mpc.gencost = [ 2 0 0 3 0.1 10 0 ];
)";

}  // namespace

TEST_CASE("three-bus case parses") {
  const GridCase g = parse_case(std::string_view(kThreeBus));
  CHECK(g.bus_count() == 3);
  CHECK(g.branch_count() == 3);
  REQUIRE(g.generators.size() == 1);
  CHECK(g.generators[0].bus == 1);
  CHECK(g.buses[0].is_stochastic);
  CHECK_FALSE(g.buses[1].is_stochastic);
  CHECK(g.buses[1].demand == 50);
  CHECK(g.branches[2].from_bus == 1);
  CHECK(g.branches[2].to_bus == 3);
  CHECK(g.branches[2].rating == 60);
  CHECK(g.branches[0].index == 1);
  CHECK(g.base_mva == 100);
  CHECK_NOTHROW(validate(g));
}

TEST_CASE("continuation lines, newline rows and cell blocks") {
  const std::string text = R"(
mpc.baseMVA = 10;
mpc.bus_name = {
  'a; b';
  'c';
};
mpc.bus = [1 3 0
           2 1 ...
           5];
mpc.gen = [2 5];
mpc.branch = [1 2 0 0.5 0 0 0 0 1.0];
)";
  const GridCase g = parse_case(std::string_view(text));
  CHECK(g.bus_count() == 2);
  CHECK(g.buses[1].demand == 5);
  CHECK(g.buses[1].is_stochastic);
  CHECK(g.branches[0].tap_ratio == 1.0);
  CHECK(g.branches[0].rating == 0.0);
}

TEST_CASE("parse errors carry line numbers") {
  SUBCASE("ragged row") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.bus = [\n1 3 0;\n2 1;\n];\n";
    try {
      parse_case(std::string_view(text));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("bad token") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.bus = [\n1 3 x;\n];\n";
    CHECK_THROWS_AS(parse_case(std::string_view(text)), ParseError);
  }
  SUBCASE("missing branch block") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.bus = [1 3 0; 2 1 0];\nmpc.gen = [1 0];\n";
    CHECK_THROWS_AS(parse_case(std::string_view(text)), ParseError);
  }
  SUBCASE("unterminated block") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.bus = [1 3 0;\n";
    CHECK_THROWS_AS(parse_case(std::string_view(text)), ParseError);
  }
  SUBCASE("duplicate block") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.baseMVA = 10;\n";
    CHECK_THROWS_AS(parse_case(std::string_view(text)), ParseError);
  }
  SUBCASE("too few branch columns") {
    const std::string text = "mpc.baseMVA = 100;\nmpc.bus = [1 3 0; 2 1 0];\nmpc.gen = [1 0];\nmpc.branch = [1 2 0 0.1];\n";
    CHECK_THROWS_AS(parse_case(std::string_view(text)), ParseError);
  }
}

TEST_CASE("validation rejects broken networks") {
  GridCase g = parse_case(std::string_view(kThreeBus));
  SUBCASE("self-loop") {
    g.branches[0].to_bus = 1;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("zero reactance") {
    g.branches[1].reactance = 0;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("negative tap") {
    g.branches[1].tap_ratio = -1;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("unknown bus") {
    g.branches[1].to_bus = 9;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("disconnected") {
    g.buses.push_back(Bus{4, 0.0, false, true});
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("duplicate bus id") {
    g.buses[2].id = 2;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
  SUBCASE("base MVA") {
    g.base_mva = 0;
    CHECK_THROWS_AS(validate(g), ValidationError);
  }
}

TEST_CASE("canonical output parses back to the same case") {
  const GridCase g = load_case(LINERANK_DATA_DIR "/case39.m");
  std::ostringstream out;
  write_canonical(g, out);
  const GridCase back = parse_case(std::string_view(out.str()));
  CHECK(back == g);
}

TEST_CASE("IEEE 39-bus case") {
  const GridCase g = load_case(LINERANK_DATA_DIR "/case39.m");
  CHECK_NOTHROW(validate(g));
  CHECK(g.bus_count() == 39);
  CHECK(g.branch_count() == 46);
  CHECK(g.generators.size() == 10);
  int stochastic = 0;
  for (const auto& b : g.buses) stochastic += b.is_stochastic;
  CHECK(stochastic == 10);
  CHECK(g.branches[26].from_bus == 16);
  CHECK(g.branches[26].to_bus == 19);
}

TEST_CASE("susceptance uses the tap ratio") {
  Branch b;
  b.reactance = 0.5;
  CHECK(susceptance(b) == doctest::Approx(2.0));
  b.tap_ratio = 1.25;
  CHECK(susceptance(b) == doctest::Approx(1.6));
  b.reactance = 0;
  CHECK_THROWS_AS(susceptance(b), DomainError);
}

TEST_CASE("union-find connectivity agrees with breadth-first search") {
  std::mt19937 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nodes = 2 + gen() % 12;
    const std::size_t count = gen() % (2 * nodes);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t e = 0; e < count; ++e) edges.emplace_back(gen() % nodes, gen() % nodes);
    CHECK(is_connected(nodes, edges) == oracle::bfs_connected(nodes, edges));
  }
}
