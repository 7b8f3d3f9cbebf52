#include "dmtl/syntax.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dmtl;

namespace {
const char* kRecommendRule = "R(?u,?y) :- P(?s,?x), DIAMONDMINUS[0,2] L(?u,?x), P(?s,?y)";
const char* kPropagateRule = "BOXPLUS[0,1] R(?x) :- BOXMINUS[9,10] R(?x)";
}  // namespace

TEST_CASE("parsing the recommendation rule") {
  program p = parse_program(kRecommendRule);
  REQUIRE(p.rules.size() == 1);
  const rule& r = p.rules[0];
  CHECK(r.head == metric_atom::relational("R", {term{true, "u"}, term{true, "y"}}));
  REQUIRE(r.body.size() == 3);
  CHECK(r.body[1].kind == metric_atom::op::dia_minus);
  CHECK(*r.body[1].window == interval::closed(0, 2));
  CHECK(r.body[1].kids[0] == metric_atom::relational("L", {term{true, "u"}, term{true, "x"}}));
  CHECK(p.depth == rational(2));
}

TEST_CASE("parsing the propagation rule and its depth") {
  program p = parse_program(kPropagateRule);
  REQUIRE(p.rules.size() == 1);
  CHECK(p.rules[0].head.kind == metric_atom::op::box_plus);
  CHECK(p.rules[0].body[0].kind == metric_atom::op::box_minus);
  CHECK(p.depth == rational(11));
  CHECK(p.div == rational(1));
}

TEST_CASE("operator-free programs have depth zero") {
  program p = parse_program("A(?x) :- B(?x)\nC(?x) :- A(?x), B(?x)");
  CHECK(p.depth == rational(0));
  CHECK(p.div == rational(1));
}

TEST_CASE("div collects endpoint denominators") {
  program p = parse_program("A(?x) :- BOXMINUS[1/3,0.5] B(?x)");
  // denominators {2,3} -> k = 6
  CHECK(p.div == rational(1, 6));
}

TEST_CASE("rejected rule shapes") {
  CHECK_THROWS_AS(parse_program("A(?x) :- TOP"), parse_error);
  CHECK_THROWS_AS(parse_program("A(?x) :- B(?y)"), parse_error);                      // unsafe
  CHECK_THROWS_AS(parse_program("DIAMONDMINUS[0,1] A(?x) :- B(?x)"), parse_error);    // bad head
  CHECK_THROWS_AS(parse_program("BOTTOM :- B(?x)"), parse_error);                     // bad head
  CHECK_THROWS_AS(parse_program("A(?x) :- BOXMINUS[-1,2] B(?x)"), parse_error);       // negative window
  CHECK_THROWS_AS(parse_program("A(?x) :- B(?x) C(?x)"), parse_error);                // missing comma
  CHECK_THROWS_AS(parse_program("A(?x) :- B(?x) SINCE[0,1] C(?x) SINCE[0,1] D(?x)"), parse_error);
  CHECK_NOTHROW(parse_program("A(?x) :- (B(?x) SINCE[0,1] C(?x)) SINCE[0,1] D(?x)"));
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_program("A(?x) :- B(?x)\nA(?x) :- BOXMINUS[2,1] B(?x)");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line == 2);
    CHECK(e.col > 1);
  }
}

TEST_CASE("TOP and BOTTOM fold through operators") {
  program p = parse_program("A(?x) :- DIAMONDMINUS[0,2] TOP, B(?x)");
  CHECK(p.rules[0].body[0] == metric_atom::top());

  p = parse_program("A(?x) :- TOP SINCE[1,2] B(?x)");
  CHECK(p.rules[0].body[0].kind == metric_atom::op::dia_minus);

  // continuous-side BOTTOM with 0 in the window reduces to the anchor
  p = parse_program("A(?x) :- BOTTOM SINCE[0,2] B(?x)");
  CHECK(p.rules[0].body[0] == metric_atom::relational("B", {term{true, "x"}}));

  // anchor TOP with 0 in the window is TOP, so this body loses its anchor
  CHECK_THROWS_AS(parse_program("A(?x) :- B(?x) SINCE[0,2] TOP"), parse_error);
}

TEST_CASE("dataset parsing") {
  auto facts = parse_dataset("R(a1)@[0,1]\n% comment\nP(s,x)@3\n\nQ@(0,2)");
  REQUIRE(facts.size() == 3);
  CHECK(facts[0] == fact{"R", {"a1"}, interval::closed(0, 1)});
  CHECK(facts[1] == fact{"P", {"s", "x"}, interval::punctual(3)});
  CHECK(facts[2].predicate == "Q");
  CHECK(facts[2].constants.empty());
  CHECK_THROWS_AS(parse_dataset("R(?x)@[0,1]"), parse_error);
  CHECK_THROWS_AS(parse_dataset("R(a)@[2,1]"), parse_error);
  CHECK_THROWS_AS(parse_dataset("R(a)"), parse_error);
}

TEST_CASE("render and reparse yields an identical AST") {
  const char* sources[] = {
      kRecommendRule,
      kPropagateRule,
      "A(?x) :- (B(?x) SINCE[1,2] C(?x)) UNTIL[0,1] D(?x)",
      "BOXMINUS[1/2,3/2] A(?x,c) :- DIAMONDPLUS[0,5] B(?x), E(?x, 42)",
      "A(?x) :- B(?x), BOTTOM",
  };
  for (const char* src : sources) {
    program p1 = parse_program(src);
    program p2 = parse_program(render(p1));
    CHECK(p1.rules == p2.rules);
  }
}

TEST_CASE("depth is invariant under rule reordering and renaming") {
  program p1 = parse_program("A(?x) :- BOXMINUS[0,3] B(?x)\nBOXPLUS[1,2] C(?y) :- A(?y)");
  program p2 = parse_program("BOXPLUS[1,2] C(?v) :- A(?v)\nA(?u) :- BOXMINUS[0,3] B(?u)");
  CHECK(program_depth(p1) == program_depth(p2));
  CHECK(program_depth(p1) == rational(3));
}

TEST_CASE("ruler points") {
  auto pts = ruler_points(rational(1), {rational(0), rational(1)}, interval::closed(0, 3));
  CHECK(pts == std::vector<rational>{0, 1, 2, 3});

  pts = ruler_points(rational(1, 2), {rational(0)}, interval::closed(0, 1));
  CHECK(pts == std::vector<rational>{rational(0), rational(1, 2), rational(1)});

  pts = ruler_points(rational(1), {rational(0), rational(1, 3)}, interval::closed(0, 1));
  CHECK(pts == std::vector<rational>{rational(0), rational(1, 3), rational(1)});

  // open window endpoints are excluded
  pts = ruler_points(rational(1), {rational(0)}, interval(0, 2, false, false));
  CHECK(pts == std::vector<rational>{rational(1)});
}

TEST_CASE("every ruler point is endpoint plus integer multiple of div") {
  rational div(1, 3);
  std::set<rational> endpoints = {rational(1, 2), rational(5)};
  auto pts = ruler_points(div, endpoints, interval::closed(-4, 9));
  REQUIRE(!pts.empty());
  for (const auto& t : pts) CHECK(on_ruler(div, endpoints, t));
}
