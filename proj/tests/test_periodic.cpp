#include "dmtl/periodic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace dmtl;

namespace {

fact_store store_from(const std::string& text) { return parse_store(text); }

// The single-rule propagation program: depth 11, div 1.
program example_program() { return parse_program("BOXPLUS[0,1] R(?x) :- BOXMINUS[9,10] R(?x)"); }

// T^k over {R(a1)@[0,1]}: R(a1) on [0,1],[10,11],...,[10k,10k+1].
fact_store chain_store(int rounds) {
  fact_store s;
  for (int k = 0; k <= rounds; ++k) s.insert(fact{"R", {"a1"}, interval::closed(10 * k, 10 * k + 1)});
  return s;
}

struct pmat_gen {
  std::mt19937 gen{424242};

  fact_store rand_core() {
    fact_store s;
    std::uniform_int_distribution<int> atoms(0, 4), lo(-6, 6), len(0, 3), pick(0, 1);
    int n = atoms(gen);
    for (int i = 0; i < n; ++i) {
      int a = lo(gen), b = a + len(gen);
      bool lc = gen() & 1, hc = gen() & 1;
      if (a == b) lc = hc = true;
      s.insert(fact{pick(gen) ? "P" : "Q", {pick(gen) ? "a" : "b"}, interval(a, b, lc, hc)});
    }
    return s;
  }

  pmat next() {
    std::uniform_int_distribution<int> len(1, 3), pos(6, 9), has(0, 2);
    std::optional<interval> left, right;
    if (has(gen) > 0) {
      int l = len(gen), b = -pos(gen);
      left = interval(b - l, b, true, false);
    }
    if (has(gen) > 0) {
      int l = len(gen), c = pos(gen);
      right = interval(c, c + l, false, true);
    }
    fact_store core = rand_core();
    // sprinkle some content into the period regions so tiles are nonempty
    if (left) core.insert(fact{"P", {"a"}, interval(left->lo(), left->lo(), true, true)});
    if (right) core.insert(fact{"Q", {"b"}, interval(right->hi(), right->hi(), true, true)});
    return make_pmat(std::move(core), left, right);
  }

  interval rand_window() {
    std::uniform_int_distribution<int> lo(-60, 20), len(5, 60);
    int a = lo(gen);
    return interval::closed(a, a + len(gen));
  }
};

}  // namespace

TEST_CASE("unfolding a bounded materialisation is projection") {
  pmat m = bounded_pmat(store_from("R(a)@[0,10]"));
  CHECK(unfold_window(m, interval::closed(2, 3)) == store_from("R(a)@[2,3]"));
  CHECK(unfold_window(m, interval::closed(-50, 50)) == store_from("R(a)@[0,10]"));
}

TEST_CASE("unfolding tiles period content outward") {
  // core [0,1],[10,11],[20,21],[30,31]; right period (24,34] holds [30,31]
  fact_store core = chain_store(3);
  pmat m = make_pmat(core, interval(-24, -23, true, false), interval(24, 34, false, true));
  CHECK(!m.left);  // empty left content normalises away
  REQUIRE(m.right);

  CHECK(unfold_window(m, interval::closed(38, 45)) == store_from("R(a1)@[40,41]"));
  CHECK(unfold_window(m, interval::closed(0, 50)) == project(chain_store(5), interval::closed(0, 50)));
  // window inside the core
  CHECK(unfold_window(m, interval::closed(9, 12)) == store_from("R(a1)@[10,11]"));
  // far-right window: one tile selected without walking all of them
  CHECK(unfold_window(m, interval::closed(9999, 10002)) == store_from("R(a1)@[10000,10001]"));
}

TEST_CASE("unfolding tiles leftward") {
  fact_store core = store_from("P(a)@[-3,-2)\nP(a)@[0,5]");
  pmat m = make_pmat(core, interval(-3, -1, true, false), std::nullopt);
  REQUIRE(m.left);
  CHECK(unfold_window(m, interval::closed(-8, -4)) == store_from("P(a)@[-7,-6)\nP(a)@[-5,-4)"));
}

TEST_CASE("ext extends to the lcm of the period lengths") {
  pmat m1 = make_pmat(store_from("P(a)@(8,10]"), std::nullopt, interval(8, 10, false, true));
  pmat m2 = make_pmat(store_from("Q(a)@(7,8]\nQ(a)@(9,10]"), std::nullopt, interval(7, 10, false, true));
  auto [e1, e2] = ext(m1, m2, side::right);
  REQUIRE(e1.right);
  REQUIRE(e2.right);
  CHECK(e1.right->length() == rational(6));  // lcm(2,3)
  CHECK(e1.right->length() == e2.right->length());
  // unfoldings unchanged
  for (int w = 0; w < 3; ++w) {
    interval win = interval::closed(5 + 13 * w, 30 + 13 * w);
    CHECK(unfold_window(e1, win) == unfold_window(m1, win));
    CHECK(unfold_window(e2, win) == unfold_window(m2, win));
  }
}

TEST_CASE("ext on equal periods is the identity") {
  pmat m1 = make_pmat(store_from("P(a)@(8,10]"), std::nullopt, interval(8, 10, false, true));
  auto [e1, e2] = ext(m1, m1, side::right);
  CHECK(e1 == m1);
  CHECK(e2 == m1);
}

TEST_CASE("rational period lengths extend to the rational lcm") {
  pmat m1 = make_pmat(store_from("P(a)@(0,1/2]"), std::nullopt, interval(0, rational(1, 2), false, true));
  pmat m2 = make_pmat(store_from("Q(a)@(0,1/3]"), std::nullopt, interval(0, rational(1, 3), false, true));
  auto [e1, e2] = ext(m1, m2, side::right);
  CHECK(e1.right->length() == rational(1));
  CHECK(e2.right->length() == rational(1));
  interval win = interval::closed(0, 8);
  CHECK(unfold_window(e1, win) == unfold_window(m1, win));
  CHECK(unfold_window(e2, win) == unfold_window(m2, win));
}

TEST_CASE("aln re-seats equal-length periods at a common placement") {
  pmat m1 = make_pmat(store_from("P(a)@[30,31]"), std::nullopt, interval(24, 34, false, true));
  pmat m2 = make_pmat(store_from("P(a)@[20,21]"), std::nullopt, interval(14, 24, false, true));
  auto [a1, a2, common] = aln(m1, m2, side::right);
  CHECK(common == interval(24, 34, false, true));
  CHECK(*a2.right == common);
  interval win = interval::closed(10, 80);
  CHECK(unfold_window(a1, win) == unfold_window(m1, win));
  CHECK(unfold_window(a2, win) == unfold_window(m2, win));
}

TEST_CASE("aln introduces an empty period for a bounded input") {
  pmat m1 = make_pmat(store_from("P(a)@(4,6]"), std::nullopt, interval(4, 6, false, true));
  pmat m2 = bounded_pmat(store_from("P(a)@[0,20]"));
  auto [a1, a2, common] = aln(m1, m2, side::right);
  CHECK(!a2.right);
  CHECK(common.lo() >= rational(20));  // slid past the bounded content
  interval win = interval::closed(0, 60);
  CHECK(unfold_window(a1, win) == unfold_window(m1, win));
  CHECK(a2.core == m2.core);

  pmat b1 = bounded_pmat(fact_store{});
  CHECK_THROWS_AS(aln(b1, b1, side::right), std::logic_error);
  CHECK_THROWS_AS(aln(m1, make_pmat(store_from("P(a)@(4,7]"), std::nullopt, interval(4, 7, false, true)),
                      side::right),
                  std::logic_error);
}

TEST_CASE("periodic minus on the propagation chain") {
  // n = 2: two parallel chains; subtracting the a1 chain leaves only a2
  fact_store core = chain_store(3);
  for (int k = 0; k <= 3; ++k) core.insert(fact{"R", {"a2"}, interval::closed(10 * k, 10 * k + 1)});
  pmat both = make_pmat(core, std::nullopt, interval(24, 34, false, true));
  pmat only_a1 = make_pmat(chain_store(3), std::nullopt, interval(24, 34, false, true));

  pmat rest = periodic_minus(both, only_a1);
  fact_store got = unfold_window(rest, interval::closed(-50, 50));
  for (const auto& [atom, times] : got.atoms()) CHECK(atom.constants == std::vector<std::string>{"a2"});
  CHECK(got.atom_count() == 1);

  // m2 empty keeps m1; m1 = m2 empties the unfolding
  CHECK(periodic_minus(both, bounded_pmat(fact_store{})) == both);
  CHECK(equivalent(periodic_minus(both, both), bounded_pmat(fact_store{})));
}

TEST_CASE("periodic union of bounded stores is plain union") {
  pmat a = bounded_pmat(store_from("P(a)@[0,1]"));
  pmat b = bounded_pmat(store_from("Q(a)@[2,3]"));
  pmat u = periodic_union(a, b);
  CHECK(!u.left);
  CHECK(!u.right);
  CHECK(u.core == store_from("P(a)@[0,1]\nQ(a)@[2,3]"));
  CHECK(equivalent(periodic_union(a, a), a));
}

TEST_CASE("theorem-style window equalities on random triples") {
  pmat_gen g;
  int checked = 0;
  for (int round = 0; round < 120; ++round) {
    pmat m1 = g.next(), m2 = g.next();
    pmat u = periodic_union(m1, m2);
    pmat d = periodic_minus(m1, m2);
    for (int w = 0; w < 6; ++w) {
      interval win = g.rand_window();
      fact_store u1 = unfold_window(m1, win), u2 = unfold_window(m2, win);
      REQUIRE(unfold_window(u, win) == store_union(u1, u2));
      REQUIRE(unfold_window(d, win) == store_difference(u1, u2));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("ext and aln preserve unfoldings on random triples") {
  pmat_gen g;
  for (int round = 0; round < 80; ++round) {
    pmat m1 = g.next(), m2 = g.next();
    for (side s : {side::left, side::right}) {
      bool h1 = (s == side::left ? m1.left : m1.right).has_value();
      bool h2 = (s == side::left ? m2.left : m2.right).has_value();
      if (!h1 || !h2) continue;
      auto [e1, e2] = ext(m1, m2, s);
      auto [a1, a2, common] = aln(e1, e2, s);
      for (int w = 0; w < 5; ++w) {
        interval win = g.rand_window();
        REQUIRE(unfold_window(e1, win) == unfold_window(m1, win));
        REQUIRE(unfold_window(a1, win) == unfold_window(m1, win));
        REQUIRE(unfold_window(a2, win) == unfold_window(m2, win));
      }
    }
  }
}

TEST_CASE("saturation detection reproduces the known period pair") {
  program p = example_program();
  fact_store e = store_from("R(a1)@[0,1]");
  // rounds k = 1..3: the frontier is still moving
  for (int k = 1; k <= 3; ++k) {
    CHECK(!detect_saturation(p, e, chain_store(k), chain_store(k - 1)));
  }
  auto found = detect_saturation(p, e, chain_store(4), chain_store(3));
  REQUIRE(found);
  CHECK(found->first == interval(-24, -23, true, false));
  CHECK(found->second == interval(24, 34, false, true));
  CHECK(found->second.length() == rational(10));
}

TEST_CASE("saturation detection accepts empty-content flank periods at a fixpoint") {
  program p = parse_program("B(?x) :- A(?x)");
  fact_store e = store_from("A(c)@[0,2]");
  fact_store fixpoint = store_from("A(c)@[0,2]\nB(c)@[0,2]");
  auto found = detect_saturation(p, e, fixpoint, fixpoint);
  REQUIRE(found);
  // both flanks are empty, so the periods carry no content
  pmat m = make_pmat(fixpoint, found->first, found->second);
  CHECK(!m.left);
  CHECK(!m.right);
}

TEST_CASE("pds finds deletion periods from O(1) flank content") {
  program p = example_program();
  // dataset with two chains; deleting a1 grows a d-store of a1 facts only
  fact_store e = store_from("R(a1)@[0,1]\nR(a2)@[0,1]");
  std::optional<interval> ref_l = interval(-24, -23, true, false);
  std::optional<interval> ref_r = interval(24, 34, false, true);

  fact_store d0;
  CHECK(!pds(p, e, ref_l, ref_r, d0, store_from("R(a1)@[0,1]")));  // overlaps the data span

  // after enough rounds, d covers waves 0..5 and the pending delta is wave 6
  fact_store d = chain_store(5);
  fact_store delta = store_from("R(a1)@[60,61]");
  auto found = pds(p, e, ref_l, ref_r, d, delta);
  REQUIRE(found);
  CHECK(found->first.length() > rational(0));
  CHECK(is_integral(rational(found->second.length() / rational(10))));  // multiple of the reference
  // the pair reproduces both the flank and the pending wave
  pmat dd = make_pmat(d, found->first, found->second);
  CHECK(unfold_window(dd, interval::closed(0, 101)) == chain_store(10));
}

TEST_CASE("pds with empty flanks and delta succeeds immediately") {
  program p = example_program();
  fact_store e = store_from("R(a1)@[0,1]");
  auto found = pds(p, e, std::nullopt, std::nullopt, fact_store{}, fact_store{});
  REQUIRE(found);
  pmat dd = make_pmat(fact_store{}, found->first, found->second);
  CHECK(dd.core.empty());
}

TEST_CASE("pds never loses stopped flank content to clipping") {
  program p = example_program();
  fact_store e = store_from("R(a1)@[0,1]");
  // d has an isolated stale block far left; a period pair above it must not
  // clip it away, whatever pds returns
  fact_store d = store_from("R(a1)@[-60,-59]");
  auto found = pds(p, e, std::nullopt, std::nullopt, d, fact_store{});
  if (found) {
    pmat dd = make_pmat(d, found->first, found->second);
    CHECK(unfold_window(dd, interval::closed(-61, 2)) == d);
  }
}

TEST_CASE("pmat serialization round trips") {
  fact_store core = chain_store(3);
  pmat m = make_pmat(core, std::nullopt, interval(24, 34, false, true));
  std::string text = render(m);
  CHECK(text.substr(0, 16) == "#RPERIOD (24,34]");
  pmat back = parse_pmat(text);
  CHECK(back == m);

  pmat plain = bounded_pmat(store_from("P(a)@[0,1]"));
  CHECK(parse_pmat(render(plain)) == plain);
  CHECK_THROWS_AS(parse_pmat("#RPERIOD [24,34)\n"), std::invalid_argument);
}
