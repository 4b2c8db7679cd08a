#include <doctest.h>

#include <cmath>

#include "treemem/errors.hpp"
#include "treemem/tree.hpp"

using namespace treemem;

TEST_CASE("parent follows digit truncation") {
  CHECK(parent(NodeId{2, 3}, 2) == NodeId{1, 1});
  CHECK(parent(NodeId{1, 2}, 3) == NodeId{0, 0});
  CHECK_THROWS_AS(parent(NodeId{0, 0}, 2), Error);
}

TEST_CASE("children enumerate successors in digit order") {
  TruncatedTree t2(2, 3);
  auto c = children(NodeId{1, 1}, t2);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == NodeId{2, 2});
  CHECK(c[1] == NodeId{2, 3});

  TruncatedTree t3(3, 2);
  auto r = children(NodeId{0, 0}, t3);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == NodeId{1, 0});
  CHECK(r[1] == NodeId{1, 1});
  CHECK(r[2] == NodeId{1, 2});

  CHECK_THROWS_AS(children(NodeId{3, 0}, t2), Error);
}

TEST_CASE("children invert parent") {
  TruncatedTree t(3, 4);
  for (int k = 0; k < t.depth; ++k)
    for (std::int64_t i = 0; i < t.level_size(k); ++i)
      for (const NodeId& c : children(NodeId{k, i}, t)) CHECK(parent(c, t.m) == NodeId{k, i});
}

TEST_CASE("psi encodes the digit expansion") {
  CHECK(psi(NodeId{2, 3}, 2) == 0.75);
  CHECK(psi(NodeId{1, 2}, 3) == 2.0 / 3.0);
  CHECK(psi(NodeId{0, 0}, 2) == 0.0);
}

TEST_CASE("interval has width m^-level and root covers [0,1]") {
  Interval iv = interval(NodeId{2, 3}, 2);
  CHECK(iv.lo == 0.75);
  CHECK(iv.hi == 1.0);
  Interval root = interval(NodeId{0, 0}, 5);
  CHECK(root.lo == 0.0);
  CHECK(root.hi == 1.0);
}

TEST_CASE("child intervals partition the parent interval") {
  for (int m : {2, 3}) {
    TruncatedTree t(m, 5);
    for (int k = 0; k < t.depth; ++k)
      for (std::int64_t i = 0; i < t.level_size(k); ++i) {
        Interval pa = interval(NodeId{k, i}, m);
        auto cs = children(NodeId{k, i}, t);
        CHECK(interval(cs.front(), m).lo == pa.lo);
        CHECK(interval(cs.back(), m).hi == doctest::Approx(pa.hi).epsilon(1e-15));
        for (std::size_t c = 1; c < cs.size(); ++c)
          CHECK(interval(cs[c - 1], m).hi == doctest::Approx(interval(cs[c], m).lo).epsilon(1e-15));
      }
  }
}

TEST_CASE("psi ordering against the parent") {
  for (int m : {2, 3}) {
    TruncatedTree t(m, 6);
    for (int k = 1; k <= t.depth; ++k)
      for (std::int64_t i = 0; i < t.level_size(k); ++i) {
        NodeId n{k, i};
        double pp = psi(parent(n, m), m);
        CHECK(pp <= psi(n, m));
        CHECK(psi(n, m) < pp + std::pow(static_cast<double>(m), -(k - 1)) + 1e-15);
      }
  }
}

TEST_CASE("level-k intervals cover [0,1] with disjoint interiors") {
  for (int m : {2, 3}) {
    for (int k : {1, 3, 5}) {
      double expect_lo = 0.0;
      for (std::int64_t i = 0; i < ipow(m, k); ++i) {
        Interval iv = interval(NodeId{k, i}, m);
        CHECK(iv.lo == doctest::Approx(expect_lo).epsilon(1e-15));
        expect_lo = iv.hi;
      }
      CHECK(expect_lo == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("digit decomposition round trip") {
  for (int m : {2, 3, 5}) {
    for (int k = 1; k <= 12; ++k) {
      std::int64_t n = ipow(m, k);
      std::int64_t stride = n <= (1 << 16) ? 1 : n / (1 << 16);
      for (std::int64_t i = 0; i < n; i += stride) {
        // index -> digits (most significant first) -> index
        std::int64_t rebuilt = 0;
        for (int d = k - 1; d >= 0; --d) {
          std::int64_t digit = (i / ipow(m, d)) % m;
          rebuilt = rebuilt * m + digit;
        }
        CHECK(rebuilt == i);
      }
    }
  }
}

TEST_CASE("node counts and construction guards") {
  TruncatedTree t(2, 4);
  CHECK(t.node_count() == 31);
  CHECK(TruncatedTree(3, 4).node_count() == 121);
  CHECK_THROWS_AS(TruncatedTree(1, 4), Error);
  CHECK_THROWS_AS(TruncatedTree(2, 0), Error);
  CHECK_THROWS_AS(TruncatedTree(2, 40), Error);  // exceeds the per-level cap
  CHECK_THROWS_AS(check_node(NodeId{2, 4}, 2), Error);
  CHECK_NOTHROW(check_node(NodeId{2, 3}, 2));
}
