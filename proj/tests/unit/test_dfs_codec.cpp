// Copyright 2026 The graphtune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "../support.hpp"
#include "graphtune/dataset.hpp"
#include "graphtune/dfs_code.hpp"
#include "graphtune/error.hpp"

using namespace graphtune;
using namespace graphtune::testing;

namespace {

DfsCode code_of(std::initializer_list<std::pair<int, int>> pairs) {
  DfsCode c;
  for (auto [u, v] : pairs) c.push_back({u, v});
  return c;
}

InvalidCodeError::Kind kind_of(const DfsCode& c) {
  try {
    validate(c);
  } catch (const InvalidCodeError& e) {
    return e.kind();
  }
  FAIL("code unexpectedly valid");
  return InvalidCodeError::Kind::kEmpty;
}

std::size_t position_of(const DfsCode& c) {
  try {
    validate(c);
  } catch (const InvalidCodeError& e) {
    return e.position();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("encode follows the start and visit policy") {
  CHECK(encode(complete_graph(3)) == code_of({{0, 1}, {1, 2}, {2, 0}}));
  CHECK(encode(path_graph(3)) == code_of({{0, 1}, {0, 2}}));
  CHECK(encode(path_graph(2)) == code_of({{0, 1}}));

  SUBCASE("backward edges come before forward edges, by ascending target") {
    // K4: start 0, then 1, 2 (closes 0), 3 (closes 0 and 1).
    CHECK(encode(complete_graph(4)) ==
          code_of({{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 0}, {3, 1}}));
  }
  SUBCASE("start node is the highest degree") {
    // Star with hub at node 3.
    const std::vector<Edge> edges{{0, 3}, {1, 3}, {2, 3}};
    const DfsCode c = encode(Graph::from_edges(4, edges));
    CHECK(c == code_of({{0, 1}, {0, 2}, {0, 3}}));
  }
  CHECK_THROWS_AS(encode(Graph(3)), NotEncodableError);
  const std::vector<Edge> split{{0, 1}, {2, 3}};
  CHECK_THROWS_AS(encode(Graph::from_edges(4, split)), NotEncodableError);
}

TEST_CASE("decode") {
  CHECK(decode(code_of({{0, 1}, {1, 2}, {2, 0}})) == complete_graph(3));
  CHECK(decode(code_of({{0, 1}})) == path_graph(2));
  const DfsCode bad = code_of({{0, 1}, {2, 3}});
  CHECK_THROWS_AS(decode(bad), InvalidCodeError);
  CHECK(position_of(bad) == 1);
}

TEST_CASE("validation taxonomy") {
  using K = InvalidCodeError::Kind;
  CHECK(kind_of({}) == K::kEmpty);
  CHECK(kind_of(code_of({{1, 0}})) == K::kBadStart);
  CHECK(kind_of(code_of({{0, 1}, {1, 1}})) == K::kSelfLoop);
  CHECK(kind_of(code_of({{0, 1}, {1, 3}})) == K::kTimestampGap);
  CHECK(kind_of(code_of({{0, 1}, {0, 1}})) == K::kDuplicateEdge);
  CHECK(kind_of(code_of({{0, 1}, {1, 2}, {2, 1}})) == K::kDuplicateEdge);
  // Backward edge from a timestamp that does not exist yet.
  CHECK(kind_of(code_of({{0, 1}, {1, 2}, {3, 0}})) == K::kDanglingBackward);
  // Backward edge from an already-left position.
  CHECK(kind_of(code_of({{0, 1}, {1, 2}, {1, 3}, {2, 0}})) == K::kNotAtFrontier);
  DfsCode labeled = code_of({{0, 1}});
  labeled[0].edge_label = 4;
  CHECK(kind_of(labeled) == K::kBadLabel);
}

TEST_CASE("debug text round trip") {
  const DfsCode c = encode(complete_graph(4));
  const std::string text = to_text(c);
  CHECK(text.substr(0, 10) == "0 1 0 0 0\n");
  CHECK(parse_code_text(text) == c);
}

TEST_CASE("token form") {
  const DfsCode edge = code_of({{0, 1}});
  const TokenSequence t = to_tokens(edge, 3);
  REQUIRE(t.size() == 2);
  CHECK(t.steps[0] == TokenStep{0, 1, 0, 0, 0});
  CHECK(is_end_step(t.steps[1], 3));
  CHECK(token_vocab_sizes(3) == VocabSizes{4, 4, 2, 2, 2});

  const DfsCode tri = encode(complete_graph(3));
  CHECK(to_tokens(tri, 3).size() == 4);
  CHECK_THROWS_AS(to_tokens(tri, 2), CapacityError);

  SUBCASE("from_tokens rejects bad sequences") {
    TokenSequence eos_first{3, {end_step(3)}};
    try {
      from_tokens(eos_first);
      FAIL("expected invalid code");
    } catch (const InvalidCodeError& e) {
      CHECK(e.kind() == InvalidCodeError::Kind::kEmpty);
    }
    TokenSequence dup{3, {{0, 1, 0, 0, 0}, {0, 1, 0, 0, 0}, end_step(3)}};
    CHECK_THROWS_AS(from_tokens(dup), InvalidCodeError);
    TokenSequence wild{3, {{0, 1, 0, 0, 0}, {1, 5, 0, 0, 0}, end_step(3)}};
    try {
      from_tokens(wild);
      FAIL("expected invalid code");
    } catch (const InvalidCodeError& e) {
      CHECK(e.kind() == InvalidCodeError::Kind::kBadToken);
      CHECK(e.position() == 1);
    }
  }
  SUBCASE("an end symbol in any slot ends the sequence") {
    CHECK(is_end_step({0, 3, 0, 0, 0}, 3));
    CHECK(is_end_step({0, 1, 0, 1, 0}, 3));
    CHECK_FALSE(is_end_step({2, 0, 0, 0, 0}, 3));
    TokenSequence partial{3, {{0, 1, 0, 0, 0}, {1, 3, 0, 0, 0}, {1, 2, 0, 0, 0}}};
    CHECK(from_tokens(partial) == edge);
    TokenSequence label_first{3, {{0, 1, 1, 0, 0}}};
    CHECK_THROWS_AS(from_tokens(label_first), InvalidCodeError);
  }
  SUBCASE("steps after the first end step are ignored") {
    TokenSequence tail{3, {{0, 1, 0, 0, 0}, end_step(3), {0, 1, 0, 0, 0}}};
    CHECK(from_tokens(tail) == edge);
  }
}

TEST_CASE("round trip against brute-force isomorphism, n = 3..8") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = std::uniform_int_distribution<int>(3, 8)(rng);
    const double p = std::uniform_real_distribution<double>(0.0, 0.7)(rng);
    const Graph g = random_connected_graph(n, p, rng());
    const DfsCode c = encode(g);
    CAPTURE(to_edge_list_text(g));
    CHECK(c.size() == g.edge_count());
    CHECK(isomorphic_bruteforce(decode(c), g));
    CHECK(from_tokens(to_tokens(c, n)) == c);
    CHECK(encode(g) == c);
  }
}

TEST_CASE("round trip by fingerprint, n = 9..30") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = std::uniform_int_distribution<int>(9, 30)(rng);
    const double p = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    const Graph g = random_connected_graph(n, p, rng());
    const DfsCode c = encode(g);
    CHECK(c.size() == g.edge_count());
    CHECK(fingerprint(decode(c)) == fingerprint(g));
    CHECK(from_tokens(to_tokens(c, n + 1)) == c);
  }
}
