#include <catch_amalgamated.hpp>

#include "seqedit/levenshtein.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/vocab.hpp"

using namespace seqedit;

namespace {

// Test-only oracle: plain exponential recursion, no DP table.
int recursive_distance(const TokenSeq& a, const TokenSeq& b, std::size_t i = 0,
                       std::size_t j = 0) {
  if (i == a.size()) return static_cast<int>(b.size() - j);
  if (j == b.size()) return static_cast<int>(a.size() - i);
  if (a[i] == b[j]) return recursive_distance(a, b, i + 1, j + 1);
  const int sub = recursive_distance(a, b, i + 1, j + 1);
  const int del = recursive_distance(a, b, i + 1, j);
  const int ins = recursive_distance(a, b, i, j + 1);
  return 1 + std::min({sub, del, ins});
}

// Content-range ids (>= 10) so sequences never collide with reserved
// slots such as the placeholder.
TokenSeq random_seq(Rng& rng, std::size_t max_len, TokenId vocab) {
  TokenSeq out(rand_index(rng, max_len + 1));
  for (auto& t : out)
    t = 10 + static_cast<TokenId>(rand_index(rng, static_cast<std::size_t>(vocab)));
  return out;
}

}  // namespace

TEST_CASE("levenshtein distance fixtures") {
  CHECK(levenshtein_distance({1, 2, 3, 4, 5}, {3, 1, 9}) == 4);
  CHECK(levenshtein_distance({7, 8, 9}, {7, 8, 9}) == 0);
  CHECK(levenshtein_distance({}, {1, 2}) == 2);
  CHECK(levenshtein_distance({1, 2}, {}) == 2);
  CHECK(levenshtein_distance({}, {}) == 0);
}

TEST_CASE("levenshtein matches the recursive oracle on small random pairs") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const TokenSeq a = random_seq(rng, 6, 4);
    const TokenSeq b = random_seq(rng, 6, 4);
    CHECK(levenshtein_distance(a, b) == recursive_distance(a, b));
  }
}

TEST_CASE("levenshtein symmetry and triangle inequality on sampled triples") {
  Rng rng = make_rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const TokenSeq a = random_seq(rng, 10, 6);
    const TokenSeq b = random_seq(rng, 10, 6);
    const TokenSeq c = random_seq(rng, 10, 6);
    const auto ab = levenshtein_distance(a, b);
    CHECK(ab == levenshtein_distance(b, a));
    CHECK((ab == 0) == (a == b));
    CHECK(ab <= levenshtein_distance(a, c) + levenshtein_distance(c, b));
  }
}

TEST_CASE("expert reposition matches the worked example") {
  const TokenSeq y_in{10, 11, 12, 13, 14};  // a b c d e
  const TokenSeq y_star{12, 10, 15};        // c a t
  const RepositionAction r = expert_reposition(y_in, y_star);
  CHECK(r.slots == std::vector<std::int32_t>{3, 1, 0, 0, 0});
  CHECK(apply_reposition(y_in, r) == TokenSeq{12, 10});
}

TEST_CASE("expert reposition identity and disjoint cases") {
  const TokenSeq x{4, 5, 6, 7};
  const RepositionAction id = expert_reposition(x, x);
  CHECK(id.slots == std::vector<std::int32_t>{1, 2, 3, 4});
  CHECK(apply_reposition(x, id) == x);

  const RepositionAction none = expert_reposition({4, 5}, {6, 7});
  CHECK(none.slots == std::vector<std::int32_t>{0, 0});
  CHECK(apply_reposition({4, 5}, none).empty());
}

TEST_CASE("apply_reposition semantics") {
  CHECK(apply_reposition({10, 11, 12, 13, 14}, {{3, 1, 0, 0, 0}}) == TokenSeq{12, 10});
  CHECK(apply_reposition({8, 9}, {{2, 2}}) == TokenSeq{9, 9});  // duplication allowed
  CHECK_THROWS_AS(apply_reposition({8, 9}, {{3}}), malformed_action_error);

  SECTION("output length equals nonzero slot count") {
    Rng rng = make_rng(13);
    for (int trial = 0; trial < 200; ++trial) {
      const TokenSeq x = random_seq(rng, 8, 5);
      RepositionAction r;
      for (std::size_t k = 0; k < x.size(); ++k)
        r.slots.push_back(static_cast<std::int32_t>(rand_index(rng, x.size() + 1)));
      CHECK(apply_reposition(x, r).size() == static_cast<std::size_t>(count_kept_slots(r)));
    }
  }
}

TEST_CASE("expert insertion fixtures") {
  const InsertionAction ins = expert_insertion({12, 10}, {12, 10, 15});
  CHECK(ins.placeholder_counts == std::vector<std::int32_t>{0, 0, 1});
  CHECK(ins.tokens == TokenSeq{15});

  const InsertionAction noop = expert_insertion({5, 6}, {5, 6});
  CHECK(noop.placeholder_counts == std::vector<std::int32_t>{0, 0, 0});
  CHECK(noop.tokens.empty());

  const InsertionAction all = expert_insertion({}, {7, 8});
  CHECK(all.placeholder_counts == std::vector<std::int32_t>{2});
  CHECK(all.tokens == TokenSeq{7, 8});

  CHECK_THROWS_AS(expert_insertion({9}, {7, 8}), oracle_precondition_error);
}

TEST_CASE("apply_insertion fixtures and arity errors") {
  CHECK(apply_insertion({12, 10}, {{0, 0, 1}, {15}}) == TokenSeq{12, 10, 15});
  CHECK(apply_insertion({4, 5}, {{0, 0, 0}, {}}) == TokenSeq{4, 5});
  CHECK(apply_insertion({}, {{3}, {11, 12, 13}}) == TokenSeq{11, 12, 13});
  CHECK_THROWS_AS(apply_insertion({4}, {{1}, {9}}), malformed_action_error);
  CHECK_THROWS_AS(apply_insertion({4}, {{1, 1}, {9}}), malformed_action_error);
  CHECK_THROWS_AS(apply_insertion({4}, {{1, 0}, {kPlhId}}), malformed_action_error);
}

TEST_CASE("oracle action reproduces the worked example and identity") {
  const TokenSeq y_in{10, 11, 12, 13, 14};
  const TokenSeq y_star{12, 10, 15};
  const EditAction a = oracle_action(y_in, y_star);
  CHECK(a.reposition.slots == std::vector<std::int32_t>{3, 1, 0, 0, 0});
  CHECK(a.insertion.placeholder_counts == std::vector<std::int32_t>{0, 0, 1});
  CHECK(a.insertion.tokens == TokenSeq{15});
  CHECK(apply_action(y_in, a) == y_star);

  const TokenSeq x{3, 4, 5};
  const EditAction id = oracle_action(x, x);
  CHECK(count_deleted_slots(id.reposition) == 0);
  CHECK(id.insertion.tokens.empty());
  CHECK(apply_action(x, id) == x);
}

TEST_CASE("oracle round-trip and economy over random pairs") {
  Rng rng = make_rng(14);
  for (int trial = 0; trial < 2000; ++trial) {
    const TokenSeq y_in = random_seq(rng, 12, 20);
    const TokenSeq y_star = random_seq(rng, 12, 20);
    const EditAction a = oracle_action(y_in, y_star);
    CHECK(apply_action(y_in, a) == y_star);
    CHECK(a.insertion.tokens.size() <= y_star.size());
    CHECK(count_deleted_slots(a.reposition) <= static_cast<std::int32_t>(y_in.size()));
    // the oracle never duplicates an input index
    std::vector<bool> seen(y_in.size() + 1, false);
    for (std::int32_t s : a.reposition.slots) {
      if (s == 0) continue;
      CHECK(!seen[static_cast<std::size_t>(s)]);
      seen[static_cast<std::size_t>(s)] = true;
    }
  }
}

TEST_CASE("vocabulary reserved layout") {
  Vocabulary v(3);
  CHECK(v.first_content() == 7);
  CHECK(v.level_tag(0) == 4);
  CHECK(v.level_tag(2) == 6);
  CHECK_THROWS_AS(v.level_tag(3), config_error);
  const TokenId cat = v.add("cat");
  CHECK(v.add("cat") == cat);  // idempotent
  CHECK(v.id("cat") == cat);
  CHECK(v.id("dog") == kUnkId);
  CHECK(v.token(cat) == "cat");
  // reserved spellings in corpus text never map to reserved ids
  CHECK(v.id("<plh>") == kUnkId);
  CHECK(v.add("<plh>") == kUnkId);
  const TokenSeq enc = v.encode({"cat", "dog", "<plh>"});
  CHECK(enc == TokenSeq{cat, kUnkId, kUnkId});
  CHECK(!contains_placeholder(enc));
  CHECK(v.generable(kUnkId));
  CHECK(!v.generable(kPlhId));
  CHECK(!v.generable(v.level_tag(1)));
  CHECK(v.generable(cat));
}
