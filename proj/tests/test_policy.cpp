#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "seqedit/corpus.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/rollin.hpp"
#include "seqedit/window_scorer.hpp"

using namespace seqedit;

namespace {

Vocabulary small_vocab(int content = 8, int levels = 3) {
  Vocabulary v(levels);
  for (int i = 0; i < content; ++i) v.add("t" + std::to_string(i));
  return v;
}

TokenSeq random_content(Rng& rng, const Vocabulary& v, std::size_t max_len,
                        std::size_t min_len = 0) {
  TokenSeq out(min_len + rand_index(rng, max_len - min_len + 1));
  for (auto& t : out)
    t = v.first_content() +
        static_cast<TokenId>(rand_index(rng, static_cast<std::size_t>(v.num_content())));
  return out;
}

// Oracle roll-in with noise so that all three heads carry labels.
RollInSample random_rollin(Rng& rng, const Vocabulary& v) {
  TrainingSample s;
  s.uid = "t";
  s.source = random_content(rng, v, 7, 2);
  s.references.push_back(random_content(rng, v, 7, 1));
  s.tgt_level = static_cast<int>(rand_index(rng, 3));
  RollInConfig cfg;
  cfg.noise.drop_prob = 0.4;
  cfg.noise.shuffle_k = 2;
  return rollin_editing(s, cfg, rng);
}

// Zero-parameter model: every head is exactly uniform.
WindowScorer zeroed_model(const Vocabulary& v) {
  WindowScorer m(v, {});
  m.params().for_each([](const char*, detail::Matrix& mat) { mat.zero(); });
  return m;
}

}  // namespace

TEST_CASE("forward shapes follow the state") {
  const Vocabulary v = small_vocab();
  const WindowScorer m(v, {.init_seed = 3});
  Rng rng = make_rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    TokenSeq ids = random_content(rng, v, 10);
    // sprinkle placeholders
    TokenSeq with_plh = ids;
    std::size_t plh = 0;
    for (auto& t : with_plh)
      if (rand_unit(rng) < 0.3) t = kPlhId, ++plh;
    const HeadScores s = m.forward({with_plh, Phase::post_placeholder});
    REQUIRE(s.slot.size() == with_plh.size());
    for (const auto& row : s.slot) CHECK(row.size() == with_plh.size() + 1);
    REQUIRE(s.gap.size() == with_plh.size() + 1);
    for (const auto& row : s.gap) CHECK(row.size() == static_cast<std::size_t>(m.max_placeholders() + 1));
    CHECK(s.token.size() == plh);
    for (const auto& row : s.token) CHECK(row.size() == static_cast<std::size_t>(v.size()));
  }
}

TEST_CASE("empty state scores one gap row and nothing else") {
  const WindowScorer m(small_vocab(), {.init_seed = 4});
  const HeadScores s = m.forward({{}, Phase::pre_reposition});
  CHECK(s.slot.empty());
  CHECK(s.gap.size() == 1);
  CHECK(s.token.empty());
}

TEST_CASE("forward is deterministic") {
  const Vocabulary v = small_vocab();
  const WindowScorer a(v, {.init_seed = 9});
  const WindowScorer b(v, {.init_seed = 9});
  Rng rng = make_rng(42);
  const TokenSeq ids = random_content(rng, v, 8, 1);
  const HeadScores sa = a.forward({ids, Phase::pre_reposition}, 1);
  const HeadScores sb = b.forward({ids, Phase::pre_reposition}, 1);
  CHECK(sa.slot == sb.slot);
  CHECK(sa.gap == sb.gap);
  CHECK(sa.token == sb.token);
}

TEST_CASE("over-length states raise a capacity error") {
  const Vocabulary v = small_vocab();
  const WindowScorer m(v, {});
  TokenSeq too_long(64, v.first_content());
  CHECK_THROWS_AS(m.forward({too_long, Phase::pre_reposition}), capacity_error);
  CHECK_THROWS_AS(m.forward({{v.first_content()}, Phase::pre_reposition}, 99), config_error);
}

TEST_CASE("uniform scorer yields exact ln(C) cross-entropies") {
  const Vocabulary v = small_vocab();
  const WindowScorer m = zeroed_model(v);
  Rng rng = make_rng(43);
  RollInBatch batch{random_rollin(rng, v)};
  while (batch[0].ins_labels.tokens.empty() || batch[0].rps_state.ids.empty())
    batch[0] = random_rollin(rng, v);
  const LossReport rep = m.loss(batch);
  const double L = static_cast<double>(batch[0].rps_state.ids.size());
  CHECK(rep.rps_ce == Catch::Approx(std::log(L + 1.0)).epsilon(1e-12));
  CHECK(rep.plh_ce == Catch::Approx(std::log(9.0)).epsilon(1e-12));  // k_max 8
  CHECK(rep.ins_ce == Catch::Approx(std::log(static_cast<double>(v.size()))).epsilon(1e-12));
  CHECK(rep.total == Catch::Approx(rep.rps_ce + rep.plh_ce + rep.ins_ce));
}

TEST_CASE("loss positions and arity validation") {
  const Vocabulary v = small_vocab();
  const WindowScorer m(v, {.init_seed = 13});
  Rng rng = make_rng(44);
  RollInBatch batch{random_rollin(rng, v), random_rollin(rng, v)};
  while (batch[0].rps_state.ids.empty()) batch[0] = random_rollin(rng, v);
  const LossReport rep = m.loss(batch);
  CHECK(rep.total >= 0.0);
  CHECK(rep.rps_positions ==
        static_cast<std::int64_t>(batch[0].rps_state.ids.size() + batch[1].rps_state.ids.size()));

  RollInBatch bad = batch;
  bad[0].rps_labels.slots.push_back(1);
  CHECK_THROWS_AS(m.loss(bad), malformed_batch_error);

  bad = batch;
  bad[0].ins_labels.placeholder_counts[0] += 1;  // token payload now short
  CHECK_THROWS_AS(m.loss(bad), malformed_batch_error);

  bad = batch;
  bad[0].rps_labels.slots[0] = static_cast<std::int32_t>(bad[0].rps_state.ids.size()) + 2;
  CHECK_THROWS_AS(m.loss(bad), malformed_batch_error);
}

TEST_CASE("analytic gradients match central finite differences") {
  const Vocabulary v = small_vocab();
  Rng rng = make_rng(45);
  const double step = 1e-5;
  int checked_coords = 0;
  for (int instance = 0; instance < 22; ++instance) {
    WindowScorer m(v, {.init_seed = 100 + static_cast<std::uint64_t>(instance)});
    RollInBatch batch;
    for (int b = 0; b < 2; ++b) batch.push_back(random_rollin(rng, v));
    // make sure every head carries labels in this instance
    bool has_tokens = false, has_slots = false;
    for (const auto& s : batch) {
      has_tokens |= !s.ins_labels.tokens.empty();
      has_slots |= !s.rps_labels.slots.empty();
    }
    if (!has_tokens || !has_slots) {
      --instance;
      continue;
    }

    ParamSet grads = make_gradients(m);
    m.loss(batch, &grads);

    std::vector<detail::Matrix*> pmats, gmats;
    m.params().for_each([&](const char*, detail::Matrix& mat) { pmats.push_back(&mat); });
    grads.for_each([&](const char*, detail::Matrix& mat) { gmats.push_back(&mat); });
    for (std::size_t mi = 0; mi < pmats.size(); ++mi) {
      if (pmats[mi]->a.empty()) continue;
      for (int probe = 0; probe < 6; ++probe) {
        const std::size_t ci = rand_index(rng, pmats[mi]->a.size());
        const double saved = pmats[mi]->a[ci];
        pmats[mi]->a[ci] = saved + step;
        const double up = m.loss(batch).total;
        pmats[mi]->a[ci] = saved - step;
        const double down = m.loss(batch).total;
        pmats[mi]->a[ci] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = gmats[mi]->a[ci];
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
        CHECK(std::abs(fd - an) / denom < 1e-4);
        ++checked_coords;
      }
    }
  }
  CHECK(checked_coords >= 20 * 16 * 6 - 6 * 16);  // a few matrices may be empty
}

TEST_CASE("sgd step semantics") {
  const Vocabulary v = small_vocab();
  Rng rng = make_rng(46);
  RollInBatch batch{random_rollin(rng, v)};

  SECTION("zero gradient leaves parameters unchanged") {
    WindowScorer m(v, {.init_seed = 7});
    const WindowScorer before = m;
    ParamSet zeros = make_gradients(m);
    m.sgd_step(zeros, 0.5);
    bool same = true;
    std::vector<const detail::Matrix*> a, b;
    m.params().for_each([&](const char*, const detail::Matrix& mat) { a.push_back(&mat); });
    before.params().for_each([&](const char*, const detail::Matrix& mat) { b.push_back(&mat); });
    for (std::size_t i = 0; i < a.size(); ++i) same = same && (a[i]->a == b[i]->a);
    CHECK(same);
  }

  SECTION("non-finite gradients reject the step") {
    WindowScorer m(v, {.init_seed = 7});
    ParamSet g = make_gradients(m);
    m.loss({random_rollin(rng, v)}, &g);
    g.w_rps.a[0] = std::numeric_limits<double>::quiet_NaN();
    const double before = m.params().w_rps.a[0];
    CHECK_THROWS_AS(m.sgd_step(g, 0.1), numeric_error);
    CHECK(m.params().w_rps.a[0] == before);
    CHECK_THROWS_AS(m.sgd_step(g, -0.1), config_error);
  }

  SECTION("small steps on a fixed batch decrease the loss monotonically") {
    WindowScorer m(v, {.init_seed = 8});
    double prev = m.loss(batch).total;
    for (int it = 0; it < 30; ++it) {
      ParamSet g = make_gradients(m);
      m.loss(batch, &g);
      m.sgd_step(g, 0.01);
      const double cur = m.loss(batch).total;
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }

  SECTION("identical seeds give identical trajectories") {
    WindowScorer m1(v, {.init_seed = 9});
    WindowScorer m2(v, {.init_seed = 9});
    Rng r1 = make_rng(99), r2 = make_rng(99);
    for (int it = 0; it < 5; ++it) {
      RollInBatch b1{random_rollin(r1, v)}, b2{random_rollin(r2, v)};
      ParamSet g1 = make_gradients(m1), g2 = make_gradients(m2);
      m1.loss(b1, &g1);
      m2.loss(b2, &g2);
      m1.sgd_step(g1, 0.1);
      m2.sgd_step(g2, 0.1);
    }
    CHECK(m1.params().tok_emb.a == m2.params().tok_emb.a);
    CHECK(m1.params().w_ins_out.a == m2.params().w_ins_out.a);
  }
}

TEST_CASE("memorizing one batch drives the loss toward zero") {
  const Vocabulary v = small_vocab();
  Rng rng = make_rng(47);
  RollInBatch batch{random_rollin(rng, v)};
  WindowScorer m(v, {.init_seed = 10});
  for (int it = 0; it < 400; ++it) {
    ParamSet g = make_gradients(m);
    m.loss(batch, &g);
    m.sgd_step(g, 0.5);
  }
  CHECK(m.loss(batch).total < 0.05);
}

namespace {

// Scripted double emitting constant scores.
class FlatModel final : public PolicyModel {
public:
  explicit FlatModel(TokenId vocab_size) : vocab_size_(vocab_size) {}
  HeadScores forward(const EditState& state, std::optional<int>) const override {
    HeadScores s;
    s.slot.assign(state.ids.size(), std::vector<double>(state.ids.size() + 1, 0.0));
    s.gap.assign(state.ids.size() + 1, std::vector<double>(9, 0.0));
    for (TokenId t : state.ids)
      if (t == kPlhId) s.token.emplace_back(static_cast<std::size_t>(vocab_size_), 0.0);
    return s;
  }
  std::int32_t max_placeholders() const override { return 8; }
  bool can_generate(TokenId id) const override { return id >= 4; }

private:
  TokenId vocab_size_;
};

// Scripted double whose scores saturate on the oracle action toward a
// fixed target.
class OracleScoreModel final : public PolicyModel {
public:
  explicit OracleScoreModel(TokenSeq target, TokenId vocab_size)
      : target_(std::move(target)), vocab_size_(vocab_size) {}

  HeadScores forward(const EditState& state, std::optional<int>) const override {
    HeadScores s;
    s.slot.assign(state.ids.size(), std::vector<double>(state.ids.size() + 1, 0.0));
    s.gap.assign(state.ids.size() + 1, std::vector<double>(9, 0.0));
    if (state.phase == Phase::pre_reposition) {
      const RepositionAction r = expert_reposition(state.ids, target_);
      for (std::size_t k = 0; k < r.slots.size(); ++k)
        s.slot[k][static_cast<std::size_t>(r.slots[k])] = 10.0;
    } else if (state.phase == Phase::post_reposition) {
      const InsertionAction ins = expert_insertion(state.ids, target_);
      for (std::size_t g = 0; g < ins.placeholder_counts.size(); ++g)
        s.gap[g][static_cast<std::size_t>(std::min<std::int32_t>(ins.placeholder_counts[g], 8))] =
            10.0;
    } else {
      TokenSeq z;
      for (TokenId t : state.ids)
        if (t != kPlhId) z.push_back(t);
      const InsertionAction ins = expert_insertion(z, target_);
      std::size_t next = 0;
      for (TokenId t : state.ids) {
        if (t != kPlhId) continue;
        std::vector<double> row(static_cast<std::size_t>(vocab_size_), 0.0);
        row[static_cast<std::size_t>(ins.tokens[next++])] = 10.0;
        s.token.push_back(std::move(row));
      }
    }
    return s;
  }
  std::int32_t max_placeholders() const override { return 8; }
  bool can_generate(TokenId id) const override { return id >= 4; }

private:
  TokenSeq target_;
  TokenId vocab_size_;
};

}  // namespace

TEST_CASE("greedy decode breaks ties toward the lowest index") {
  const FlatModel flat(12);
  const TokenSeq state{5, 6, 7};
  const EditAction a = flat.greedy_decode(state);
  CHECK(a.reposition.slots == std::vector<std::int32_t>{0, 0, 0});  // full deletion
  CHECK(a.insertion.placeholder_counts == std::vector<std::int32_t>{0});
  CHECK(a.insertion.tokens.empty());
  CHECK(apply_action(state, a).empty());
}

TEST_CASE("greedy decode reproduces the oracle under saturated scores") {
  Rng rng = make_rng(48);
  for (int trial = 0; trial < 100; ++trial) {
    TokenSeq state(rand_index(rng, 8)), target(rand_index(rng, 6));
    for (auto& t : state) t = static_cast<TokenId>(4 + rand_index(rng, 6));
    for (auto& t : target) t = static_cast<TokenId>(4 + rand_index(rng, 6));
    const OracleScoreModel m(target, 12);
    const EditAction a = m.greedy_decode(state);
    CHECK(apply_action(state, a) == target);
  }
}

TEST_CASE("greedy decode always yields applicable actions") {
  const Vocabulary v = small_vocab();
  const WindowScorer m(v, {.init_seed = 21});
  Rng rng = make_rng(49);
  for (int trial = 0; trial < 10000; ++trial) {
    const TokenSeq state = random_content(rng, v, 9);
    const EditAction a = m.greedy_decode(state);
    CHECK_NOTHROW(apply_action(state, a));
    for (std::int32_t c : a.insertion.placeholder_counts) CHECK(c <= m.max_placeholders());
    for (TokenId t : a.insertion.tokens) CHECK(m.can_generate(t));
  }
}

TEST_CASE("greedy decode never grows a state past model capacity") {
  const Vocabulary v = small_vocab();
  const WindowScorer m(v, {.init_seed = 22});
  Rng rng = make_rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const TokenSeq state = random_content(rng, v, 60, 40);  // near the 63-token cap
    const EditAction a = m.greedy_decode(state);
    const TokenSeq out = apply_action(state, a);
    CHECK(out.size() <= static_cast<std::size_t>(m.max_state_length()));
    CHECK_NOTHROW(m.forward({out, Phase::pre_reposition}));
  }
}

TEST_CASE("checkpoints restore bitwise-identical forward outputs") {
  const Vocabulary v = small_vocab();
  WindowScorer m(v, {.init_seed = 31});
  // move off the initialization manifold first
  Rng rng = make_rng(50);
  for (int it = 0; it < 3; ++it) {
    ParamSet g = make_gradients(m);
    m.loss({random_rollin(rng, v)}, &g);
    m.sgd_step(g, 0.3);
  }
  std::stringstream ss;
  m.save(ss);
  const WindowScorer loaded = WindowScorer::load(ss);
  CHECK(loaded.vocab().size() == v.size());
  for (int trial = 0; trial < 20; ++trial) {
    const TokenSeq ids = random_content(rng, v, 8);
    const HeadScores a = m.forward({ids, Phase::pre_reposition}, 2);
    const HeadScores b = loaded.forward({ids, Phase::pre_reposition}, 2);
    CHECK(a.slot == b.slot);
    CHECK(a.gap == b.gap);
    CHECK(a.token == b.token);
  }
  std::stringstream bad("not a checkpoint\n");
  CHECK_THROWS_AS(WindowScorer::load(bad), parse_error);
}
