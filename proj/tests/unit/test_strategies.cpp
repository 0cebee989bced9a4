#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "semalloc/strategies.hpp"

using namespace semalloc;

namespace {

TransmitterState state_of(std::vector<Count> counts) {
  const auto K = static_cast<Count>(counts.size());
  return TransmitterState(EvidenceCounts(K, counts));
}

std::vector<Count> sum_of(const CandidatePool& pool, const std::vector<std::size_t>& idx,
                          std::size_t f) {
  std::vector<Count> s(f, 0);
  for (std::size_t m : idx)
    for (std::size_t j = 0; j < f; ++j) s[j] += pool.messages[m].counts[j];
  return s;
}

}  // namespace

TEST_CASE("transmitter state") {
  TransmitterState s = state_of({0, 3, 0, 2});
  CHECK(s.types() == std::vector<std::size_t>{1, 3});
  CHECK(s.pool().caps == std::vector<Count>{3, 2});
  s.record(Allocation{{2, 1}});
  CHECK(s.remaining().caps == std::vector<Count>{1, 1});
  CHECK(s.remaining_total() == 2);
  CHECK(s.round() == 1);
  CHECK(s.expand(Allocation{{2, 1}}) == std::vector<Count>{0, 2, 0, 1});
  CHECK_THROWS_AS(s.record(Allocation{{2, 0}}), InfeasibleError);
}

TEST_CASE("deviation norms") {
  const std::vector<Count> a{1, 4, 2}, b{2, 2, 2};
  CHECK(deviation_norm(a, b, Norm::kL1) == 3.0);
  CHECK(deviation_norm(a, b, Norm::kL2) == doctest::Approx(std::sqrt(5.0)));
  CHECK(deviation_norm(a, b, Norm::kLinf) == 2.0);
}

TEST_CASE("wf-long plan") {
  const CapacityVector caps{{7, 3, 5, 1}};
  const LongTermPlan one = wf_long_plan(caps, 1, 6);
  CHECK(one.target == water_fill_allocation(caps, 6));
  CHECK(one.schedule.size() == 1);
  CHECK(one.schedule[0] == one.target);

  const LongTermPlan sym = wf_long_plan(CapacityVector{{10, 10}}, 2, 4);
  CHECK(sym.target.counts == std::vector<Count>{4, 4});
  CHECK(sym.schedule[0].counts == std::vector<Count>{2, 2});
  CHECK(sym.schedule[1].counts == std::vector<Count>{2, 2});

  const LongTermPlan full = wf_long_plan(CapacityVector{{4, 2, 3, 3}}, 3, 4);
  CHECK(full.target.counts == std::vector<Count>{4, 2, 3, 3});

  const LongTermPlan p = wf_long_plan(CapacityVector{{9, 1, 4, 6, 2}}, 4, 5);
  std::vector<Count> acc(5, 0);
  for (const Allocation& m : p.schedule) {
    CHECK(m.budget() == 5);
    for (std::size_t j = 0; j < 5; ++j) acc[j] += m.counts[j];
  }
  CHECK(acc == p.target.counts);
  CHECK_THROWS_AS(wf_long_plan(CapacityVector{{1, 1}}, 2, 2), InfeasibleError);
}

TEST_CASE("wf-greedy round") {
  CHECK(wf_greedy_round(state_of({10, 10, 10}), 6).counts == std::vector<Count>{2, 2, 2});
  TransmitterState s = state_of({5, 7});
  s.record(Allocation{{2, 2}});
  CHECK(wf_greedy_round(s, 4).counts == std::vector<Count>{2, 2});
  CHECK(wf_greedy_round(state_of({1, 3}), 4).counts == std::vector<Count>{1, 3});

  TransmitterState sym = state_of({6, 6, 6});
  for (int t = 0; t < 6; ++t) {
    const Allocation m = wf_greedy_round(sym, 3);
    CHECK(m.counts == std::vector<Count>{1, 1, 1});
    sym.record(m);
  }
}

TEST_CASE("scld round") {
  const TransmitterState tx = state_of({9, 9, 9});
  const EvidenceCounts rx(3, std::vector<Count>{5, 0, 1});
  CHECK(scld_round(tx, rx, 2, 1.0).counts == std::vector<Count>{0, 2, 0});

  const TransmitterState four = state_of({3, 2, 5, 1});
  CHECK(scld_round(four, EvidenceCounts(4), 4, 1.0).counts == std::vector<Count>{1, 1, 1, 1});
  CHECK(scld_round(state_of({0, 6, 0}), EvidenceCounts(3), 5, 1.0).counts ==
        std::vector<Count>{5});
}

TEST_CASE("scld picks least-received among available types") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    std::vector<Count> pool(8), got(8);
    for (auto& c : pool) c = std::uniform_int_distribution<Count>(0, 6)(rng);
    pool[0] = 3;
    for (auto& c : got) c = std::uniform_int_distribution<Count>(0, 4)(rng);
    TransmitterState tx = state_of(pool);
    EvidenceCounts rx(8, got);
    const Count B = std::min<Count>(3, tx.remaining_total());
    const Allocation m = scld_round(tx, rx, B, 1.0);
    CHECK(m.feasible(tx.remaining(), B));
    // replay the picks one at a time
    std::vector<Count> picks(tx.types().size(), 0);
    for (Count b = 0; b < B; ++b) {
      Count lowest = -1;
      for (std::size_t k = 0; k < picks.size(); ++k)
        if (picks[k] < tx.pool().caps[k]) {
          const Count c = rx[tx.types()[k]] + picks[k];
          if (lowest < 0 || c < lowest) lowest = c;
        }
      std::size_t k = 0;
      while (!(picks[k] < tx.pool().caps[k] && rx[tx.types()[k]] + picks[k] == lowest)) ++k;
      ++picks[k];
    }
    CHECK(picks == m.counts);
  }
}

TEST_CASE("random free round") {
  Rng forced(3);
  CHECK(random_free_round(state_of({1, 2, 1}), 4, forced).counts == std::vector<Count>{1, 2, 1});

  Rng a(42), b(42);
  const TransmitterState s = state_of({5, 9, 2, 7});
  CHECK(random_free_round(s, 6, a) == random_free_round(s, 6, b));

  Rng rng(2024);
  const TransmitterState even = state_of({100, 100});
  const int draws = 10000;
  double total0 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const Allocation m = random_free_round(even, 2, rng);
    CHECK(m.budget() == 2);
    total0 += static_cast<double>(m.counts[0]);
  }
  // type 0 count in a round is hypergeometric(200, 100, 2): mean 1, var 100/199
  const double sigma = std::sqrt(100.0 / 199.0 / draws);
  CHECK(std::abs(total0 / draws - 1.0) <= 3.0 * sigma);
}

TEST_CASE("evidence chunks and random chunk") {
  const std::vector<std::size_t> draws{2, 0, 2, 3, 0, 0, 2};
  EvidenceCounts e(4);
  for (std::size_t d : draws) e.add(d, 1);
  const TransmitterState s(e);
  const CandidatePool chunks = evidence_chunks(draws, s, 3);
  REQUIRE(chunks.size() == 2);
  CHECK(chunks.messages[0].counts == std::vector<Count>{1, 2, 0});
  CHECK(chunks.messages[1].counts == std::vector<Count>{2, 0, 1});

  std::vector<bool> used(2, false);
  Rng rng(9);
  const std::size_t first = random_chunk_round(chunks, used, rng);
  const std::size_t second = random_chunk_round(chunks, used, rng);
  CHECK(first != second);
  CHECK_THROWS_AS(random_chunk_round(chunks, used, rng), InfeasibleError);
}

TEST_CASE("subset selection") {
  const CapacityVector caps{{6, 6, 6}};
  CandidatePool pool{{Allocation{{2, 0, 0}}, Allocation{{0, 2, 0}}, Allocation{{1, 1, 0}},
                      Allocation{{0, 0, 2}}}};
  const SubsetSelection perfect =
      select_subset_longterm(pool, 2, caps, Allocation{{1, 1, 2}}, Norm::kL2);
  CHECK(perfect.exact);
  CHECK(perfect.deviation == 0.0);
  CHECK(perfect.indices == std::vector<std::size_t>{2, 3});

  const SubsetSelection all = select_subset_longterm(pool, 4, caps, Allocation{{0, 0, 0}});
  CHECK(all.indices == std::vector<std::size_t>{0, 1, 2, 3});

  // exhaustive comparison on a hand pool
  const Allocation target{{3, 1, 1}};
  const SubsetSelection sel = select_subset_longterm(pool, 2, caps, target);
  double best = 1e9;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      best = std::min(best, deviation_norm(sum_of(pool, {i, j}, 3), target.counts, Norm::kL2));
  CHECK(sel.deviation == doctest::Approx(best));
  CHECK(deviation_norm(sum_of(pool, sel.indices, 3), target.counts, Norm::kL2) == sel.deviation);

  const CapacityVector tight{{1, 1, 1}};
  CHECK_THROWS_AS(select_subset_longterm(CandidatePool{{Allocation{{2, 0, 0}}}}, 1, tight,
                                         Allocation{{1, 0, 0}}),
                  InfeasibleError);
}

TEST_CASE("subset selection falls back to greedy on large pools") {
  CandidatePool pool;
  for (int m = 0; m < 60; ++m) pool.messages.push_back(Allocation{{m % 3 == 0, m % 3 == 1, m % 3 == 2}});
  const SubsetSelection sel =
      select_subset_longterm(pool, 9, CapacityVector{{50, 50, 50}}, Allocation{{3, 3, 3}});
  CHECK_FALSE(sel.exact);
  CHECK(sel.indices.size() == 9);
  CHECK(sel.deviation == 0.0);
}

TEST_CASE("greedy per-round selection") {
  const CapacityVector caps{{5, 5}};
  CandidatePool pool{{Allocation{{2, 0}}, Allocation{{1, 1}}, Allocation{{0, 2}}}};
  const std::vector<Count> sent{1, 0};
  CHECK(select_greedy_per_round(pool, {false, false, false}, sent, Allocation{{2, 1}}, caps) == 1);
  CHECK(select_greedy_per_round(pool, {true, true, false}, sent, Allocation{{3, 0}}, caps) == 2);
  // direct enumeration
  const Allocation target{{3, 2}};
  std::size_t want = 0;
  double best = 1e9;
  for (std::size_t m = 0; m < 3; ++m) {
    std::vector<Count> t{sent[0] + pool.messages[m].counts[0], sent[1] + pool.messages[m].counts[1]};
    const double d = deviation_norm(t, target.counts, Norm::kL2);
    if (d < best) {
      best = d;
      want = m;
    }
  }
  CHECK(select_greedy_per_round(pool, {false, false, false}, sent, target, caps) == want);
  CHECK_THROWS_AS(select_greedy_per_round(pool, {true, true, true}, sent, target, caps),
                  InfeasibleError);
}

TEST_CASE("singleton pool reproduces the ideal schedule") {
  const CapacityVector caps{{4, 1, 3, 2}};
  CandidatePool pool;
  for (std::size_t j = 0; j < 4; ++j)
    for (Count c = 0; c < caps.caps[j]; ++c) {
      Allocation m{std::vector<Count>(4, 0)};
      m.counts[j] = 1;
      pool.messages.push_back(m);
    }
  std::vector<bool> used(pool.size(), false);
  std::vector<Count> sent(4, 0);
  for (Count t = 1; t <= caps.total(); ++t) {
    const Allocation target = ideal_cumulative_target(caps, t, 1);
    const std::size_t m = select_greedy_per_round(pool, used, sent, target, caps);
    used[m] = true;
    for (std::size_t j = 0; j < 4; ++j) sent[j] += pool.messages[m].counts[j];
    CHECK(deviation_norm(sent, target.counts, Norm::kL2) == 0.0);
  }
}

TEST_CASE("every strategy emits feasible messages") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 300; ++it) {
    std::vector<Count> counts(10);
    for (auto& c : counts) c = std::uniform_int_distribution<Count>(0, 5)(rng);
    counts[3] += 4;
    TransmitterState s = state_of(counts);
    EvidenceCounts rx(10);
    const Count B = std::uniform_int_distribution<Count>(1, 4)(rng);
    while (s.remaining_total() >= B) {
      const CapacityVector left = s.remaining();
      const Allocation g = wf_greedy_round(s, B);
      const Allocation c = scld_round(s, rx, B, 1.0);
      const Allocation r = random_free_round(s, B, rng);
      CHECK(g.feasible(left, B));
      CHECK(c.feasible(left, B));
      CHECK(r.feasible(left, B));
      rx.add(s.expand(c));
      s.record(c);
    }
  }
}
