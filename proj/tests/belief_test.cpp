// Copyright 2026 The domino101 Authors.
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

#include <gtest/gtest.h>

#include <cmath>

#include "domino101/belief.hpp"
#include "domino101/sim.hpp"
#include "support.hpp"

namespace domino101 {
namespace {

// Belief of `self` after the whole history of `s`, built incrementally.
Belief belief_for(const RoundState& s, Seat self, std::uint64_t seed) {
  return replay_belief(self, dealt_hand(s, self), s.history, seed);
}

TEST(BeliefTest, FreshDealGivesEachHiddenSeatOneThird) {
  const PerSeat<Hand> hands = deal(4);
  const Belief b = init_belief(Seat::A, hands[Seat::A], 1);
  Rng rng(2);
  constexpr int kSamples = 30000;
  std::array<int, kNumTiles> in_b{};
  for (int i = 0; i < kSamples; ++i) {
    const PerSeat<Hand> w = sample_fresh(b, rng);
    for (Tile t : w[Seat::B]) ++in_b[t.index()];
  }
  const double sd = std::sqrt((1.0 / 3) * (2.0 / 3) / kSamples);
  for (Tile t : b.unseen) {
    EXPECT_NEAR(static_cast<double>(in_b[t.index()]) / kSamples, 1.0 / 3, 3.39 * sd) << to_string(t);
  }
  for (Tile t : hands[Seat::A]) EXPECT_EQ(in_b[t.index()], 0);
}

TEST(BeliefTest, InitialSampleIsConsistent) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const PerSeat<Hand> hands = deal(seed);
    for (Seat s : kSeats) EXPECT_TRUE(sample_consistent(init_belief(s, hands[s], seed)));
  }
}

TEST(BeliefTest, PassExcludesBothEnds) {
  const PerSeat<Hand> hands = deal(9);
  Belief b = init_belief(Seat::A, hands[Seat::A], 3);
  observe(b, ObservedPass{Seat::B, {3, 5}});
  EXPECT_EQ(b.hard_excluded[Seat::B], pip_bit(3) | pip_bit(5));
  EXPECT_TRUE(sample_consistent(b));
  EXPECT_TRUE((b.sample[Seat::B] & (TileSet::with_pip(3) | TileSet::with_pip(5))).empty());
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const PerSeat<Hand> w = sample_fresh(b, rng);
    EXPECT_TRUE((w[Seat::B] & (TileSet::with_pip(3) | TileSet::with_pip(5))).empty());
  }
}

TEST(BeliefTest, OwnPassIsNotAConstraint) {
  const PerSeat<Hand> hands = deal(9);
  Belief b = init_belief(Seat::A, hands[Seat::A], 3);
  observe(b, ObservedPass{Seat::A, {3, 5}});
  EXPECT_EQ(b.hard_excluded[Seat::A], 0);
}

TEST(BeliefTest, ImpossibleConstraintsAreUnsatisfiable) {
  const PerSeat<Hand> hands = deal(11);
  Belief b = init_belief(Seat::A, hands[Seat::A], 3);
  b.hard_excluded[Seat::C] = 0x7f;  // C can hold nothing, yet holds 7 tiles
  EXPECT_FALSE(hard_constraints_feasible(b));
  Rng rng(1);
  EXPECT_THROW(sample_fresh(b, rng), Unsatisfiable);
}

TEST(BeliefTest, SoftPenaltyHalvesWithFloor) {
  Belief b = init_belief(Seat::A, deal(1)[Seat::A], 1);
  soften(b, Seat::B, 4);
  EXPECT_DOUBLE_EQ(b.soft_penalty[Seat::B][4], 0.5);
  soften(b, Seat::B, 4);
  EXPECT_DOUBLE_EQ(b.soft_penalty[Seat::B][4], 0.25);
  for (int i = 0; i < 10; ++i) soften(b, Seat::B, 4);
  EXPECT_DOUBLE_EQ(b.soft_penalty[Seat::B][4], 0.0625);
  EXPECT_DOUBLE_EQ(b.weight(Seat::B, Tile(4, 4)), 0.0625);  // a double counts its pip once
  EXPECT_DOUBLE_EQ(b.weight(Seat::B, Tile(4, 2)), 0.0625);
  EXPECT_DOUBLE_EQ(b.weight(Seat::C, Tile(4, 2)), 1.0);
}

TEST(BeliefTest, PartnerEndHintLowersFrequency) {
  // C opened the right end; B... rather: A's partner is C. Seat B plays on
  // the end its partner D opened, so B is hinted to lack the far end.
  const PerSeat<Hand> hands = deal(21);
  const Belief base = init_belief(Seat::A, hands[Seat::A], 7);
  Belief hinted = base;
  // Ends (2,6), left opened by D. B plays on the left.
  const Tile played = [&] {
    for (Tile t : base.unseen) {
      if (t.has(2) && !t.has(6)) return t;
    }
    return Tile(2, 2);
  }();
  ASSERT_TRUE(base.unseen.contains(played));
  ObservedPlay play{Seat::B, played, End::Left, false, {2, 6}, Seat::D, Seat::C};
  observe(hinted, play);
  EXPECT_DOUBLE_EQ(hinted.soft_penalty[Seat::B][6], 0.5);

  Belief plain = base;
  ObservedPlay neutral{Seat::B, played, End::Left, false, {2, 6}, Seat::C, Seat::C};
  observe(plain, neutral);
  EXPECT_DOUBLE_EQ(plain.soft_penalty[Seat::B][6], 1.0);

  Rng r1(3), r2(3);
  int with_hint = 0, without = 0;
  for (int i = 0; i < 4000; ++i) {
    with_hint += (sample_fresh(hinted, r1)[Seat::B] & TileSet::with_pip(6)).size();
    without += (sample_fresh(plain, r2)[Seat::B] & TileSet::with_pip(6)).size();
  }
  EXPECT_LT(with_hint, without * 0.9);
}

TEST(BeliefTest, EqualEndsGiveNoHint) {
  const PerSeat<Hand> hands = deal(21);
  Belief b = init_belief(Seat::A, hands[Seat::A], 7);
  Tile played = Tile(3, 3);
  for (Tile t : b.unseen) {
    if (t.has(3)) played = t;
  }
  ASSERT_TRUE(b.unseen.contains(played));
  observe(b, ObservedPlay{Seat::B, played, End::Left, false, {3, 3}, Seat::D, Seat::D});
  for (double w : b.soft_penalty[Seat::B]) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(BeliefTest, RepairKeepsSampleConsistentAndTruthFeasible) {
  Rng rng(404);
  for (int i = 0; i < 2000; ++i) {
    const RoundState s = testing::random_state(rng, 28);
    const Seat self = seat_at(static_cast<int>(rng.below(4)));
    const Belief b = belief_for(s, self, rng.next_u64());
    ASSERT_TRUE(sample_consistent(b));
    EXPECT_TRUE(testing::respects_passes(b.sample, s.history, self));
    // The true hands never violate a hard constraint.
    for (Seat x : hidden_seats(self)) {
      EXPECT_TRUE((s.hands[x] - b.allowed_for(x)).empty());
      EXPECT_EQ(b.hand_sizes[x], s.hands[x].size());
    }
    EXPECT_EQ(b.own_hand, s.hands[self]);
    EXPECT_TRUE(hard_constraints_feasible(b));
    const PerSeat<Hand> w = sample_fresh(b, rng);
    Belief check = b;
    check.sample = w;
    EXPECT_TRUE(sample_consistent(check));
  }
}

// Exhaustive count of assignments of the unseen tiles to the hidden seats.
bool brute_force_feasible(const Belief& b) {
  const auto seats = hidden_seats(b.owner);
  const std::vector<Tile> tiles = b.unseen.to_vector();
  std::function<bool(std::size_t, std::array<int, 3>)> go = [&](std::size_t k, std::array<int, 3> left) {
    if (k == tiles.size()) return left == std::array<int, 3>{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
      if (left[i] == 0 || !b.allowed_for(seats[i]).contains(tiles[k])) continue;
      auto next_left = left;
      --next_left[i];
      if (go(k + 1, next_left)) return true;
    }
    return false;
  };
  return go(0, {b.hand_sizes[seats[0]], b.hand_sizes[seats[1]], b.hand_sizes[seats[2]]});
}

// Every maintained determinization, after every event of real self-play,
// matches the true hand sizes and unseen tiles. A repair that falls back to
// a fresh draw is rare, so this needs many events to reach it.
TEST(BeliefTest, SampleStaysConsistentThroughSelfPlay) {
  MatchHooks hooks;
  long checked = 0;
  hooks.after_event = [&](const Table& t, std::vector<AiPlayer>& players) {
    if (t.phase() != TablePhase::Turn || t.round_over()) return;
    for (AiPlayer& p : players) {
      if (p.level() == AiLevel::L1) continue;
      p.sync(t.round());
      const Belief& b = *p.belief();
      ASSERT_TRUE(sample_consistent(b));
      for (Seat x : hidden_seats(b.owner)) ASSERT_EQ(b.sample[x].size(), t.round().hands[x].size());
      ++checked;
    }
  };
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    PerSeat<AiLevel> levels;
    for (Seat s : kSeats) levels[s] = static_cast<AiLevel>(1 + (seed + idx(s)) % 4);
    play_match(MatchSetup{levels, derive_seed(7101, seed)}, hooks);
  }
  EXPECT_GT(checked, 100000);
}

TEST(BeliefTest, FeasibilityMatchesExhaustiveSearch) {
  Rng rng(55);
  int infeasible = 0;
  for (int i = 0; i < 600; ++i) {
    // Late positions keep the search small.
    RoundState s = testing::random_state(rng, 60);
    const Seat self = seat_at(static_cast<int>(rng.below(4)));
    Belief b = belief_for(s, self, 1);
    if (b.unseen.size() > 12) continue;
    // Random extra exclusions make infeasible cases appear.
    for (Seat x : hidden_seats(self)) {
      if (rng.below(2)) b.hard_excluded[x] |= pip_bit(static_cast<Pip>(rng.below(7)));
    }
    const bool expected = brute_force_feasible(b);
    EXPECT_EQ(hard_constraints_feasible(b), expected);
    infeasible += !expected;
    if (expected) {
      Belief c = b;
      c.sample = sample_fresh(b, rng);
      EXPECT_TRUE(sample_consistent(c));
    }
  }
  EXPECT_GT(infeasible, 0);
}

TEST(BeliefTest, ReplayMatchesIncrementalObservation) {
  Rng rng(6);
  for (int i = 0; i < 300; ++i) {
    const RoundState s = testing::random_state(rng, 28);
    const Seat self = seat_at(static_cast<int>(rng.below(4)));
    Belief inc = init_belief(self, dealt_hand(s, self), 99);
    for (const ObservedEvent& e : observed_history(s.history)) observe(inc, e);
    const Belief rep = replay_belief(self, dealt_hand(s, self), s.history, 99);
    EXPECT_EQ(inc.sample, rep.sample);
    EXPECT_EQ(inc.hard_excluded, rep.hard_excluded);
    EXPECT_EQ(inc.soft_penalty, rep.soft_penalty);
    EXPECT_EQ(inc.unseen, rep.unseen);
  }
}

TEST(BeliefTest, PlayingAnUnknownTileIsDataError) {
  const PerSeat<Hand> hands = deal(9);
  Belief b = init_belief(Seat::A, hands[Seat::A], 3);
  const Tile mine = *hands[Seat::A].begin();
  EXPECT_THROW(observe(b, ObservedPlay{Seat::B, mine, End::Left, true}), DataError);
}

}  // namespace
}  // namespace domino101
