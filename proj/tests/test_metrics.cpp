#include <doctest.h>

#include <numeric>
#include <set>

#include "phoneval/error.hpp"
#include "phoneval/metrics.hpp"
#include "phoneval/synth.hpp"
#include "support.hpp"

using namespace phoneval;

// ------------------------------------------------------------------ PNMI

TEST_CASE("pnmi agrees with the definition") {
  testing::Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int r = testing::uniform(rng, 2, 12), c = testing::uniform(rng, 1, 40);
    auto m = testing::random_table(rng, r, c, 500);
    m(0, 0) += 1;
    m(1, 0) += 1;
    CHECK(pnmi(m) == doctest::Approx(static_cast<double>(testing::naive_pnmi(m))).epsilon(1e-10));
  }
}

TEST_CASE("pnmi extremes") {
  // Each unit used by one phone only: phone is a function of the unit.
  CountMatrix det(3, 5);
  det << 4, 0, 0, 7, 0,
         0, 3, 0, 0, 0,
         0, 0, 9, 0, 2;
  CHECK(pnmi(det) == doctest::Approx(1.0).epsilon(1e-12));
  // Outer product of marginals.
  Eigen::Matrix<Count, 3, 1> a(2, 3, 5);
  Eigen::Matrix<Count, 1, 4> b(1, 4, 2, 7);
  const CountMatrix prod = a * b;
  CHECK(std::abs(pnmi(prod)) < 1e-12);
  CHECK_THROWS_AS(pnmi(CountMatrix::Zero(2, 2)), ValidationError);
  CountMatrix one(2, 2);
  one << 3, 4, 0, 0;
  CHECK_THROWS_AS(pnmi(one), ValidationError);
}

TEST_CASE("pnmi invariances") {
  testing::Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = testing::uniform(rng, 2, 6), c = testing::uniform(rng, 2, 10);
    auto m = testing::random_table(rng, r, c, 50, 0.1);
    m(0, 0) += 1;
    m(1, 1) += 1;
    const double base = pnmi(m);
    CHECK(pnmi(CountMatrix(m * 7)) == doctest::Approx(base).epsilon(1e-12));
    // Probabilities instead of counts.
    CHECK(pnmi(m.cast<double>() / static_cast<double>(m.sum())) ==
          doctest::Approx(base).epsilon(1e-12));

    std::vector<int> perm(c);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CountMatrix p(r, c);
    for (int j = 0; j < c; ++j) p.col(perm[j]) = m.col(j);
    CHECK(pnmi(p) == doctest::Approx(base).epsilon(1e-12));

    // Splitting a unit column can only add information.
    const int j = testing::uniform(rng, 0, c - 1);
    CountMatrix split(r, c + 1);
    split.leftCols(c) = m;
    for (int i = 0; i < r; ++i) {
      const Count moved = testing::uniform(rng, 0, static_cast<int>(m(i, j)));
      split(i, j) -= moved;
      split(i, c) = moved;
    }
    CHECK(pnmi(split) >= base - 1e-12);
  }
}

// ------------------------------------------------------------------- PER

TEST_CASE("collapse merges runs and strips edge silence") {
  const std::vector<int> f{9, 9, 1, 1, 2, 9, 9, 2, 2, 9};
  CHECK(collapse(f, 9) == LabelSeq{1, 2, 9, 2});
  CHECK(collapse(std::vector<int>{9, 9}, 9).empty());
  CHECK(collapse(std::vector<int>{}, 9).empty());
}

TEST_CASE("edit distance against the full table") {
  testing::Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int alpha = testing::uniform(rng, 1, 40);
    std::vector<int> a(testing::uniform(rng, 0, 20)), b(testing::uniform(rng, 0, 20));
    for (auto& x : a) x = testing::uniform(rng, 0, alpha - 1);
    for (auto& x : b) x = testing::uniform(rng, 0, alpha - 1);
    const auto al = align(a, b);
    CHECK(al.distance == testing::dp_distance(a, b));
    PerBreakdown br;
    br.add(al, a.size());
    CHECK(br.edits() == al.distance);
    // The alignment reproduces both sequences.
    std::vector<int> ga, hb;
    for (const auto& p : al.pairs) {
      if (p.gold >= 0) ga.push_back(p.gold);
      if (p.hyp >= 0) hb.push_back(p.hyp);
      if (p.op == EditOp::kMatch) CHECK(p.gold == p.hyp);
      if (p.op == EditOp::kSubstitution) CHECK(p.gold != p.hyp);
    }
    CHECK(ga == a);
    CHECK(hb == b);
  }
}

TEST_CASE("per breakdown on small cases") {
  const std::vector<int> g{1, 2, 3};
  auto b = per(g, std::vector<int>{1, 4, 3});
  CHECK(b.substitutions == 1);
  CHECK(b.per() == doctest::Approx(1.0 / 3));
  b = per(g, std::vector<int>{1, 3});
  CHECK(b.deletions == 1);
  CHECK(b.edits() == 1);
  b = per(g, std::vector<int>{1, 2, 5, 3});
  CHECK(b.insertions == 1);
  b = per(g, std::vector<int>{});
  CHECK(b.deletions == 3);
  CHECK(b.per() == 1.0);
  b = per(std::vector<int>{1}, std::vector<int>{2, 3, 4});
  CHECK(b.edits() == 3);
  CHECK(b.per() == 3.0);
  CHECK_THROWS_AS(per(std::vector<int>{}, std::vector<int>{1}).per(), ValidationError);
}

TEST_CASE("per is micro-averaged") {
  PerBreakdown a = per(std::vector<int>{1}, std::vector<int>{2});
  a += per(std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}, std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(a.per() == doctest::Approx(0.1));
}

TEST_CASE("class confusion counts substitutions only") {
  const auto inv = testing::toy_inventory(4);  // plosive, fricative, nasal, monophthong
  const int sil = inv.silence_index();
  const std::vector<int> g{0, 1, 2, 3, sil, 0};
  const std::vector<int> h{1, 1, 0, 3, 2, 0};
  const auto cc = class_confusion(g, h, inv);
  const int P = static_cast<int>(PhonemeClass::kPlosive);
  const int F = static_cast<int>(PhonemeClass::kFricative);
  const int N = static_cast<int>(PhonemeClass::kNasal);
  const int S = static_cast<int>(PhonemeClass::kSilence);
  CHECK(cc.counts(P, F) == 1);
  CHECK(cc.counts(N, P) == 1);
  CHECK(cc.counts(S, N) == 1);
  CHECK(cc.counts.sum() == 3);
  CHECK(cc.row_defined(P));
  CHECK_FALSE(cc.row_defined(F));
  const auto pct = cc.percent();
  CHECK(pct(P, F) == 100.0);
  CHECK(pct.row(F).sum() == 0.0);
}

// --------------------------------------------------------- segmentation

TEST_CASE("boundaries of frame streams and gold timelines") {
  const std::vector<int> f{5, 5, 1, 1, 1, 2, 5};
  CHECK(boundaries(f, 50) == std::vector<Micros>{40000, 100000, 120000});
  GoldUtterance u;
  u.segments = {{1, 40000, 100000}, {2, 100000, 120000}, {3, 200000, 260000}};
  u.duration = 260000;
  CHECK(boundaries(u, 5) == std::vector<Micros>{40000, 100000, 120000, 200000});
  CHECK(gold_transcription(u, 5) == LabelSeq{1, 2, 5, 3});
}

TEST_CASE("worked example: overlapping windows split at the midpoint") {
  const std::vector<Micros> gold{100000, 130000};
  const std::vector<Micros> pred{112000};
  CHECK(match_boundaries(gold, pred, 20000) == 1);
  // Exactly on the midpoint: the earlier boundary takes it.
  CHECK(match_boundaries(gold, std::vector<Micros>{115000, 131000}, 20000) == 2);
  CHECK(match_boundaries(gold, std::vector<Micros>{115000, 116000}, 20000) == 2);
  CHECK(match_boundaries(gold, std::vector<Micros>{110000, 114000}, 20000) == 1);
  // Tolerance is inclusive.
  CHECK(match_boundaries(std::vector<Micros>{100000}, std::vector<Micros>{120000}, 20000) == 1);
  CHECK(match_boundaries(std::vector<Micros>{100000}, std::vector<Micros>{120001}, 20000) == 0);
  CHECK_THROWS_AS(match_boundaries(std::vector<Micros>{2, 1}, std::vector<Micros>{}, 5),
                  ValidationError);
}

TEST_CASE("greedy matching equals exhaustive search") {
  testing::Rng rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const Micros tol = testing::uniform(rng, 0, 30) * 1000;
    auto draw = [&](int n, bool unique) {
      std::set<Micros> s;
      std::vector<Micros> v;
      while (static_cast<int>(v.size()) < n) {
        const Micros t = testing::uniform(rng, 0, 300) * 1000;
        if (unique && !s.insert(t).second) continue;
        v.push_back(t);
      }
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto g = draw(testing::uniform(rng, 0, 10), true);
    const auto p = draw(testing::uniform(rng, 0, 10), true);
    CHECK(match_boundaries(g, p, tol) == synth::oracle_match(g, p, tol));
  }
}

TEST_CASE("segmentation scores") {
  auto s = segmentation_scores({10, 10, 10});
  CHECK(s.f1 == doctest::Approx(100.0));
  CHECK(s.r_value == doctest::Approx(100.0));

  // No predictions: HR = 0, OS = -1, r1 = sqrt(2), r2 = 0.
  s = segmentation_scores({0, 10, 0});
  CHECK(s.r_value == doctest::Approx((1 - std::sqrt(2.0) / 2) * 100).epsilon(1e-12));
  CHECK(s.r_value == doctest::Approx(29.29).epsilon(1e-3));
  CHECK(s.f1 == 0.0);

  // Hand-computed: 8 hits, 10 gold, 16 predicted.
  s = segmentation_scores({8, 10, 16});
  const double hr = 0.8, prec = 0.5, os = hr / prec - 1;
  const double r1 = std::hypot(1 - hr, os), r2 = (-os + hr - 1) / std::sqrt(2.0);
  CHECK(s.over_segmentation == doctest::Approx(os));
  CHECK(s.f1 == doctest::Approx(100 * 2 * prec * hr / (prec + hr)));
  CHECK(s.r_value == doctest::Approx(100 * (1 - (std::abs(r1) + std::abs(r2)) / 2)));

  // Heavy over-segmentation pushes R below zero while F1 stays positive.
  s = segmentation_scores({10, 10, 60});
  CHECK(s.r_value < 0);
  CHECK(s.f1 > 0);

  CHECK_THROWS_AS(segmentation_scores({0, 0, 3}), ValidationError);
}
