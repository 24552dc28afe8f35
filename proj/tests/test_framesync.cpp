#include <doctest.h>

#include "phoneval/error.hpp"
#include "phoneval/framesync.hpp"
#include "support.hpp"

using namespace phoneval;

namespace {

/// Random utterance with integer-microsecond boundaries and random gaps.
GoldUtterance random_utterance(testing::Rng& rng, int phones) {
  GoldUtterance u;
  u.speaker = "s";
  Micros t = testing::uniform(rng, 0, 50000);
  for (int k = 0; k < testing::uniform(rng, 1, 12); ++k) {
    const Micros len = testing::uniform(rng, 1000, 120000);
    u.segments.push_back({testing::uniform(rng, 0, phones - 1), t, t + len});
    t += len;
    if (testing::uniform(rng, 0, 3) == 0) t += testing::uniform(rng, 1, 40000);
  }
  u.duration = u.segments.back().offset;
  return u;
}

}  // namespace

TEST_CASE("frame centers") {
  CHECK(frame_center(0, 50) == 10000);
  CHECK(frame_center(3, 50) == 70000);
  CHECK(frame_center(0, 100) == 5000);
}

TEST_CASE("frame labels follow the segment under each center") {
  testing::Rng rng(11);
  const int phones = 5, sil = 5;
  for (int trial = 0; trial < 300; ++trial) {
    const auto utt = random_utterance(rng, phones);
    for (double rate : {25.0, 50.0, 100.0}) {
      const long n = std::lround(static_cast<double>(utt.duration) * rate / 1e6);
      for (long frames : {n - 1, n, n + 1}) {
        if (frames < 0) continue;
        const auto labels = frame_labels(utt, frames, rate, sil);
        REQUIRE(static_cast<long>(labels.size()) == frames);
        for (long k = 0; k < frames; ++k) {
          const double t = (k + 0.5) / rate;
          const int want = t * 1e6 < static_cast<double>(utt.duration)
                               ? testing::scan_label(utt, t, sil)
                               : sil;
          CHECK(labels[k] == want);
        }
      }
      CHECK_THROWS_AS(frame_labels(utt, n + 2, rate, sil), ValidationError);
      if (n >= 2) CHECK_THROWS_AS(frame_labels(utt, n - 2, rate, sil), ValidationError);
    }
  }
}

TEST_CASE("boundary exactly on a frame center goes to the later segment") {
  GoldUtterance u;
  u.segments = {{0, 0, 10000}, {1, 10000, 40000}};
  u.duration = 40000;
  CHECK(frame_label(u, 0, 50, 2) == 1);
  CHECK(frame_label(u, 1, 50, 2) == 1);
  CHECK_THROWS_AS(frame_label(u, 2, 50, 2), ValidationError);
}

TEST_CASE("contingency counts every frame once and ignores threads") {
  testing::Rng rng(5);
  const auto inv = testing::toy_inventory(4);
  PhoneCorpus gold;
  UnitCorpus units;
  units.frame_rate = 50;
  long frames = 0;
  for (int u = 0; u < 40; ++u) {
    auto utt = random_utterance(rng, inv.size());
    const long n = std::lround(static_cast<double>(utt.duration) * 50 / 1e6);
    std::vector<UnitId> s(n);
    for (auto& x : s) x = testing::uniform(rng, 0, 9);
    frames += n;
    const std::string id = "u" + std::to_string(100 + u);
    units.utterances[id] = s;
    gold.utterances[id] = std::move(utt);
  }
  const auto t1 = build_contingency(gold, units, inv, 10, 1);
  CHECK(t1.total() == frames);
  CHECK(t1.counts().sum() == frames);
  CHECK(t1.num_labels() == inv.num_labels());
  for (int threads : {2, 3, 4, 7, 0}) CHECK(build_contingency(gold, units, inv, 10, threads) == t1);

  // Splitting the corpus and merging the parts gives the same table.
  PhoneCorpus ga, gb;
  UnitCorpus ua, ub;
  ua.frame_rate = ub.frame_rate = 50;
  int k = 0;
  for (const auto& [id, utt] : gold.utterances) {
    (k % 2 ? ga : gb).utterances[id] = utt;
    (k % 2 ? ua : ub).utterances[id] = units.utterances.at(id);
    ++k;
  }
  const auto a = build_contingency(ga, ua, inv, 10);
  const auto b = build_contingency(gb, ub, inv, 10);
  CHECK(merge(a, b) == t1);
  CHECK(merge(b, a) == t1);

  CHECK_THROWS_AS(build_contingency(gold, units, inv, 5), ValidationError);
  CHECK_THROWS_AS(merge(a, ContingencyTable(3, 3)), ValidationError);
}

TEST_CASE("contingency table rejects negative counts") {
  CountMatrix m(2, 2);
  m << 1, -1, 0, 0;
  CHECK_THROWS_AS(ContingencyTable{m}, ValidationError);
}
