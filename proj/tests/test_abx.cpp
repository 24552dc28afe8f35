#include <doctest.h>

#include <functional>
#include <limits>
#include <numbers>

#include <Eigen/QR>

#include "phoneval/abx.hpp"
#include "phoneval/error.hpp"
#include "phoneval/synth.hpp"
#include "support.hpp"

using namespace phoneval;

namespace {

FrameMatrixd random_frames(testing::Rng& rng, int n, int dims) {
  std::normal_distribution<double> g;
  FrameMatrixd m(n, dims);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < dims; ++d) m(i, d) = g(rng);
  return m;
}

/// Every monotone path from (0,0) to (n-1,m-1); the cheapest (shortest on
/// ties) divided by its length.
double brute_dtw(const FrameMatrixd& x, const FrameMatrixd& y) {
  double best_c = std::numeric_limits<double>::infinity();
  long best_l = 0;
  std::function<void(long, long, double, long)> walk = [&](long i, long j,
                                                           double c, long l) {
    const double v = x.row(i).dot(y.row(j)) / (x.row(i).norm() * y.row(j).norm());
    c += std::acos(std::clamp(v, -1.0, 1.0)) / std::numbers::pi;
    ++l;
    if (i == x.rows() - 1 && j == y.rows() - 1) {
      if (c < best_c - 1e-12 || (std::abs(c - best_c) <= 1e-12 && l < best_l)) {
        best_c = c;
        best_l = l;
      }
      return;
    }
    if (i + 1 < x.rows()) walk(i + 1, j, c, l);
    if (j + 1 < y.rows()) walk(i, j + 1, c, l);
    if (i + 1 < x.rows() && j + 1 < y.rows()) walk(i + 1, j + 1, c, l);
  };
  walk(0, 0, 0.0, 0);
  return best_c / static_cast<double>(best_l);
}

/// Scores one direction of every cell by plain enumeration and returns the
/// symmetrized mean.
double brute_abx(const std::vector<AbxItem>& items,
                 const std::vector<Representation>& reps, bool within) {
  std::map<std::tuple<std::string, std::string, std::string, std::string,
                      std::string, std::string>,
           std::vector<double>>
      cells;
  const std::size_t n = items.size();
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, bool> seen;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t x = 0; x < n; ++x) {
        const auto &A = items[a], &B = items[b], &X = items[x];
        if (x == a || A.phone == B.phone || X.phone != A.phone) continue;
        if (A.prev != B.prev || A.next != B.next || X.prev != A.prev || X.next != A.next)
          continue;
        if (A.speaker != B.speaker) continue;
        if (within ? X.speaker != A.speaker : X.speaker == A.speaker) continue;
        const double d1 = distance(reps[a], reps[x]), d2 = distance(reps[b], reps[x]);
        const double s = d1 < d2 ? 1.0 : d1 == d2 ? 0.5 : 0.0;
        cells[{A.phone, B.phone, A.prev, A.next, A.speaker, X.speaker}].push_back(s);
      }
  std::map<std::tuple<std::string, std::string, std::string, std::string,
                      std::string, std::string>,
           std::vector<double>>
      sym;
  for (const auto& [k, v] : cells) {
    double m = 0;
    for (double s : v) m += s;
    m /= static_cast<double>(v.size());
    auto [pa, pb, prev, next, sab, sx] = k;
    sym[{std::min(pa, pb), std::max(pa, pb), prev, next, sab, sx}].push_back(m);
  }
  double total = 0;
  for (const auto& [k, v] : sym) {
    double m = 0;
    for (double s : v) m += s;
    total += m / static_cast<double>(v.size());
  }
  return total / static_cast<double>(sym.size());
}

struct Toy {
  std::vector<AbxItem> items;
  std::vector<Representation> reps;
};

/// Items over two contexts, three phones and three speakers with random
/// short frame sequences.
Toy random_toy(testing::Rng& rng, int count, int dims) {
  Toy t;
  const char* phones[] = {"a", "b", "c"};
  const char* speakers[] = {"s1", "s2", "s3"};
  for (int k = 0; k < count; ++k) {
    AbxItem it;
    it.utterance = "u" + std::to_string(k);
    it.onset = 0;
    it.offset = 100000;
    it.phone = phones[testing::uniform(rng, 0, 2)];
    it.prev = testing::uniform(rng, 0, 1) ? "x" : "y";
    it.next = "z";
    it.speaker = speakers[testing::uniform(rng, 0, 2)];
    t.items.push_back(it);
    t.reps.emplace_back(random_frames(rng, testing::uniform(rng, 1, 4), dims));
  }
  return t;
}

}  // namespace

TEST_CASE("angular distance") {
  Eigen::RowVector3d a(1, 0, 0), b(0, 2, 0), c(-3, 0, 0), z(0, 0, 0);
  CHECK(angular_distance(a, a) == 0.0);
  CHECK(angular_distance(a, Eigen::RowVector3d(5, 0, 0)) == 0.0);
  CHECK(angular_distance(a, b) == doctest::Approx(0.5));
  CHECK(angular_distance(a, c) == 1.0);
  CHECK(angular_distance(a, z) == 0.5);
  CHECK(angular_distance(z, z) == 0.0);
}

TEST_CASE("dtw equals exhaustive path search and is symmetric") {
  testing::Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_frames(rng, testing::uniform(rng, 1, 5), 3);
    const auto y = random_frames(rng, testing::uniform(rng, 1, 5), 3);
    CHECK(dtw_angular(x, y) == doctest::Approx(brute_dtw(x, y)).epsilon(1e-12));
    CHECK(dtw_angular(x, y) == dtw_angular(y, x));
    CHECK(dtw_angular(x, x) == 0.0);
  }
  CHECK_THROWS_AS(dtw_angular(FrameMatrixd(0, 3), FrameMatrixd(2, 3)), ValidationError);
}

TEST_CASE("dtw is invariant to rotations and per-frame scaling") {
  testing::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int dims = 6;
    const Eigen::MatrixXd q =
        Eigen::HouseholderQR<Eigen::MatrixXd>(random_frames(rng, dims, dims)).householderQ();
    const auto x = random_frames(rng, testing::uniform(rng, 1, 8), dims);
    const auto y = random_frames(rng, testing::uniform(rng, 1, 8), dims);
    const FrameMatrixd xr = x * q, yr = y * q;
    const FrameMatrixd xs = (x.array().colwise() * Eigen::ArrayXd::LinSpaced(x.rows(), 1, 9)).matrix();
    CHECK(dtw_angular(xr, yr) == doctest::Approx(dtw_angular(x, y)).epsilon(1e-9));
    CHECK(dtw_angular(xs, y) == doctest::Approx(dtw_angular(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("discrete unit distance") {
  const std::vector<UnitId> a{1, 1, 2, 2, 3}, b{1, 2, 3, 3}, c{1, 4, 3}, d{7};
  CHECK(unit_sequence_distance(a, b) == 0.0);
  CHECK(unit_sequence_distance(a, c) == doctest::Approx(1.0 / 3));
  CHECK(unit_sequence_distance(a, d) == 1.0);
  CHECK(unit_sequence_distance(a, b, true) == 0.0);
  CHECK(unit_sequence_distance(a, c, true) == 1.0);
  CHECK_THROWS_AS(unit_sequence_distance(a, std::vector<UnitId>{}), ValidationError);
  CHECK_THROWS_AS(distance(Representation(a), Representation(FrameMatrixd(1, 2))),
                  ValidationError);
}

TEST_CASE("items come from utterance-internal phones") {
  const auto inv = testing::toy_inventory(3);
  PhoneCorpus gold;
  auto& u = gold.utterances["u1"];
  u.speaker = "s";
  u.segments = {{0, 0, 100000}, {1, 100000, 200000}, {2, 300000, 400000}, {0, 400000, 500000}};
  u.duration = 500000;
  const auto items = extract_items(gold, inv);
  REQUIRE(items.size() == 2);
  CHECK(items[0].phone == "p1");
  CHECK(items[0].prev == "p0");
  CHECK(items[0].next == "SIL");
  CHECK(items[1].phone == "p2");
  CHECK(items[1].prev == "SIL");
  CHECK(items[1].next == "p0");
  const auto back = parse_items(serialize_items(items));
  REQUIRE(back.size() == 2);
  CHECK(back[1].onset == 300000);
  CHECK(back[1].speaker == "s");
  CHECK_THROWS_AS(parse_items("u1\t0\t1\ta\tb\tc\ts\n"), ValidationError);
}

TEST_CASE("item frame range") {
  AbxItem it{"u", 100000, 200000, "a", "b", "c", "s"};
  // Centers at 10k, 30k, ...: frames 5..9 have centers 110k..190k.
  CHECK(item_frame_range(it, 20, 50) == std::pair<long, long>{5, 10});
  it.onset = 101000;
  it.offset = 105000;
  const auto r = item_frame_range(it, 20, 50);
  CHECK(r.second - r.first == 1);
}

TEST_CASE("abx score equals plain enumeration") {
  testing::Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = random_toy(rng, 24, 4);
    for (bool within : {true, false}) {
      const auto cond = within ? AbxCondition::kWithin : AbxCondition::kAcross;
      AbxOptions opt;
      opt.max_triples_per_cell = 1u << 30;
      AbxResult r;
      try {
        r = abx_score(t.items, t.reps, cond, opt);
      } catch (const ValidationError&) {
        continue;
      }
      CHECK(r.score == doctest::Approx(brute_abx(t.items, t.reps, within)).epsilon(1e-12));
      for (const auto& c : r.cells) CHECK_FALSE(c.sampled);
    }
  }
}

TEST_CASE("sampled abx is deterministic and thread independent") {
  testing::Rng rng(99);
  const auto t = random_toy(rng, 120, 4);
  AbxOptions opt;
  opt.max_triples_per_cell = 20;
  opt.seed = 5;
  const auto a = abx_score(t.items, t.reps, AbxCondition::kAcross, opt);
  bool any_sampled = false;
  for (const auto& c : a.cells) any_sampled = any_sampled || c.sampled;
  CHECK(any_sampled);
  for (int threads : {1, 3, 4, 0}) {
    opt.threads = threads;
    const auto b = abx_score(t.items, t.reps, AbxCondition::kAcross, opt);
    CHECK(b.score == a.score);
  }
  opt.seed = 6;
  opt.threads = 1;
  CHECK(abx_score(t.items, t.reps, AbxCondition::kAcross, opt).score != a.score);
}

TEST_CASE("abx on synthetic embeddings") {
  synth::ChannelSpec spec{testing::toy_inventory(6)};
  spec.seed = 3;
  spec.speakers = 2;
  const auto corpus = synth::generate(spec, 40);
  const auto items = extract_items(corpus.gold, spec.inventory);
  auto score = [&](synth::EmbeddingMode mode) {
    const auto feats = synth::embeddings(corpus.gold, spec.inventory, 50, 8, mode, 1);
    const auto reps = item_representations(items, feats);
    AbxOptions opt;
    opt.seed = 1;
    return std::pair{abx_score(items, reps, AbxCondition::kWithin, opt),
                     abx_score(items, reps, AbxCondition::kAcross, opt)};
  };
  const auto [ws, as] = score(synth::EmbeddingMode::kSeparated);
  CHECK(ws.error_rate() == 0.0);
  CHECK(as.error_rate() == 0.0);
  const auto [wi, ai] = score(synth::EmbeddingMode::kIdentical);
  CHECK(wi.error_rate() == 50.0);
  CHECK(ai.error_rate() == 50.0);
  CHECK(abx_summary(wi, ai) == 50.0);
}

TEST_CASE("features directory round trip") {
  testing::ScratchDir dir("features");
  testing::Rng rng(1);
  FeatureSet set;
  set.frame_rate = 50;
  set.dims = 3;
  set.utterances["a"] = random_frames(rng, 4, 3).cast<float>().cast<double>();
  set.utterances["b"] = random_frames(rng, 1, 3).cast<float>().cast<double>();
  write_features(dir.path(), set);
  const auto back = load_features(dir.path());
  CHECK(back.dims == 3);
  CHECK(back.frame_rate == 50);
  REQUIRE(back.utterances.size() == 2);
  CHECK(back.utterances.at("a") == set.utterances.at("a"));
  CHECK_THROWS_AS(load_features(dir / "nope"), IoError);
}
