#include "phoneval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "phoneval/error.hpp"
#include "phoneval/runner.hpp"
#include "text_util.hpp"

namespace phoneval::synth {

namespace fs = std::filesystem;

namespace {

// Distribution helpers with fixed formulas so corpora are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n).
  int index(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  /// Uniform in [lo, hi].
  int between(int lo, int hi) { return lo + index(hi - lo + 1); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

enum class Event { kCorrect, kSubstitution, kInsertion, kDeletion };

}  // namespace

int ChannelSpec::effective_vocab() const {
  const int needed = inventory.num_labels() * units_per_phone;
  return vocab_size > 0 ? vocab_size : needed;
}

void ChannelSpec::validate() const {
  auto in01 = [](double r) { return r >= 0.0 && r < 1.0; };
  if (!in01(substitution_rate) || !in01(insertion_rate) ||
      !in01(deletion_rate) || !in01(pause_rate))
    throw ValidationError("synth: rates must lie in [0, 1)");
  if (substitution_rate + insertion_rate + deletion_rate >= 1.0)
    throw ValidationError("synth: event rates must sum below 1");
  if (inventory.size() < 2)
    throw ValidationError("synth: need at least two phonemes");
  if (units_per_phone < 1) throw ValidationError("synth: units_per_phone < 1");
  if (effective_vocab() < inventory.num_labels() * units_per_phone)
    throw ValidationError("synth: vocab_size too small for the unit ownership");
  if (!(frame_rate > 0)) throw ValidationError("synth: frame_rate must be > 0");
  if (!(min_duration > 0) || min_duration > max_duration)
    throw ValidationError("synth: need 0 < min_duration <= max_duration");
  if (min_phones < 1 || min_phones > max_phones)
    throw ValidationError("synth: need 1 <= min_phones <= max_phones");
  if (speakers < 1) throw ValidationError("synth: speakers < 1");
}

SyntheticCorpus generate(const ChannelSpec& spec, int utterances) {
  spec.validate();
  const auto& inv = spec.inventory;
  const int num_labels = inv.num_labels();
  const PhoneIndex sil = inv.silence_index();
  Rng rng(spec.seed);

  SyntheticCorpus out;
  out.planted.seed = spec.seed;
  out.units.frame_rate = spec.frame_rate;

  // Unit ownership: a seeded permutation of the first labels*upp ids.
  const int owned_total = num_labels * spec.units_per_phone;
  std::vector<UnitId> perm(owned_total);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = owned_total - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  out.planted.owned_units.resize(num_labels);
  for (int l = 0; l < num_labels; ++l)
    for (int k = 0; k < spec.units_per_phone; ++k)
      out.planted.owned_units[l].push_back(perm[l * spec.units_per_phone + k]);

  // Phones grouped by class for class-targeted substitutions.
  std::vector<std::vector<PhoneIndex>> by_class(8);
  for (PhoneIndex p = 0; p < inv.size(); ++p)
    by_class[static_cast<int>(inv.phone_class(p))].push_back(p);

  const Micros frame_us = std::llround(kMicrosPerSecond / spec.frame_rate);
  auto frame_time = [&](long f) {
    return std::llround(static_cast<double>(f) * kMicrosPerSecond / spec.frame_rate);
  };
  (void)frame_us;
  const int min_frames =
      std::max(1, static_cast<int>(std::ceil(spec.min_duration * spec.frame_rate - 1e-9)));
  const int max_frames = std::max(
      min_frames, static_cast<int>(std::floor(spec.max_duration * spec.frame_rate + 1e-9)));

  const int width = std::max(4, static_cast<int>(std::to_string(utterances).size()));
  for (int u = 0; u < utterances; ++u) {
    std::string id = std::to_string(u);
    id = "utt" + std::string(width - id.size(), '0') + id;
    GoldUtterance utt;
    utt.speaker = "spk" + std::to_string(u % spec.speakers);

    // Gold label plan: (label, frames) with explicit silence runs.
    struct Run {
      PhoneIndex label;
      int frames;
    };
    std::vector<Run> plan;
    plan.push_back({sil, rng.between(2, 10)});
    const int phones = rng.between(spec.min_phones, spec.max_phones);
    PhoneIndex prev = sil;
    for (int k = 0; k < phones; ++k) {
      PhoneIndex p;
      do {
        p = rng.index(inv.size());
      } while (p == prev);
      plan.push_back({p, rng.between(min_frames, max_frames)});
      prev = p;
      if (k + 1 < phones && spec.pause_rate > 0 && rng.uniform() < spec.pause_rate)
        plan.push_back({sil, rng.between(2, 10)});
    }
    plan.push_back({sil, rng.between(2, 10)});

    // Gold segments: phones explicit, leading silence implicit (a gap),
    // internal pauses implicit, trailing silence explicit so the duration
    // covers it.
    long frame = 0;
    for (std::size_t r = 0; r < plan.size(); ++r) {
      const auto& run = plan[r];
      const bool last = r + 1 == plan.size();
      if (run.label != sil || last)
        utt.segments.push_back({run.label, frame_time(frame), frame_time(frame + run.frames)});
      frame += run.frames;
    }
    utt.duration = frame_time(frame);

    // Hypothesis labels per frame through the noise channel.
    std::vector<PhoneIndex> hyp;
    hyp.reserve(static_cast<std::size_t>(frame));
    PhoneIndex shown = sil;  // label of the last hypothesis run
    for (std::size_t r = 0; r < plan.size(); ++r) {
      const auto& run = plan[r];
      if (run.label == sil) {
        hyp.insert(hyp.end(), run.frames, sil);
        shown = sil;
        continue;
      }
      ++out.planted.phone_segments;
      const PhoneIndex g = run.label;
      const PhoneIndex next_gold = plan[r + 1].label;
      const double x = rng.uniform();
      Event ev = Event::kCorrect;
      if (x < spec.deletion_rate)
        ev = Event::kDeletion;
      else if (x < spec.deletion_rate + spec.substitution_rate)
        ev = Event::kSubstitution;
      else if (x < spec.deletion_rate + spec.substitution_rate + spec.insertion_rate)
        ev = Event::kInsertion;

      // Events that would merge with a neighbour fall back to correct.
      if (ev == Event::kDeletion && next_gold == shown) ev = Event::kCorrect;
      if (ev == Event::kInsertion && run.frames < 3) ev = Event::kCorrect;

      PhoneIndex h = g;
      if (ev == Event::kSubstitution) {
        auto allowed = [&](PhoneIndex p) {
          return p != g && p != shown && p != next_gold;
        };
        PhoneIndex pick = -1;
        if (spec.class_targets) {
          const int gc = static_cast<int>(inv.phone_class(g));
          for (int attempt = 0; attempt < 64 && pick < 0; ++attempt) {
            double y = rng.uniform(), acc = 0.0;
            int target = 7;
            for (int c = 0; c < 8; ++c) {
              acc += (*spec.class_targets)(gc, c);
              if (y < acc) {
                target = c;
                break;
              }
            }
            std::vector<PhoneIndex> options;
            for (PhoneIndex p : by_class[target])
              if (allowed(p)) options.push_back(p);
            if (!options.empty()) pick = options[rng.index(static_cast<int>(options.size()))];
          }
        }
        if (pick < 0) {
          std::vector<PhoneIndex> options;
          for (PhoneIndex p = 0; p < inv.size(); ++p)
            if (allowed(p)) options.push_back(p);
          if (!options.empty()) pick = options[rng.index(static_cast<int>(options.size()))];
        }
        if (pick < 0) {
          ev = Event::kCorrect;
        } else {
          h = pick;
          ++out.planted.substitutions;
          out.planted.class_substitutions(static_cast<int>(inv.phone_class(g)),
                                          static_cast<int>(inv.phone_class(h))) += 1;
        }
      }

      switch (ev) {
        case Event::kDeletion:
          hyp.insert(hyp.end(), run.frames, shown);
          ++out.planted.deletions;
          break;
        case Event::kInsertion: {
          PhoneIndex ins;
          do {
            ins = rng.index(inv.size());
          } while (ins == g);
          const int mid = rng.between(1, run.frames - 2);
          const int head = rng.between(1, run.frames - mid - 1);
          const int tail = run.frames - mid - head;
          hyp.insert(hyp.end(), head, g);
          hyp.insert(hyp.end(), mid, ins);
          hyp.insert(hyp.end(), tail, g);
          shown = g;
          out.planted.insertions += 2;
          ++out.planted.insertion_events;
          break;
        }
        case Event::kSubstitution:
        case Event::kCorrect:
          hyp.insert(hyp.end(), run.frames, h);
          shown = h;
          break;
      }
    }

    // Gold length as scored: collapsed transcript without edge silence.
    out.planted.gold_length += static_cast<Count>(gold_transcription(utt, sil).size());

    std::vector<UnitId> units(hyp.size());
    for (std::size_t t = 0; t < hyp.size(); ++t) {
      const auto& owned = out.planted.owned_units[hyp[t]];
      units[t] = owned[rng.index(static_cast<int>(owned.size()))];
    }
    out.units.utterances.emplace(id, std::move(units));
    out.gold.utterances.emplace(std::move(id), std::move(utt));
  }
  return out;
}

std::string planted_json(const PlantedTruth& p, const PhonemeInventory& inv) {
  nlohmann::ordered_json j;
  j["seed"] = p.seed;
  j["phone_segments"] = p.phone_segments;
  j["gold_length"] = p.gold_length;
  j["substitutions"] = p.substitutions;
  j["deletions"] = p.deletions;
  j["insertions"] = p.insertions;
  j["insertion_events"] = p.insertion_events;
  j["expected_per"] = p.gold_length > 0 ? p.expected_per() : 0.0;
  nlohmann::ordered_json own = nlohmann::ordered_json::object();
  for (int l = 0; l < static_cast<int>(p.owned_units.size()); ++l)
    own[inv.symbol(l)] = p.owned_units[l];
  j["owned_units"] = own;
  nlohmann::ordered_json cls = nlohmann::ordered_json::object();
  for (auto gc : all_phoneme_classes()) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (auto hc : all_phoneme_classes())
      row[std::string(to_string(hc))] =
          p.class_substitutions(static_cast<int>(gc), static_cast<int>(hc));
    cls[std::string(to_string(gc))] = row;
  }
  j["class_substitutions"] = cls;
  return j.dump(2) + "\n";
}

fs::path write_corpus(const fs::path& dir, const SyntheticCorpus& corpus,
                      const ChannelSpec& spec, Track track,
                      const std::string& split) {
  fs::create_directories(dir);
  const auto& inv = spec.inventory;
  detail::write_file(dir / "inventory.tsv", serialize_inventory(inv));
  detail::write_file(dir / "gold.tsv", serialize_gold(corpus.gold, inv));
  detail::write_file(dir / "units.txt", serialize_units(corpus.units));
  detail::write_file(dir / "planted.json", planted_json(corpus.planted, inv));
  std::ostringstream m;
  m << "language: " << inv.language() << '\n'
    << "track: " << to_string(track) << '\n'
    << "vocab_size: " << spec.effective_vocab() << '\n'
    << "split: " << split << '\n'
    << "inventory: inventory.tsv\n"
    << "gold: gold.tsv\n"
    << "units: units.txt\n";
  const auto path = dir / "manifest.txt";
  detail::write_file(path, m.str());
  return path;
}

UnitCorpus latent_units(const PhoneCorpus& gold, const PhonemeInventory& inv,
                        double frame_rate, int vocab_size, double noise,
                        std::uint64_t seed) {
  if (vocab_size < 1) throw ValidationError("latent_units: vocab_size < 1");
  if (!(noise >= 0.0 && noise <= 1.0))
    throw ValidationError("latent_units: noise must lie in [0, 1]");
  UnitCorpus out;
  out.frame_rate = frame_rate;
  Rng rng(seed);
  // 64-bit codes per (label, allophone); a unit is the code mod |U|. One
  // code per run of equal frame labels.
  std::vector<std::uint64_t> codes(
      static_cast<std::size_t>(inv.num_labels()) * kAllophones);
  for (auto& c : codes) c = rng.next();
  const auto v = static_cast<std::uint64_t>(vocab_size);
  for (const auto& [id, utt] : gold.utterances) {
    const long n = std::lround(static_cast<double>(utt.duration) * frame_rate /
                               kMicrosPerSecond);
    const auto labels = frame_labels(utt, n, frame_rate, inv.silence_index(), id);
    std::vector<UnitId> units(labels.size());
    std::uint64_t code = 0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (t == 0 || labels[t] != labels[t - 1]) {
        code = codes[static_cast<std::size_t>(labels[t]) * kAllophones +
                     static_cast<std::size_t>(rng.index(kAllophones))];
        const std::uint64_t stray = rng.next();
        if (rng.uniform() < noise) code = stray;
      }
      units[t] = static_cast<UnitId>(code % v);
    }
    out.utterances.emplace(id, std::move(units));
  }
  return out;
}

std::vector<SweepPoint> vocab_sweep(const PhoneCorpus& gold,
                                    const PhonemeInventory& inv,
                                    double frame_rate,
                                    std::span<const int> vocab_sizes,
                                    double noise, std::uint64_t seed,
                                    int threads) {
  std::vector<SweepPoint> out;
  EvalOptions opts;
  opts.threads = threads;
  for (int v : vocab_sizes) {
    const auto units = latent_units(gold, inv, frame_rate, v, noise, seed);
    const auto r = evaluate(gold, units, inv, Track::kManyToOne, v, opts);
    out.push_back({v, r.pnmi, r.per.per()});
  }
  return out;
}

FeatureSet embeddings(const PhoneCorpus& gold, const PhonemeInventory& inv,
                      double frame_rate, int dims, EmbeddingMode mode,
                      std::uint64_t seed) {
  if (dims < 1) throw ValidationError("embeddings: dims < 1");
  Rng rng(seed);
  auto random_unit = [&] {
    Eigen::RowVectorXd v(dims);
    do {
      for (int d = 0; d < dims; ++d) v(d) = rng.normal();
    } while (v.norm() == 0.0);
    return Eigen::RowVectorXd(v / v.norm());
  };
  std::vector<Eigen::RowVectorXd> centers;
  for (int l = 0; l < inv.num_labels(); ++l) centers.push_back(random_unit());
  const Eigen::RowVectorXd fixed = random_unit();

  FeatureSet set;
  set.frame_rate = frame_rate;
  set.dims = dims;
  for (const auto& [id, utt] : gold.utterances) {
    const long n = std::lround(static_cast<double>(utt.duration) * frame_rate /
                               kMicrosPerSecond);
    const auto labels = frame_labels(utt, n, frame_rate, inv.silence_index(), id);
    FrameMatrixd m(static_cast<Eigen::Index>(labels.size()), dims);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const auto row = static_cast<Eigen::Index>(t);
      switch (mode) {
        case EmbeddingMode::kSeparated: {
          Eigen::RowVectorXd v = centers[labels[t]];
          for (int d = 0; d < dims; ++d) v(d) += 0.05 * rng.normal();
          m.row(row) = v;
          break;
        }
        case EmbeddingMode::kIdentical:
          m.row(row) = fixed;
          break;
        case EmbeddingMode::kRandom:
          m.row(row) = random_unit();
          break;
      }
    }
    set.utterances.emplace(id, std::move(m));
  }
  return set;
}

OracleAssignment oracle_assignment(const CountMatrix& counts) {
  if (counts.rows() != counts.cols())
    throw ValidationError("oracle_assignment: table must be square");
  if (counts.rows() > 8)
    throw ValidationError("oracle_assignment: at most 8 labels");
  const int n = static_cast<int>(counts.rows());
  std::vector<int> map(n);
  std::iota(map.begin(), map.end(), 0);
  OracleAssignment out;
  bool first = true;
  do {
    Count v = 0;
    for (int j = 0; j < n; ++j) v += counts(map[j], j);
    if (first || v > out.best) {
      out.best = v;
      out.optimal_maps.clear();
      first = false;
    }
    if (v == out.best) out.optimal_maps.push_back(map);
  } while (std::next_permutation(map.begin(), map.end()));
  return out;
}

Count oracle_match(std::span<const Micros> gold, std::span<const Micros> pred,
                   Micros tolerance) {
  if (gold.size() > 12 || pred.size() > 12)
    throw ValidationError("oracle_match: at most 12 boundaries per side");
  const std::size_t ng = gold.size(), np = pred.size();
  // Doubled coordinates keep midpoints integral.
  auto feasible = [&](std::size_t k, std::size_t j) {
    const Micros p = pred[j], g = gold[k];
    if (std::abs(p - g) > tolerance) return false;
    if (k > 0 && 2 * p <= gold[k - 1] + g) return false;
    if (k + 1 < ng && 2 * p > g + gold[k + 1]) return false;
    return true;
  };
  std::vector<int> memo((ng + 1) << np, -1);
  std::function<int(std::size_t, unsigned)> best = [&](std::size_t k,
                                                       unsigned used) -> int {
    if (k == ng) return 0;
    int& slot = memo[(k << np) | used];
    if (slot >= 0) return slot;
    int v = best(k + 1, used);
    for (std::size_t j = 0; j < np; ++j)
      if (!(used & (1u << j)) && feasible(k, j))
        v = std::max(v, 1 + best(k + 1, used | (1u << j)));
    return slot = v;
  };
  return best(0, 0);
}

}  // namespace phoneval::synth
