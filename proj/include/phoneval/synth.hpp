#ifndef PHONEVAL_SYNTH_HPP
#define PHONEVAL_SYNTH_HPP

// Synthetic corpora with known ground truth, plus brute-force oracles used
// to check the solver and boundary matcher. Test scaffolding; nothing in
// the core library depends on this header.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phoneval/abx.hpp"
#include "phoneval/corpus_io.hpp"
#include "phoneval/framesync.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/metrics.hpp"

namespace phoneval::synth {

/// Rows: gold class, columns: probability of the substituted phone's
/// class. Only the eight phoneme classes; silence is never a target.
using ClassTargets = Eigen::Matrix<double, 8, 8>;

struct ChannelSpec {
  explicit ChannelSpec(PhonemeInventory inv) : inventory(std::move(inv)) {}

  PhonemeInventory inventory;
  int units_per_phone = 1;
  /// Segment-level event probabilities; their sum must stay below 1.
  double substitution_rate = 0.0;
  double insertion_rate = 0.0;
  double deletion_rate = 0.0;
  /// Phone segment durations, seconds; snapped to the frame grid.
  double min_duration = 0.06;
  double max_duration = 0.16;
  double frame_rate = 50.0;
  std::uint64_t seed = 0;
  int min_phones = 8;
  int max_phones = 20;
  /// Chance of a silent pause after each utterance-internal phone.
  double pause_rate = 0.0;
  int speakers = 4;
  std::optional<ClassTargets> class_targets;
  /// 0 means (|P| + 1) * units_per_phone.
  int vocab_size = 0;

  int effective_vocab() const;
  /// Throws ValidationError.
  void validate() const;
};

struct PlantedTruth {
  std::uint64_t seed = 0;
  /// owned_units[label] for every phone and silence (last).
  std::vector<std::vector<UnitId>> owned_units;
  Count substitutions = 0;
  Count deletions = 0;
  /// Edit count; each insertion event splits a phone and adds two tokens.
  Count insertions = 0;
  Count insertion_events = 0;
  Count gold_length = 0;
  Count phone_segments = 0;
  ClassConfusion::Counts class_substitutions = ClassConfusion::Counts::Zero();

  double expected_per() const {
    return static_cast<double>(substitutions + deletions + insertions) /
           static_cast<double>(gold_length);
  }
};

struct SyntheticCorpus {
  PhoneCorpus gold;
  UnitCorpus units;
  PlantedTruth planted;
};

/// Gold corpus of random phone segments and a unit corpus obtained by
/// mapping every frame to one of its phone's dedicated units after a
/// segment-level substitution / insertion / deletion channel.
SyntheticCorpus generate(const ChannelSpec& spec, int utterances);

std::string planted_json(const PlantedTruth& p, const PhonemeInventory& inv);

/// Writes inventory.tsv, gold.tsv, units.txt, planted.json and
/// manifest.txt into `dir`; returns the manifest path.
std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                   const SyntheticCorpus& corpus,
                                   const ChannelSpec& spec, Track track,
                                   const std::string& split = "dev");

inline constexpr int kAllophones = 32;

/// Each label owns kAllophones random 64-bit codes; each run of equal frame
/// labels takes one of its label's codes at random, or with probability
/// `noise` a random code,
/// and the unit is the code mod `vocab_size`. Small vocabularies force
/// labels to share units. Power-of-two vocabularies refine one another.
UnitCorpus latent_units(const PhoneCorpus& gold, const PhonemeInventory& inv,
                        double frame_rate, int vocab_size, double noise,
                        std::uint64_t seed);

struct SweepPoint {
  int vocab_size = 0;
  double pnmi = 0.0;
  double per = 0.0;
};

/// Many-to-one evaluation of latent_units() at each vocabulary size.
std::vector<SweepPoint> vocab_sweep(const PhoneCorpus& gold,
                                    const PhonemeInventory& inv,
                                    double frame_rate,
                                    std::span<const int> vocab_sizes,
                                    double noise, std::uint64_t seed,
                                    int threads = 1);

enum class EmbeddingMode {
  /// Each label has a random direction; frames add small noise.
  kSeparated,
  /// Every frame is the same vector.
  kIdentical,
  /// Every frame is an independent random unit vector.
  kRandom,
};

FeatureSet embeddings(const PhoneCorpus& gold, const PhonemeInventory& inv,
                      double frame_rate, int dims, EmbeddingMode mode,
                      std::uint64_t seed);

/// Optimal bijections of a square table by enumerating permutations.
struct OracleAssignment {
  Count best = 0;
  /// Every optimal unit -> phone map, in lexicographic order.
  std::vector<std::vector<int>> optimal_maps;
};

/// Throws ValidationError for non-square tables or more than 8 labels.
OracleAssignment oracle_assignment(const CountMatrix& counts);

/// Maximum matching between gold and predicted boundaries by exhaustive
/// search. A pair is feasible when |p - g| <= tolerance and p lies on g's
/// side of the midpoints to its gold neighbours (midpoint itself goes to the
/// earlier boundary). At most 12 boundaries per side (ValidationError).
Count oracle_match(std::span<const Micros> gold, std::span<const Micros> pred,
                   Micros tolerance);

}  // namespace phoneval::synth

#endif  // PHONEVAL_SYNTH_HPP
