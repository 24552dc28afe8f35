#ifndef PHONEVAL_CORPUS_IO_HPP
#define PHONEVAL_CORPUS_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace phoneval {

struct PhoneSegment {
  PhoneIndex phone = 0;
  Micros onset = 0;
  Micros offset = 0;
};

struct GoldUtterance {
  std::string speaker;
  /// Sorted, non-overlapping. Gaps between segments are silence.
  std::vector<PhoneSegment> segments;
  /// Last offset; the utterance starts at 0.
  Micros duration = 0;
};

/// Gold phone alignments for a split, keyed and iterated by utterance id.
struct PhoneCorpus {
  std::map<std::string, GoldUtterance> utterances;
};

/// Frame-synchronous unit streams.
struct UnitCorpus {
  double frame_rate = 0.0;
  std::map<std::string, std::vector<UnitId>> utterances;
  /// Non-fatal parse notes (e.g. utterances with zero frames).
  std::vector<std::string> warnings;

  /// Largest id + 1, or 0 for an empty corpus.
  int observed_vocab() const;
};

enum class Track { kManyToOne, kOneToOne };

std::string_view to_string(Track t);
Track parse_track(std::string_view s);

struct Manifest {
  std::string language;
  Track track = Track::kManyToOne;
  int vocab_size = 256;
  std::filesystem::path inventory;
  std::filesystem::path gold;
  std::filesystem::path units;
  std::string split;
  /// Optional continuous features directory for ABX (see abx.hpp).
  std::filesystem::path features;
  /// Optional ABX item file; items are derived from gold when absent.
  std::filesystem::path abx_items;
};

constexpr int kDefaultManyToOneVocab = 256;

/// Gold TSV: utterance_id, speaker_id, phone, onset_sec, offset_sec.
/// Rows sorted by utterance then onset. Throws ValidationError/IoError.
PhoneCorpus parse_gold(std::string_view text, const PhonemeInventory& inv,
                       const std::string& origin = "<string>");
PhoneCorpus load_gold(const std::filesystem::path& path,
                      const PhonemeInventory& inv);
std::string serialize_gold(const PhoneCorpus& corpus,
                           const PhonemeInventory& inv);

/// Units file: "frame_rate: <Hz>" header then "utt u1 u2 ..." lines.
UnitCorpus parse_units(std::string_view text,
                       const std::string& origin = "<string>");
UnitCorpus load_units(const std::filesystem::path& path);
std::string serialize_units(const UnitCorpus& corpus);

/// Key-value manifest. Relative paths resolve against the manifest's
/// directory. An inventory value naming no existing file is looked up as
/// `<data root>/inventories/<value>.tsv`; the data root is
/// $PHONEVAL_DATA_ROOT when set, else the source tree's data/ directory.
Manifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const Manifest& m);

/// Enforces the track/vocab rule: one-to-one requires |P| + 1 units.
void check_manifest(const Manifest& m, const PhonemeInventory& inv);

std::filesystem::path data_root();

/// Ids present on one side only. Both lists sorted.
struct UtteranceMismatch {
  std::vector<std::string> missing_units;
  std::vector<std::string> missing_gold;
  bool empty() const { return missing_units.empty() && missing_gold.empty(); }
};

UtteranceMismatch compare_utterances(const PhoneCorpus& gold,
                                     const UnitCorpus& units);

/// Throws ValidationError listing every mismatched id.
void require_matching_utterances(const PhoneCorpus& gold,
                                 const UnitCorpus& units);

}  // namespace phoneval

#endif  // PHONEVAL_CORPUS_IO_HPP
