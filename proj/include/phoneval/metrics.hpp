#ifndef PHONEVAL_METRICS_HPP
#define PHONEVAL_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "phoneval/corpus_io.hpp"
#include "phoneval/error.hpp"
#include "phoneval/framesync.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace phoneval {

// ------------------------------------------------------------------ PNMI

/// Phone-normalized mutual information I(p;u) / H(p) of a phone x unit
/// count (or probability) matrix. 0 log 0 terms vanish. Throws
/// ValidationError when the matrix is empty or only one phone occurs.
template <typename Derived>
double pnmi(const Eigen::MatrixBase<Derived>& counts) {
  const Eigen::MatrixXd c = counts.template cast<double>();
  const double total = c.sum();
  if (!(total > 0)) throw ValidationError("pnmi: empty contingency table");
  const Eigen::VectorXd rows = c.rowwise().sum();
  const Eigen::RowVectorXd cols = c.colwise().sum();

  double h = 0.0;
  for (Eigen::Index i = 0; i < rows.size(); ++i)
    if (rows(i) > 0) h -= rows(i) / total * std::log(rows(i) / total);
  if (!(h > 0))
    throw ValidationError("pnmi: phone entropy is zero (one phone observed)");

  double mi = 0.0;
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    if (cols(j) == 0) continue;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double n = c(i, j);
      if (n == 0) continue;
      mi += n / total * std::log(n * total / (rows(i) * cols(j)));
    }
  }
  return std::clamp(mi / h, 0.0, 1.0);
}

inline double pnmi(const ContingencyTable& table) {
  return pnmi(table.counts());
}

// ------------------------------------------------------------------- PER

/// Run-length merge of a frame stream; silence runs at either end are
/// dropped, internal silence stays as a token.
LabelSeq collapse(std::span<const int> frames, int silence);

enum class EditOp : char { kMatch, kSubstitution, kDeletion, kInsertion };

struct AlignedPair {
  EditOp op;
  int gold;  // -1 for insertions
  int hyp;   // -1 for deletions
};

struct EditAlignment {
  std::vector<AlignedPair> pairs;
  int distance = 0;
};

/// Unit-cost Levenshtein alignment. On ties the backtrace (run from the
/// end) prefers deletion, then substitution/match, then insertion.
EditAlignment align(std::span<const int> gold, std::span<const int> hyp);

/// Edit counts summed over utterances; PER = (S + D + I) / N.
struct PerBreakdown {
  Count substitutions = 0;
  Count deletions = 0;
  Count insertions = 0;
  Count gold_length = 0;

  Count edits() const { return substitutions + deletions + insertions; }
  /// Ratio, may exceed 1. Throws ValidationError when gold_length == 0.
  double per() const;
  PerBreakdown& operator+=(const PerBreakdown& o);
  void add(const EditAlignment& a, std::size_t gold_length);
};

PerBreakdown per(std::span<const int> gold, std::span<const int> hyp);

// ------------------------------------------------------- class confusion

/// Substitutions tallied by (gold class, predicted class), silence
/// included as the ninth class.
struct ClassConfusion {
  using Counts = Eigen::Matrix<Count, kNumPhonemeClasses, kNumPhonemeClasses>;
  using Percent =
      Eigen::Matrix<double, kNumPhonemeClasses, kNumPhonemeClasses>;

  Counts counts = Counts::Zero();

  void add(const EditAlignment& a, const PhonemeInventory& inv);
  ClassConfusion& operator+=(const ClassConfusion& o) {
    counts += o.counts;
    return *this;
  }
  /// A row is defined once it has at least one substitution.
  bool row_defined(int gold_class) const {
    return counts.row(gold_class).sum() > 0;
  }
  /// Row-normalized to 100; undefined rows are all zero.
  Percent percent() const;
};

ClassConfusion class_confusion(std::span<const int> gold,
                               std::span<const int> hyp,
                               const PhonemeInventory& inv);

// --------------------------------------------------------- segmentation

/// Label-change times of a frame stream, frame k starting at k / rate.
std::vector<Micros> boundaries(std::span<const int> frames,
                               double frame_rate);

/// Label-change times of a gold utterance with gaps read as silence.
/// Utterance start and end are never boundaries.
std::vector<Micros> boundaries(const GoldUtterance& utt, PhoneIndex silence);

/// Gold label sequence (gaps as silence) collapsed as in collapse().
LabelSeq gold_transcription(const GoldUtterance& utt, PhoneIndex silence);

constexpr Micros kDefaultBoundaryTolerance = 20'000;

/// Hits under a +/- tolerance window per gold boundary (inclusive).
/// Overlapping windows are split at the midpoint of adjacent gold
/// boundaries, a point exactly on the midpoint going to the earlier one.
/// Each window takes at most one prediction. Throws ValidationError on
/// unsorted input.
Count match_boundaries(std::span<const Micros> gold,
                       std::span<const Micros> pred,
                       Micros tolerance = kDefaultBoundaryTolerance);

struct BoundaryCounts {
  Count hits = 0;
  Count gold = 0;
  Count pred = 0;
  BoundaryCounts& operator+=(const BoundaryCounts& o) {
    hits += o.hits;
    gold += o.gold;
    pred += o.pred;
    return *this;
  }
};

struct BoundaryScore {
  Count hits = 0;
  Count gold_count = 0;
  Count pred_count = 0;
  // All in percent.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double over_segmentation = 0.0;  // ratio, not percent
  double r_value = 0.0;
};

/// Precision, recall, F1 and R-value from corpus-level counts. Throws
/// ValidationError when there are no gold boundaries.
BoundaryScore segmentation_scores(const BoundaryCounts& c);

}  // namespace phoneval

#endif  // PHONEVAL_METRICS_HPP
