#ifndef PHONEVAL_FRAMESYNC_HPP
#define PHONEVAL_FRAMESYNC_HPP

#include <string>
#include <vector>

#include "phoneval/corpus_io.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace phoneval {

/// Frame-level joint counts of (gold phone, unit) over a whole split.
/// Rows follow inventory order with silence last; columns are unit ids.
/// sum(counts) == total() always holds.
class ContingencyTable {
 public:
  ContingencyTable() = default;
  ContingencyTable(int num_labels, int num_units);
  /// Negative entries throw ValidationError.
  explicit ContingencyTable(CountMatrix counts);

  const CountMatrix& counts() const { return counts_; }
  Count total() const { return total_; }
  int num_labels() const { return static_cast<int>(counts_.rows()); }
  int num_units() const { return static_cast<int>(counts_.cols()); }

  void add(PhoneIndex phone, UnitId unit, Count n = 1) {
    counts_(phone, unit) += n;
    total_ += n;
  }

  /// count / T, materialized on demand.
  Eigen::MatrixXd joint() const;
  Eigen::Matrix<Count, Eigen::Dynamic, 1> phone_marginal() const {
    return counts_.rowwise().sum();
  }
  Eigen::Matrix<Count, 1, Eigen::Dynamic> unit_marginal() const {
    return counts_.colwise().sum();
  }

  ContingencyTable& operator+=(const ContingencyTable& other);
  bool operator==(const ContingencyTable& other) const {
    return total_ == other.total_ && counts_ == other.counts_;
  }

 private:
  CountMatrix counts_;
  Count total_ = 0;
};

/// Element-wise sum. Throws ValidationError on a dimension mismatch.
ContingencyTable merge(const ContingencyTable& a, const ContingencyTable& b);

/// Center time of frame k in microseconds: (k + 0.5) / rate.
Micros frame_center(long frame_index, double frame_rate);

/// Phone covering the frame center; silence inside gaps. Segments are
/// half-open [onset, offset), so a boundary landing exactly on a center
/// belongs to the segment that starts there. Throws ValidationError when
/// the center is at or beyond the utterance duration.
PhoneIndex frame_label(const GoldUtterance& utt, long frame_index,
                       double frame_rate, PhoneIndex silence);
PhoneIndex frame_label(const PhoneCorpus& corpus, const std::string& utt,
                       long frame_index, double frame_rate,
                       const PhonemeInventory& inv);

/// Gold label for each of `num_frames` frames. A unit stream may run at
/// most one frame longer or shorter than the gold duration implies; extra
/// frames are silence. Larger mismatches throw ValidationError.
std::vector<PhoneIndex> frame_labels(const GoldUtterance& utt,
                                     long num_frames, double frame_rate,
                                     PhoneIndex silence,
                                     const std::string& utt_id = "");

/// Accumulates counts over all utterances. Work is split into contiguous
/// utterance chunks, one table per worker, merged in chunk order, so the
/// result does not depend on `threads`.
ContingencyTable build_contingency(const PhoneCorpus& gold,
                                   const UnitCorpus& units,
                                   const PhonemeInventory& inv, int vocab_size,
                                   int threads = 1);

/// Debug dump: header "phone\t0\t1..." then one row per label.
std::string contingency_tsv(const ContingencyTable& table,
                            const PhonemeInventory& inv);

}  // namespace phoneval

#endif  // PHONEVAL_FRAMESYNC_HPP
