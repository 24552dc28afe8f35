#ifndef PHONEVAL_ABX_HPP
#define PHONEVAL_ABX_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phoneval/corpus_io.hpp"
#include "phoneval/error.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace phoneval {

/// One phone occurrence with its left and right context.
struct AbxItem {
  std::string utterance;
  Micros onset = 0;
  Micros offset = 0;
  std::string phone;
  std::string prev;
  std::string next;
  std::string speaker;
};

/// One item per utterance-internal phone (both neighbours exist). Gaps
/// count as silence for context; silence itself is never a center.
std::vector<AbxItem> extract_items(const PhoneCorpus& gold,
                                   const PhonemeInventory& inv);

/// TSV with header "#file onset offset #phone prev-phone next-phone speaker".
std::string serialize_items(std::span<const AbxItem> items);
std::vector<AbxItem> parse_items(std::string_view text,
                                 const std::string& origin = "<string>");
std::vector<AbxItem> load_items(const std::filesystem::path& path);

/// Either a frames x dims matrix or a discrete unit sequence.
using Representation = std::variant<FrameMatrixd, std::vector<UnitId>>;

/// Per-utterance continuous features. On disk: a directory holding
/// `features.meta` ("dims: D", "frame_rate: R") and one `<utt>.bin` per
/// utterance with frames x dims little-endian float32, row-major.
struct FeatureSet {
  double frame_rate = 0.0;
  int dims = 0;
  std::map<std::string, FrameMatrixd> utterances;
};

FeatureSet load_features(const std::filesystem::path& dir);
void write_features(const std::filesystem::path& dir, const FeatureSet& set);

/// Frames whose center falls inside [onset, offset); the frame nearest the
/// item midpoint when none does. Empty only when the utterance has no frames.
std::pair<long, long> item_frame_range(const AbxItem& item, long num_frames,
                                       double frame_rate);

std::vector<Representation> item_representations(
    std::span<const AbxItem> items, const FeatureSet& features);
std::vector<Representation> item_representations(
    std::span<const AbxItem> items, const UnitCorpus& units);

/// Angle between two frames divided by pi, in [0, 1]. Zero vectors are at
/// 0.5 from everything except another zero vector.
template <typename DerivedA, typename DerivedB>
double angular_distance(const Eigen::MatrixBase<DerivedA>& x,
                        const Eigen::MatrixBase<DerivedB>& y) {
  // Explicit loops: the summation order must not depend on argument order
  // or alignment, or d(x, y) and d(y, x) drift apart by an ulp.
  double dot = 0, nx = 0, ny = 0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double a = x(k), b = y(k);
    dot += a * b;
    nx += a * a;
    ny += b * b;
  }
  if (nx == 0 || ny == 0) return nx == ny ? 0.0 : 0.5;
  double c = dot / (std::sqrt(nx) * std::sqrt(ny));
  // Collinear frames land a few ulps off +/-1.
  if (c > 1.0 - 1e-12) return 0.0;
  if (c < -1.0 + 1e-12) return 1.0;
  return std::acos(c) / std::numbers::pi;
}

/// DTW over angular frame distances with steps {(1,0), (0,1), (1,1)},
/// normalized by the length of the chosen path. Among equal-cost paths the
/// shortest wins, which keeps the result symmetric.
template <typename DerivedA, typename DerivedB>
double dtw_angular(const Eigen::MatrixBase<DerivedA>& x,
                   const Eigen::MatrixBase<DerivedB>& y) {
  const Eigen::Index n = x.rows(), m = y.rows();
  if (n == 0 || m == 0) throw ValidationError("dtw: empty representation");
  if (x.cols() != y.cols())
    throw ValidationError("dtw: dimension mismatch");
  std::vector<double> cost(static_cast<std::size_t>(n * m));
  std::vector<long> len(static_cast<std::size_t>(n * m));
  auto at = [m](Eigen::Index i, Eigen::Index j) {
    return static_cast<std::size_t>(i * m + j);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = angular_distance(x.row(i), y.row(j));
      if (i == 0 && j == 0) {
        cost[at(i, j)] = d;
        len[at(i, j)] = 1;
        continue;
      }
      double best_c = 0;
      long best_l = 0;
      bool have = false;
      auto consider = [&](Eigen::Index pi, Eigen::Index pj) {
        const double c = cost[at(pi, pj)];
        const long l = len[at(pi, pj)];
        if (!have || c < best_c || (c == best_c && l < best_l)) {
          best_c = c;
          best_l = l;
          have = true;
        }
      };
      if (i > 0 && j > 0) consider(i - 1, j - 1);
      if (i > 0) consider(i - 1, j);
      if (j > 0) consider(i, j - 1);
      cost[at(i, j)] = d + best_c;
      len[at(i, j)] = best_l + 1;
    }
  }
  return cost[at(n - 1, m - 1)] / static_cast<double>(len[at(n - 1, m - 1)]);
}

/// Levenshtein distance between run-length-collapsed unit sequences,
/// divided by the longer collapsed length. Strict mode returns 0 for equal
/// collapsed sequences and 1 otherwise.
double unit_sequence_distance(std::span<const UnitId> a,
                              std::span<const UnitId> b, bool strict = false);

/// Dispatches on the representation kind. Throws ValidationError on a kind
/// mismatch or an empty representation.
double distance(const Representation& x, const Representation& y,
                bool strict = false);

enum class AbxCondition { kWithin, kAcross };

std::string_view to_string(AbxCondition c);

struct AbxOptions {
  /// Cells with more triples are subsampled uniformly to this many.
  std::size_t max_triples_per_cell = 5000;
  std::uint64_t seed = 0;
  bool strict = false;
  int threads = 1;
};

/// Directed cell: A and X are `phone_a`, B is `phone_b`, all sharing the
/// context. Within: one speaker for all three. Across: A and B from
/// `speaker_ab`, X from `speaker_x`.
struct AbxCell {
  std::string phone_a;
  std::string phone_b;
  std::string prev;
  std::string next;
  std::string speaker_ab;
  std::string speaker_x;
  /// Mean triple score: 1 if d(A,X) < d(B,X), 0.5 on a tie, else 0.
  double score = 0.0;
  std::size_t triples = 0;
  bool sampled = false;
};

struct AbxResult {
  AbxCondition condition = AbxCondition::kWithin;
  std::vector<AbxCell> cells;
  /// Cells after averaging (a, b) with (b, a).
  std::size_t symmetric_cells = 0;
  /// Unweighted mean over symmetrized cells, in [0, 1].
  double score = 0.0;
  /// 100 * (1 - score).
  double error_rate() const { return 100.0 * (1.0 - score); }
};

/// `reps[i]` is the representation of `items[i]`. Throws ValidationError
/// when no valid cell exists.
AbxResult abx_score(std::span<const AbxItem> items,
                    std::span<const Representation> reps,
                    AbxCondition condition, const AbxOptions& options = {});

/// Mean of the within and across error rates, in percent.
inline double abx_summary(const AbxResult& within, const AbxResult& across) {
  return (within.error_rate() + across.error_rate()) / 2.0;
}

}  // namespace phoneval

#endif  // PHONEVAL_ABX_HPP
