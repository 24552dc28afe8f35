#ifndef PHONEVAL_ASSIGNMENT_HPP
#define PHONEVAL_ASSIGNMENT_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "phoneval/corpus_io.hpp"
#include "phoneval/framesync.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/types.hpp"

namespace phoneval {

enum class AssignmentKind { kManyToOne, kOneToOne };

std::string_view to_string(AssignmentKind k);

struct Assignment {
  AssignmentKind kind = AssignmentKind::kManyToOne;
  /// map[unit] = phone index (silence = inventory size).
  std::vector<PhoneIndex> map;
  /// sum_j counts(map[j], j); exact.
  Count objective_count = 0;
  /// objective_count / T.
  double objective = 0.0;
  /// Units that had an equally good alternative target.
  int tie_units = 0;
};

/// Result of a maximum-weight assignment on an integer matrix.
struct AssignmentSolution {
  /// col_to_row[j] is the row matched to column j, or -1.
  std::vector<int> col_to_row;
  Count value = 0;
  /// Columns whose target could be swapped without losing optimality.
  int tie_cols = 0;
};

/// Maximum-weight matching between rows and columns of a non-negative
/// integer matrix (rectangular allowed; the short side is padded with
/// zero-weight dummies). Hungarian method with integer potentials, so the
/// optimum is exact. Among all optimal matchings the one with the
/// lexicographically smallest col_to_row vector is returned.
AssignmentSolution solve_max_assignment(const CountMatrix& weights);

/// Each unit goes to its most frequent phone; ties go to the earlier phone
/// in inventory order and never-seen units go to silence.
Assignment many_to_one(const ContingencyTable& table);

/// Bijection units <-> phones + silence maximizing the summed joint
/// probability. Requires num_units == num_labels (ValidationError).
Assignment one_to_one(const ContingencyTable& table);

/// Per-frame phone stream a_t = A(u_t). Throws ValidationError on a unit
/// outside the map.
std::vector<PhoneIndex> map_units(const Assignment& a,
                                  std::span<const UnitId> units);

using AssignedCorpus = std::map<std::string, std::vector<PhoneIndex>>;

AssignedCorpus map_units(const Assignment& a, const UnitCorpus& units,
                         int threads = 1);

/// Header lines "# kind: ...", "# objective: ...", "# tie_units: ..." then
/// "unit_id\tphone_symbol" rows.
std::string assignment_tsv(const Assignment& a, const PhonemeInventory& inv);
Assignment parse_assignment_tsv(std::string_view text,
                                const PhonemeInventory& inv);

}  // namespace phoneval

#endif  // PHONEVAL_ASSIGNMENT_HPP
