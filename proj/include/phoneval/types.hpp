#ifndef PHONEVAL_TYPES_HPP
#define PHONEVAL_TYPES_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace phoneval {

/// Times are integer microseconds everywhere inside the library.
using Micros = std::int64_t;

constexpr Micros kMicrosPerSecond = 1'000'000;

using Count = std::int64_t;

/// Dense count matrix, rows = phones (inventory order, silence last),
/// columns = unit ids.
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-major frame matrix (frames x dims) for continuous representations.
template <typename Scalar>
using FrameMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using FrameMatrixd = FrameMatrix<double>;

/// Index into PhonemeInventory::symbols(); the silence index is size().
using PhoneIndex = int;
using UnitId = int;

using LabelSeq = std::vector<int>;

}  // namespace phoneval

#endif  // PHONEVAL_TYPES_HPP
