#ifndef PHONEVAL_ERROR_HPP
#define PHONEVAL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace phoneval {

/// Input is well-formed on disk but violates a contract (duplicate symbol,
/// overlapping segments, inconsistent manifest, ...). CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phoneval

#endif  // PHONEVAL_ERROR_HPP
