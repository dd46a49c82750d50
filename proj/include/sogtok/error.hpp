#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sogtok {

enum class ErrorCode {
  kInvalidGraph,
  kAlreadyAugmented,
  kInvalidPermutation,
  kNodeOutOfRange,
  kGraphTooLarge,
  kSyntaxError,
  kSemanticError,
  kUnsupportedToken,
  kUnbalancedBranch,
  kUnclosedRing,
  kDimensionMismatch,
  kMissingEmbedding,
  kNoForwardState,
  kEmptyDataset,
  kNonFiniteLoss,
  kInvalidConfig,
  kCheckpointFormat,
  kDegenerateCodebook,
  kInsufficientPairs,
  kGraphTooLargeForDescription,
  kMissingText,
  kUnknownTask,
  kPolicyOnEvalSplit,
  kDegenerateLabels,
  kLengthMismatch,
  kZeroNormEntry,
  kIOFailure,
};

std::string_view error_code_name(ErrorCode code);

// Every failure surfaced by the library. `line` and `column` are 1-based and
// zero when the error has no source position; SMILES errors use `column` as
// the 0-based character offset into the string and leave `line` at zero.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0,
        std::size_t column = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ErrorCode code_;
  std::size_t line_;
  std::size_t column_;
};

// Process exit status for a library error: 1 IO, 3 numerical, 2 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace sogtok
