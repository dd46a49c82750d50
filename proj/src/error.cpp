#include "sogtok/error.hpp"

namespace sogtok {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidGraph: return "InvalidGraph";
    case ErrorCode::kAlreadyAugmented: return "AlreadyAugmented";
    case ErrorCode::kInvalidPermutation: return "InvalidPermutation";
    case ErrorCode::kNodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::kGraphTooLarge: return "GraphTooLarge";
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kSemanticError: return "SemanticError";
    case ErrorCode::kUnsupportedToken: return "UnsupportedToken";
    case ErrorCode::kUnbalancedBranch: return "UnbalancedBranch";
    case ErrorCode::kUnclosedRing: return "UnclosedRing";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kNoForwardState: return "NoForwardState";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kCheckpointFormat: return "CheckpointFormat";
    case ErrorCode::kDegenerateCodebook: return "DegenerateCodebook";
    case ErrorCode::kInsufficientPairs: return "InsufficientPairs";
    case ErrorCode::kGraphTooLargeForDescription: return "GraphTooLargeForDescription";
    case ErrorCode::kMissingText: return "MissingText";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kPolicyOnEvalSplit: return "PolicyOnEvalSplit";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kZeroNormEntry: return "ZeroNormEntry";
    case ErrorCode::kIOFailure: return "IOFailure";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message, std::size_t line,
                     std::size_t column) {
  std::string out(error_code_name(code));
  if (line > 0) {
    out += " at line " + std::to_string(line) + ", column " + std::to_string(column);
  } else if (column > 0 || code == ErrorCode::kUnsupportedToken) {
    out += " at position " + std::to_string(column);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(decorate(code, message, line, column)),
      code_(code),
      line_(line),
      column_(column) {}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIOFailure: return 1;
    case ErrorCode::kNonFiniteLoss: return 3;
    default: return 2;
  }
}

}  // namespace sogtok
