#pragma once

#include <stdexcept>

namespace mtlab {

// Base for every invalid-input and validation failure. The CLI maps these
// to exit code 2; any other exception is a runtime failure (exit 1).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// corpus
struct MalformedLine : InputError { using InputError::InputError; };
struct EmptyCorpus : InputError { using InputError::InputError; };
struct WrongScheme : InputError { using InputError::InputError; };
struct NotEnoughTokens : InputError { using InputError::InputError; };
struct InconsistentDim : InputError { using InputError::InputError; };
struct UnreadableFile : InputError { using InputError::InputError; };

// tasksim
struct AlphaOutOfRange : InputError { using InputError::InputError; };
struct LengthMismatch : InputError { using InputError::InputError; };
struct EmptyInput : InputError { using InputError::InputError; };

// mtlnet
struct InvalidConfig : InputError { using InputError::InputError; };
struct UnknownTask : InputError { using InputError::InputError; };
struct ShapeMismatch : InputError { using InputError::InputError; };

// symreg
struct UnboundVariable : InputError { using InputError::InputError; };
struct ExprParseError : InputError { using InputError::InputError; };

// harness
struct TooFewRecords : InputError { using InputError::InputError; };
struct UnknownColumn : InputError { using InputError::InputError; };
struct SchemaMismatch : InputError { using InputError::InputError; };

}  // namespace mtlab
