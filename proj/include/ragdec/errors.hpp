#pragma once

#include <stdexcept>
#include <string>

namespace ragdec {

// Error taxonomy shared across modules. The CLI maps these to exit codes:
// contract/spec/degenerate-input errors -> 1, I/O errors -> 2.

/// A caller broke a documented precondition (e.g. mismatched dimensions).
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Input is structurally valid but mathematically unusable
/// (e.g. softmax over all -inf entries).
class DegenerateInputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An experiment or world specification is inconsistent.
class SpecError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data; message carries the offending line number.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace ragdec
