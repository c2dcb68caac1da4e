#pragma once

#include <stdexcept>
#include <string>

namespace clear {

/// Input text or a document could not be understood.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that breaks a domain invariant (duplicate cue, unknown category...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Checkpoint was produced by a different configuration or schema.
class DigestMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backend gave up on a single building after exhausting retries. The engine
/// converts this into the item's failure penalty.
class PermanentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Backend cannot continue at all (auth rejected, endpoint unreachable after
/// retries). The run stops and leaves a resumable checkpoint.
class BackendUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuthError : public BackendUnavailable {
 public:
  using BackendUnavailable::BackendUnavailable;
};

}  // namespace clear
