#pragma once

#include <stdexcept>
#include <string>

namespace seqedit {

// Base class for everything this library throws on purpose.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An edit action that cannot be applied to the sequence it was given
// (slot index out of range, gap/token arity mismatch, placeholder token
// in an insertion payload).
class malformed_action_error : public error {
public:
  using error::error;
};

// A training batch whose labels do not match its states.
class malformed_batch_error : public error {
public:
  using error::error;
};

// Oracle called on inputs that violate its contract, e.g. an insertion
// labelling request where the partial sequence is not a subsequence of
// the target.
class oracle_precondition_error : public error {
public:
  using error::error;
};

// Invalid or inconsistent configuration (empty dataset, missing level
// metadata, non-positive curriculum length, ...).
class config_error : public error {
public:
  using error::error;
};

// Input exceeds a hard model capacity such as the maximum sequence
// length supported by the position table.
class capacity_error : public error {
public:
  using error::error;
};

// Non-finite value where a finite one is required (loss, gradient).
class numeric_error : public error {
public:
  using error::error;
};

// Caller misuse of a metric or command surface (mismatched file lengths,
// empty reference list, unknown flag value).
class usage_error : public error {
public:
  using error::error;
};

// Metric mathematically undefined for the given input (empty text for
// ARI, zero variance for a correlation).
class undefined_metric_error : public error {
public:
  using error::error;
};

// Malformed input file; message carries the 1-based line number.
class parse_error : public error {
public:
  using error::error;
};

}  // namespace seqedit
