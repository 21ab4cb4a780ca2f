#pragma once

#include <stdexcept>
#include <string>

namespace vertiplan {

// Precondition violated by caller-supplied data (bad shapes, out-of-range cells, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents: wrong columns, bad numbers, dimension mismatch.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A document parsed fine but violates a model invariant (e.g. supply granularity).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The user plan already holds site_budget sites.
class BudgetExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vertiplan
