#pragma once

#include <stdexcept>
#include <string>

namespace macgame {

// Precondition violated by a value handed to one of the model functions.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An alpha table that gives a higher success rate at a higher data rate
// for the same payload.
class MonotonicityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Scenario document rejected by the schema. line() is 0 when unknown.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, int line = 0)
      : std::runtime_error(what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace macgame
