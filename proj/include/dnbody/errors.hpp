#pragma once

#include <stdexcept>
#include <string>

namespace dnbody {

/// Thrown when an argument violates a documented precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A configuration hit (or came within threshold of) a collision.
/// `index` is the offending time node or polygon term, depending on the caller.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, int index)
      : std::runtime_error(what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

}  // namespace dnbody
