#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tcdesign {

// Enumeration or search space larger than the configured budget.
class BudgetExceededError : public std::runtime_error {
 public:
  explicit BudgetExceededError(const std::string& what) : std::runtime_error(what) {}
};

// Requested construction has no members for the given parameters.
class FamilyEmptyError : public std::domain_error {
 public:
  explicit FamilyEmptyError(const std::string& what) : std::domain_error(what) {}
};

// Linear constraint failures, reported one message per constraint.
class ConstraintViolationError : public std::invalid_argument {
 public:
  explicit ConstraintViolationError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "constraint violations:";
    for (const auto& s : v) {
      out += "\n  ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

class NonEstimableError : public std::domain_error {
 public:
  explicit NonEstimableError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace tcdesign
