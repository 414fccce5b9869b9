#ifndef LPCOMPACT_ERRORS_HPP_
#define LPCOMPACT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lpcompact {

/// Coordinates outside a model's chart domain (e.g. a <= 0 on the affine group).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Invalid user-supplied configuration: empty regions, p < 1, bad ladders, schema violations.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Caller broke an API precondition (mismatched grids, wrong value lengths).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace lpcompact

#endif  // LPCOMPACT_ERRORS_HPP_
