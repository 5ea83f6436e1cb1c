#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gbe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch between a problem and the data handed to it.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A caller-supplied callable broke its contract (e.g. a policy returned an
/// input outside U).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or augmentation would exceed its configured budget.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, std::size_t requested, std::size_t budget)
      : Error(what), requested_(requested), budget_(budget) {}
  std::size_t requested() const { return requested_; }
  std::size_t budget() const { return budget_; }

 private:
  std::size_t requested_;
  std::size_t budget_;
};

/// No feasible trajectory exists from the requested start.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Every state is infeasible at some stage.
class EmptyProblemError : public Error {
 public:
  EmptyProblemError(const std::string& what, int stage) : Error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbe
