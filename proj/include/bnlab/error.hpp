#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bnlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (unknown name, missing parent, bad size...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A graph violated DAG invariants (self-arc, duplicate arc, cycle).
class StructuralError : public Error {
 public:
  using Error::Error;
};

class DiscretizationError : public Error {
 public:
  using Error::Error;
};

/// Run-spec / bundle / scenario file failed validation.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// The evidence has probability zero under the model.
///
/// `culprits` lists (variable, state) pairs whose removal makes the evidence
/// possible, when a diagnostic was run; it is empty otherwise.
class ImpossibleEvidence : public Error {
 public:
  explicit ImpossibleEvidence(std::string what,
                              std::vector<std::pair<std::string, std::string>> culprits = {})
      : Error(std::move(what)), culprits_(std::move(culprits)) {}

  const std::vector<std::pair<std::string, std::string>>& culprits() const noexcept {
    return culprits_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> culprits_;
};

}  // namespace bnlab
