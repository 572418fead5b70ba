#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace homlim {

enum class ErrorKind {
  Syntax,
  NotInjective,
  CompatibilityViolation,
  UnknownSetId,
  UnknownWord,
  UndeclaredName,
  InvalidDemand,
  LevelMismatch,
  BudgetExceeded,
  SeparationFailure,
  NotComplementClosed,
  VersionMismatch,
  CorruptDump,
  Usage,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::NotInjective: return "NotInjective";
    case ErrorKind::CompatibilityViolation: return "CompatibilityViolation";
    case ErrorKind::UnknownSetId: return "UnknownSetId";
    case ErrorKind::UnknownWord: return "UnknownWord";
    case ErrorKind::UndeclaredName: return "UndeclaredName";
    case ErrorKind::InvalidDemand: return "InvalidDemand";
    case ErrorKind::LevelMismatch: return "LevelMismatch";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::SeparationFailure: return "SeparationFailure";
    case ErrorKind::NotComplementClosed: return "NotComplementClosed";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptDump: return "CorruptDump";
    case ErrorKind::Usage: return "UsageError";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Step counter shared by one top-level query. Exhaustion is an error, never a
// silently wrong answer.
class Budget {
 public:
  explicit Budget(std::uint64_t steps) : left_(steps) {}

  void charge(std::uint64_t n = 1) {
    if (n > left_) {
      left_ = 0;
      throw Error(ErrorKind::BudgetExceeded, "evaluation step budget exhausted");
    }
    left_ -= n;
  }

  std::uint64_t remaining() const noexcept { return left_; }

 private:
  std::uint64_t left_;
};

}  // namespace homlim
