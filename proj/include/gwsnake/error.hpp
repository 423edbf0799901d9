#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gwsnake {

// Error categories line up with the CLI exit codes.
enum class ErrorKind : int {
  kUsage = 1,
  kModel = 2,
  kVerification = 3,
  kBudget = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::kUsage, what) {}
};

struct ModelError : Error {
  explicit ModelError(const std::string& what) : Error(ErrorKind::kModel, what) {}
};

struct BudgetError : Error {
  BudgetError(const std::string& what, std::uint64_t attempts)
      : Error(ErrorKind::kBudget, what), attempts_(attempts) {}
  std::uint64_t attempts() const noexcept { return attempts_; }

 private:
  std::uint64_t attempts_;
};

// A child-count sequence that is not a Lukasiewicz path.
struct InvalidSequenceError : Error {
  InvalidSequenceError(const std::string& what, std::size_t index)
      : Error(ErrorKind::kModel, what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace gwsnake
