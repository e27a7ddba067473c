#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace antcsp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files; the message carries a JSON path or line/column.
class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

namespace budget {

// Global search-node cap shared by every search in the library.
// A limit of 0 means unlimited.  Usage accumulates until reset.
void set_limit(std::uint64_t limit);
std::uint64_t limit();
std::uint64_t used();
void reset_usage();

// Charges n nodes and throws BudgetExceeded once the cap is passed.
void charge(std::uint64_t n = 1);

// Installs a limit and fresh usage counter for the current scope.
class Scope {
 public:
  explicit Scope(std::uint64_t limit);
  ~Scope();
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

 private:
  std::uint64_t saved_limit_;
  std::uint64_t saved_used_;
};

}  // namespace budget
}  // namespace antcsp
