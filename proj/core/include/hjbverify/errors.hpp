#pragma once

#include "hjbverify/types.hpp"

#include <stdexcept>
#include <string>

namespace hjbv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (e.g. a time outside the
// support of a control).
class DomainError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Integration produced a non-finite state.
class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const { return last_valid_time_; }

 private:
  double last_valid_time_;
};

// A search would exceed its size guard.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

// f or L failed (threw or returned a non-finite value) at a sample.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Point where)
      : Error(what), where_(std::move(where)) {}
  const Point& where() const { return where_; }

 private:
  Point where_;
};

std::string describe(const Point& p);

}  // namespace hjbv
