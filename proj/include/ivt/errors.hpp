#ifndef IVT_ERRORS_HPP
#define IVT_ERRORS_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ivt {

/// Position inside an expression source string (1-based).
struct SourcePos {
  int line = 0;
  int col = 0;
};

/// Base class of everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax or binding error while parsing an expression.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, SourcePos where)
      : Error(msg + " at " + std::to_string(where.line) + ":" + std::to_string(where.col)),
        pos(where) {}
  SourcePos pos;
};

/// Domain error during evaluation (division by zero, ln of a nonpositive
/// value, non-finite result, ...).
class EvalError : public Error {
 public:
  explicit EvalError(const std::string& msg) : Error(msg) {}
  EvalError(const std::string& msg, SourcePos where)
      : Error(msg + " at " + std::to_string(where.line) + ":" + std::to_string(where.col)),
        pos(where) {}
  SourcePos pos;
};

/// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An iteration failed to converge (step underflow, Richardson check,
/// no contraction window, Picard stall).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The fast-time transit left the domain box before s = 1/2.
class JumpEscapeError : public Error {
 public:
  JumpEscapeError(const std::string& msg, double exit_s, Eigen::VectorXd exit_state)
      : Error(msg), s(exit_s), state(std::move(exit_state)) {}
  double s;
  Eigen::VectorXd state;
};

}  // namespace ivt

#endif
