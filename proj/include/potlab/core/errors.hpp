#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace potlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CoincidentPoints : public Error {
 public:
  CoincidentPoints() : Error("kernel evaluated at coincident points") {}
};

class Unsupported : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("measures or fields live on different grids") {}
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class EmptyCarrier : public Error {
 public:
  EmptyCarrier() : Error("carrier threshold removes all mass") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SolverDiverged : public Error {
 public:
  SolverDiverged(const std::string& what, double residual, double beta_reached = 0.0)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual),
        beta_reached_(beta_reached) {}
  double residual() const { return residual_; }
  /// Last inverse temperature at which a mean-field solve converged (0 if none).
  double beta_reached() const { return beta_reached_; }

 private:
  double residual_;
  double beta_reached_;
};

class NumericLoss : public Error {
 public:
  explicit NumericLoss(int degree)
      : Error("orthogonal basis lost precision at degree " + std::to_string(degree)),
        degree_(degree) {}
  int degree() const { return degree_; }

 private:
  int degree_;
};

class ZeroAcceptance : public Error {
 public:
  explicit ZeroAcceptance(double rate)
      : Error("Metropolis acceptance collapsed to " + std::to_string(rate)), rate_(rate) {}
  double rate() const { return rate_; }

 private:
  double rate_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected)
      : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected),
        offset_(offset),
        expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

}  // namespace potlab
