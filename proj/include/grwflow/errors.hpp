#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grwflow {

// Base for every error raised by the library. The CLI maps these to exit
// code 2; config problems are reported before any stepping happens.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class QuadratureError : public Error {
public:
  using Error::Error;
};

// |Du| >= rho(u) at some node: the graph stopped being spacelike.
class NotSpacelike : public Error {
public:
  NotSpacelike(std::size_t node, double x, double grad, double rho)
      : Error("not spacelike at node " + std::to_string(node) + " (x=" +
              std::to_string(x) + "): |Du|=" + std::to_string(grad) +
              " >= rho=" + std::to_string(rho)),
        node_(node), x_(x) {}

  std::size_t node() const noexcept { return node_; }
  double x() const noexcept { return x_; }

private:
  std::size_t node_;
  double x_;
};

} // namespace grwflow
