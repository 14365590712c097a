#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maxgraph {

// Invalid input to an operation (dimension mismatch, degenerate bounds, ...).
using InvalidArgument = std::invalid_argument;

// A field violated a geometric precondition, typically the spacelike
// condition. Carries the index of the worst offending node.
class PreconditionViolation : public std::runtime_error {
public:
  PreconditionViolation(const std::string& what, std::size_t node)
      : std::runtime_error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

// Boundary data is not acausal on the grid (margin <= 0).
class AcausalityViolation : public std::runtime_error {
public:
  explicit AcausalityViolation(double margin)
      : std::runtime_error("boundary data is not acausal: mu0 = " + std::to_string(margin)),
        margin_(margin) {}
  double margin() const noexcept { return margin_; }

private:
  double margin_;
};

// The boundary barrier tangency equation has no solution for this eps.
class InfeasibleFit : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Linear solve or other internal numerical failure.
class InternalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace maxgraph
