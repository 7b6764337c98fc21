#ifndef HORIZON_CALC_ERRORS_HPP
#define HORIZON_CALC_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcalc {

/// Bad construction input (non-positive sizes, malformed ladders, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A call whose documented precondition does not hold.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Evaluation of a B-process at a node that is not in its set.
class DomainError : public std::out_of_range {
public:
    DomainError(std::size_t scenario, std::size_t node)
        : std::out_of_range("node " + std::to_string(node) + " of scenario " +
                            std::to_string(scenario) + " is outside the set"),
          scenario_(scenario), node_(node) {}

    std::size_t scenario() const noexcept { return scenario_; }
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t scenario_;
    std::size_t node_;
};

/// Non-finite partial sum in a pathwise integral.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t scenario, std::size_t node)
        : std::runtime_error("integral diverges at node " + std::to_string(node) +
                             " of scenario " + std::to_string(scenario)),
          scenario_(scenario), node_(node) {}

    std::size_t scenario() const noexcept { return scenario_; }
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t scenario_;
    std::size_t node_;
};

}  // namespace hcalc

#endif
