#pragma once

#include <stdexcept>
#include <string>

namespace linsync {

/// The network lies outside the domain where the requested quantity exists
/// (e.g. rho(C U) >= 1 for the projected covariance series).
class ValidityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A closed-form eigenvalue sum hit a pole.
class DivergenceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Internal numerical failure: eigensolver non-convergence, indefinite
/// noise covariance, ambiguous zero-mode match.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed matrix file; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace linsync
