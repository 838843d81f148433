#ifndef HAMEPI_ERRORS_HPP
#define HAMEPI_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hamepi {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed expression text. Carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t position)
        : Error(msg + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// A variable or parameter name is not bound in the environment.
class UnboundNameError : public Error {
public:
    explicit UnboundNameError(const std::string& name)
        : Error("unbound name '" + name + "'"), name_(name) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Division by zero during evaluation.
class DivisionByZeroError : public Error {
public:
    DivisionByZeroError() : Error("division by zero") {}
};

/// log of a non-positive value during evaluation.
class LogDomainError : public Error {
public:
    explicit LogDomainError(double argument)
        : Error("log of non-positive value " + std::to_string(argument)) {}
};

/// Invalid input: bad parameters, dimension mismatch, schema violations.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Evaluation outside the recorded open domain of a structure or solution.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Requested time lies beyond the valid horizon of an exact solution.
class HorizonError : public Error {
public:
    HorizonError(double t_requested, double t_max)
        : Error("requested time " + std::to_string(t_requested) +
                " beyond valid horizon t_max=" + std::to_string(t_max)),
          t_max_(t_max) {}
    double t_max() const { return t_max_; }

private:
    double t_max_;
};

/// Integration failure (step-size underflow). Carries the time reached.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& msg, double t_reached)
        : Error(msg + " (time reached: " + std::to_string(t_reached) + ")"),
          t_reached_(t_reached) {}
    double t_reached() const { return t_reached_; }

private:
    double t_reached_;
};

} // namespace hamepi

#endif
