#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxlag {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// exprcore

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t position, std::vector<std::string> expected, const std::string &found);

    [[nodiscard]] std::size_t position() const noexcept { return position_; }
    [[nodiscard]] const std::vector<std::string> &expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::vector<std::string> expected_;
};

class UnknownFunction : public Error {
public:
    explicit UnknownFunction(std::string name);
    [[nodiscard]] const std::string &name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnboundSymbol : public Error {
public:
    explicit UnboundSymbol(std::string name);
    [[nodiscard]] const std::string &name() const noexcept { return name_; }

private:
    std::string name_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// lagrangian / dynamics

class InvalidLagrangian : public Error {
public:
    using Error::Error;
};

class DegenerateWithoutClosure : public Error {
public:
    using Error::Error;
};

class ClosureInconsistent : public Error {
public:
    using Error::Error;
};

class SingularMass : public Error {
public:
    using Error::Error;
};

class StepBlowUp : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// variational / equivalence

class BadSampling : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class GaugeDependsOnVelocity : public Error {
public:
    using Error::Error;
};

// hamiltonian

class InversionFailure : public Error {
public:
    using Error::Error;
};

class DegenerateJacobian : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

// cli

/// Scenario file does not match the schema; `field` is the dotted path of the offending entry.
class SchemaError : public Error {
public:
    SchemaError(std::string field, const std::string &problem);
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace cxlag
