#pragma once

#include <stdexcept>
#include <string>

namespace jjqj {

/// Base of all library errors. The exit code is what the CLI reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
    virtual const char* kind() const noexcept { return "error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
    const char* kind() const noexcept override { return "config"; }
};

/// Physics-domain violation, e.g. a bias current at or above the critical current.
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
    const char* kind() const noexcept override { return "domain"; }
};

class NoBracketError : public DomainError {
public:
    using DomainError::DomainError;
    const char* kind() const noexcept override { return "no_bracket"; }
};

class UnimodalSequenceError : public DomainError {
public:
    using DomainError::DomainError;
    const char* kind() const noexcept override { return "unimodal"; }
};

class DisjointSupportError : public DomainError {
public:
    using DomainError::DomainError;
    const char* kind() const noexcept override { return "disjoint_support"; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
    const char* kind() const noexcept override { return "numerical"; }
};

/// A ramp that never switched: nothing in the configuration can make it escape.
class StepCeilingError : public ConfigError {
public:
    using ConfigError::ConfigError;
    const char* kind() const noexcept override { return "step_ceiling"; }
};

}  // namespace jjqj
