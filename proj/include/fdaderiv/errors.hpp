#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fdaderiv {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration or precondition violation (bad parameters, malformed config).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// File or stream I/O failure, including CSV parse errors.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Numerical failure (factorization breakdown, undefined diagnostic, no valid bandwidth).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

/// The local least-squares system at an evaluation point is (near-)singular.
/// Carries the evaluation point, bandwidth and the offending eigenvalue.
class SingularDesignError : public NumericalError {
public:
    SingularDesignError(std::vector<double> point, double bandwidth, double eigenvalue);

    const std::vector<double>& point() const { return point_; }
    double bandwidth() const { return bandwidth_; }
    double eigenvalue() const { return eigenvalue_; }

private:
    std::vector<double> point_;
    double bandwidth_;
    double eigenvalue_;
};

} // namespace fdaderiv
