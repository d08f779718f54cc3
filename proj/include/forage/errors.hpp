#pragma once

#include <stdexcept>
#include <string>

namespace forage {

// Error hierarchy mapped to CLI exit codes:
//   ValidationError -> 1, NumericError -> 2, IoError -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual int exit_code() const noexcept { return 2; }
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
    int exit_code() const noexcept override { return 1; }
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
    int exit_code() const noexcept override { return 2; }
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
    int exit_code() const noexcept override { return 3; }
};

// Power-method failure; carries the last L1 residual observed.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : NumericError(what), last_residual(last_residual) {}
    double last_residual;
};

}  // namespace forage
