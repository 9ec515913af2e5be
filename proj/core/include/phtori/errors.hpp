#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace phtori {

// Base of every library error. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ChecksumError : public IoError {
public:
    using IoError::IoError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Divisor below the configured floor at Fourier index k.
class ResonanceError : public NumericalError {
public:
    ResonanceError(int k, double divisor)
        : NumericalError("near-resonant divisor at k=" + std::to_string(k) +
                         " (|divisor|=" + std::to_string(divisor) + ")"),
          k_(k), divisor_(divisor) {}
    int k() const { return k_; }
    double divisor() const { return divisor_; }

private:
    int k_;
    double divisor_;
};

class TwistError : public NumericalError {
public:
    TwistError(const std::string& what, double cond)
        : NumericalError(what + " (condition number " + std::to_string(cond) + ")"),
          cond_(cond) {}
    double condition() const { return cond_; }

private:
    double cond_;
};

// Integration failure on one or more trajectories of a grid.
class FlowError : public NumericalError {
public:
    FlowError(const std::string& what, std::vector<int> indices = {})
        : NumericalError(what), indices_(std::move(indices)) {}
    const std::vector<int>& indices() const { return indices_; }

private:
    std::vector<int> indices_;
};

}  // namespace phtori
