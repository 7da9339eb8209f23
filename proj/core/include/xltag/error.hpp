#pragma once

#include <stdexcept>
#include <string>

namespace xltag {

// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data, bad arguments or violated preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

// Operand shapes do not satisfy an operation's rules.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string &what, int epoch, double last_finite_loss)
        : Error(what), epoch_(epoch), last_finite_loss_(last_finite_loss) {}

    int epoch() const { return epoch_; }
    double last_finite_loss() const { return last_finite_loss_; }

private:
    int epoch_;
    double last_finite_loss_;
};

}  // namespace xltag
