#pragma once

#include <stdexcept>
#include <string>

namespace connarray {

/// Base class for every numerical failure raised by the library.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain a routine accepts (NaN/Inf, bad order, ...).
class domain_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// Evaluation at (or numerically at) a pole or logarithmic singularity.
class singularity_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// Linear system too ill-conditioned to trust.
class singular_matrix_error : public numeric_error {
public:
    singular_matrix_error(const std::string& what, double condition)
        : numeric_error(what + " (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Model whose noise correlation is not positive semidefinite, or an
/// otherwise physically inconsistent parameter set.
class model_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// Dimension mismatch between blocks of a model.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace connarray
