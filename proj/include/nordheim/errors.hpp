#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nordheim {

// Invalid user-supplied configuration (grid spec, run config, detector params).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a precondition of an API (length mismatch, wrong distribution kind).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// Iterative procedure failed (root bracket not found, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
public:
    ResourceError(const std::string& what, std::size_t required_bytes)
        : std::runtime_error(what), required_bytes_(required_bytes) {}

    std::size_t required_bytes() const noexcept { return required_bytes_; }

private:
    std::size_t required_bytes_;
};

}  // namespace nordheim
