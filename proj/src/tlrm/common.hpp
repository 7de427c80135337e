#pragma once

#include <stdexcept>
#include <string>

namespace tlrm {

// Error taxonomy shared across the library. Each type maps 1:1 onto a
// status code in the public C API.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Violated call contract (e.g. backward pass from a non-scalar node).
struct ContractError : Error {
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

struct NoSpikesError : Error {
    explicit NoSpikesError(const std::string& msg) : Error(msg) {}
};

struct PlacementError : Error {
    explicit PlacementError(const std::string& msg) : Error(msg) {}
};

struct SingularityError : Error {
    explicit SingularityError(const std::string& msg) : Error(msg) {}
};

struct UnsupportedVariantError : Error {
    explicit UnsupportedVariantError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace tlrm
