#pragma once

#include <stdexcept>
#include <string>

namespace tfg {

struct ShapeMismatch : std::invalid_argument {
    explicit ShapeMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct AngleNearPi : std::domain_error {
    explicit AngleNearPi(const std::string& what) : std::domain_error(what) {}
};

struct SingularNu : std::domain_error {
    explicit SingularNu(const std::string& what) : std::domain_error(what) {}
};

struct FrameMismatch : std::invalid_argument {
    explicit FrameMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct SingularInnovationCovariance : std::runtime_error {
    explicit SingularInnovationCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tfg
