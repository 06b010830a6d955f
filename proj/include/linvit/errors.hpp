#pragma once

#include <stdexcept>
#include <string>

namespace linvit {

/// Raised when inputs or parameters violate a documented precondition
/// (dimension mismatch, negative coefficient, malformed file, ...).
class ConfigurationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// KL(p || q) is infinite: p puts mass where q has none.
class DivergenceUndefinedError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ConfigurationError(what);
    }
}

}  // namespace detail
}  // namespace linvit
