#pragma once

#include <stdexcept>
#include <string>

namespace hfdls {

/// Input outside an operation's domain (bad label, non-positive wavelength, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative numerics that did not converge or produced an inconsistent result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A root or extremum search whose bracket holds nothing to find.
class NoRootError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hfdls
