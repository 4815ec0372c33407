#ifndef EVSCHED_COMMON_HPP
#define EVSCHED_COMMON_HPP

#include <stdexcept>
#include <string>

namespace evsched {

/// Thrown when an input violates a documented precondition or a file schema.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace evsched

#endif // EVSCHED_COMMON_HPP
