#ifndef UNMIX_ERROR_HPP
#define UNMIX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace unmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad shape, range, value).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A file could not be opened, read, written or decoded.
class IoError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string &message) {
  if (!condition)
    throw ValidationError(message);
}

} // namespace detail
} // namespace unmix

#endif // UNMIX_ERROR_HPP
