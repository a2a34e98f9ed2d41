#pragma once

#include <stdexcept>
#include <string>

namespace popbias {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, empty or inconsistent input data (files, triples).
class InputError : public Error {
public:
    using Error::Error;
};

/// Parameters outside their documented domain.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Lookup of a user or item the model has never seen.
class UnknownIdError : public Error {
public:
    using Error::Error;
};

} // namespace popbias
