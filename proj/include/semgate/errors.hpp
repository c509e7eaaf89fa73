#pragma once

#include <stdexcept>
#include <string>

namespace semgate {

/// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// -- vector math --------------------------------------------------------
class DimensionMismatch : public Error {
public:
  using Error::Error;
};
class ZeroVector : public Error {
public:
  using Error::Error;
};

// -- store / snapshots ---------------------------------------------------
class InvalidEntry : public Error {
public:
  using Error::Error;
};
class IoFailure : public Error {
public:
  using Error::Error;
};
class CorruptSnapshot : public Error {
public:
  using Error::Error;
};

// -- providers -----------------------------------------------------------
class EmptyText : public Error {
public:
  using Error::Error;
};
class UpstreamUnavailable : public Error {
public:
  using Error::Error;
};
class AuthFailure : public Error {
public:
  using Error::Error;
};
class SchemaError : public Error {
public:
  using Error::Error;
};

// -- engine --------------------------------------------------------------
class OutOfRange : public Error {
public:
  using Error::Error;
};
class EmbeddingFailed : public Error {
public:
  using Error::Error;
};
class UpstreamFailed : public Error {
public:
  using Error::Error;
};

// -- harness -------------------------------------------------------------
class InvalidFraction : public Error {
public:
  using Error::Error;
};
class InvalidRecord : public Error {
public:
  using Error::Error;
};
class TargetUnavailable : public Error {
public:
  using Error::Error;
};

} // namespace semgate
