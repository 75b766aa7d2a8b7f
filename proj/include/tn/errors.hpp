#pragma once

#include <stdexcept>
#include <string>

namespace tn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidAlpha : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// The synthesized density dips to or below the positivity floor.
class PositivityViolation : public Error {
 public:
  using Error::Error;
};

class InvalidDensity : public Error {
 public:
  using Error::Error;
};

class EmptyShell : public Error {
 public:
  using Error::Error;
};

/// A proposed point had density above the rejection envelope.
class EnvelopeBreach : public Error {
 public:
  using Error::Error;
};

class RejectionStall : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InsufficientBandlimit : public Error {
 public:
  using Error::Error;
};

class ShellTooLarge : public Error {
 public:
  using Error::Error;
};

class NonpositiveVariance : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

/// A quantity that must be real carried an imaginary part above tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tn
