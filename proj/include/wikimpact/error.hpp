#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wikimpact {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The input does not start with a bzip2 stream header ("BZh1".."BZh9").
class MalformedHeader : public Error {
 public:
  using Error::Error;
};

/// A compressed block failed to decode or its CRC did not match.
class CorruptBlock : public Error {
 public:
  CorruptBlock(std::size_t ordinal, const std::string& detail)
      : Error("corrupt bzip2 block #" + std::to_string(ordinal) + ": " + detail),
        ordinal_(ordinal) {}

  std::size_t ordinal() const noexcept { return ordinal_; }

 private:
  std::size_t ordinal_;
};

/// End of input was reached inside a "<page>" element.
class UnterminatedPage : public Error {
 public:
  using Error::Error;
};

/// A single page record exceeds the 2 GiB record limit.
class UnsplittableRecord : public Error {
 public:
  using Error::Error;
};

class EmptyDirectory : public Error {
 public:
  using Error::Error;
};

class MalformedPageXml : public Error {
 public:
  using Error::Error;
};

class FilterEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Raised when a query or regular expression fails to compile.
class InvalidExpression : public Error {
 public:
  using Error::Error;
};

class DivisionByZero : public Error {
 public:
  explicit DivisionByZero(std::int64_t subject)
      : Error("division by zero for subject " + std::to_string(subject)), subject_(subject) {}

  std::int64_t subject() const noexcept { return subject_; }

 private:
  std::int64_t subject_;
};

class EmptyCollection : public Error {
 public:
  using Error::Error;
};

class InvalidSample : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace wikimpact
