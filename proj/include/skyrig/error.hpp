#pragma once

#include <stdexcept>
#include <string>

namespace skyrig {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class PolarOrigin : public Error {
public:
  using Error::Error;
};

class OutOfFrame : public Error {
public:
  using Error::Error;
};

class OutOfBounds : public Error {
public:
  using Error::Error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class UnknownMap : public Error {
public:
  using Error::Error;
};

class MapParseError : public Error {
public:
  MapParseError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

class SensorDisabled : public Error {
public:
  using Error::Error;
};

class NotLanded : public Error {
public:
  using Error::Error;
};

class InvalidRange : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace skyrig
