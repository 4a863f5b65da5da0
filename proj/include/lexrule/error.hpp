#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexrule {

/// Base of every error thrown by the library. The CLI maps these to exit
/// code 1 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An error tied to a location in an input file.
class DataError : public Error {
 public:
  DataError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexrule
