#pragma once

#include <stdexcept>
#include <string>

namespace xmb {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data, misaligned stores, degenerate fits (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_config(const std::string& msg);
[[noreturn]] void throw_data(const std::string& msg);

}  // namespace xmb
