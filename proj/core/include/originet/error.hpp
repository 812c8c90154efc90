#pragma once

#include <stdexcept>
#include <string>

namespace originet {

// Error taxonomy. Every category derives from Error so callers can catch
// broadly; the CLI maps categories to exit codes (see exit_code_for).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error { public: using Error::Error; };
class StateError : public Error { public: using Error::Error; };
class NumericError : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class ArgumentError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class ProtocolError : public Error { public: using Error::Error; };

}  // namespace originet
