#pragma once

#include <stdexcept>
#include <string>

namespace topicstream {

// Maps one-to-one onto the CLI exit codes.
enum class ErrorKind {
  kValidation = 1,
  kIo = 2,
  kInvariant = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& what) {
  return Error(ErrorKind::kValidation, what);
}
inline Error IoError(const std::string& what) {
  return Error(ErrorKind::kIo, what);
}
inline Error InvariantError(const std::string& what) {
  return Error(ErrorKind::kInvariant, what);
}

}  // namespace topicstream
