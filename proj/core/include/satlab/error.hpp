#pragma once

#include <stdexcept>
#include <string>

namespace satlab {

// Every failure raised by the library carries a short machine-readable code
// (e.g. "underflow", "duplicate", "unrepresentable") next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace satlab
