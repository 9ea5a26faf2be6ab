#pragma once

#include <stdexcept>
#include <string>

namespace ntree {

// Library failures carry a short machine-readable code ("empty-group",
// "cannot-split", ...) next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace ntree
