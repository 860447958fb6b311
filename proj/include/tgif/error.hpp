// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace tgif {

// Every failure carries a stable machine-readable code ("silent-source",
// "rate-mismatch", ...) next to a human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  explicit Error(std::string code) : Error(code, "error") {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace tgif
