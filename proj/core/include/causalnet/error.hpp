/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAUSALNET_ERROR_HPP
#define CAUSALNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace causalnet {

// Broad failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind {
  Shape,      // tensor operands do not conform
  Input,      // malformed or inconsistent data (CSV rows, records, JSON)
  Config,     // invalid configuration values or unknown keys
  Io,         // missing or unreadable files
  Numeric,    // non-finite losses/gradients, unstable processes
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

}  // namespace causalnet

#endif  // CAUSALNET_ERROR_HPP
