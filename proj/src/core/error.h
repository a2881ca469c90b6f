// Copyright 2026 The MI Observer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MIOBS_CORE_ERROR_H_
#define MIOBS_CORE_ERROR_H_

#include <stdexcept>
#include <string>

namespace miobs {

// Error categories surfaced through the C API as status codes.
enum class ErrorCode {
  kDimension = 1,
  kConfig,
  kContract,
  kParse,
  kIo,
  kTraining,
  kNotFound,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error DimensionError(const std::string& what) {
  return Error(ErrorCode::kDimension, "dimension error: " + what);
}
inline Error ConfigError(const std::string& what) {
  return Error(ErrorCode::kConfig, "config error: " + what);
}
inline Error ContractError(const std::string& what) {
  return Error(ErrorCode::kContract, "contract error: " + what);
}
inline Error ParseError(const std::string& what) {
  return Error(ErrorCode::kParse, "parse error: " + what);
}
inline Error IoError(const std::string& what) {
  return Error(ErrorCode::kIo, "io error: " + what);
}

}  // namespace miobs

#endif  // MIOBS_CORE_ERROR_H_
