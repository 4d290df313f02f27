// Copyright 2026 The dpip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpip {

// Error kinds raised by the core. Each maps 1:1 onto a dpip_status value in
// the C API (see dpip.h), so the order here is part of the ABI.
enum class ErrorCode {
  kInvalidArgument = 1,
  kMissingAttribute,
  kDuplicateAttribute,
  kAliasCollision,
  kPredicateUnsatisfied,
  kUnknownUser,
  kUnknownResource,
  kUnknownPeer,
  kAuthFailure,
  kTpkMismatch,
  kTransport,
  kIo,
  kMalformed,
  kConfig,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dpip
