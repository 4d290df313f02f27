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

// Length-prefixed binary framing for key and signature encodings.
// Layout: 4-byte magic, 1-byte version, then fields as u32 big-endian length
// followed by that many bytes. Counts are bare u32 big-endian.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "dpip/model.hpp"

namespace dpip::wire {

inline constexpr std::uint8_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::string_view magic) {
    out_.insert(out_.end(), magic.begin(), magic.end());
    out_.push_back(kVersion);
  }

  void U32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void Field(std::span<const std::uint8_t> bytes) {
    U32(static_cast<std::uint32_t>(bytes.size()));
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  void Field(std::string_view text) {
    Field(std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                    text.size()));
  }

  Bytes Finish() && { return std::move(out_); }

 private:
  Bytes out_;
};

// Throws Error(kMalformed) on any framing violation.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::string_view magic) : in_(in) {
    if (in_.size() < magic.size() + 1 ||
        !std::equal(magic.begin(), magic.end(), in_.begin()) ||
        in_[magic.size()] != kVersion) {
      Fail("bad magic or version");
    }
    pos_ = magic.size() + 1;
  }

  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::span<const std::uint8_t> Field() {
    std::uint32_t len = U32();
    Need(len);
    auto out = in_.subspan(pos_, len);
    pos_ += len;
    return out;
  }
  std::string Text() {
    auto f = Field();
    return std::string(f.begin(), f.end());
  }
  template <std::size_t N>
  std::array<std::uint8_t, N> Fixed() {
    auto f = Field();
    if (f.size() != N) Fail("fixed-size field has wrong length");
    std::array<std::uint8_t, N> out{};
    std::copy(f.begin(), f.end(), out.begin());
    return out;
  }
  // Remaining unread bytes must be zero.
  void Finish() const {
    if (pos_ != in_.size()) Fail("trailing bytes");
  }
  std::size_t remaining() const { return in_.size() - pos_; }

  [[noreturn]] static void Fail(const std::string& why) {
    throw Error(ErrorCode::kMalformed, "malformed encoding: " + why);
  }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) Fail("truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace dpip::wire
