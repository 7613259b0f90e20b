// Copyright 2026 The noiseinv Authors.
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

// Little-endian byte buffers shared by the checkpoint, norm-stats and corpus
// file formats.

#ifndef NOISEINV_BINARY_IO_HPP_
#define NOISEINV_BINARY_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace noiseinv {

/// Malformed, truncated or mismatched binary file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ByteWriter {
 public:
  void put_magic(std::string_view magic);
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f64(double v);
  void put_f64s(std::span<const double> vs);
  void put_string(std::string_view s);

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  void expect_magic(std::string_view magic);
  std::uint32_t get_u32();
  std::uint64_t get_u64();
  double get_f64();
  void get_f64s(std::span<double> out);
  std::string get_string();

  std::size_t remaining() const { return bytes_.size() - pos_; }
  /// Throws unless `count` more bytes are available.
  void require(std::size_t count) const;
  void expect_end() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace noiseinv

#endif  // NOISEINV_BINARY_IO_HPP_
