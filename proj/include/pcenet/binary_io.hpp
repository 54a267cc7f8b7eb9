// SPDX-License-Identifier: Apache-2.0
//
// pcenet: position-domain channel extrapolation laboratory
// Copyright (C) 2026 pcenet developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PCENET_BINARY_IO_HPP
#define PCENET_BINARY_IO_HPP

#include "pcenet/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace pce::io
{
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

    // Append-only little-endian byte sink.
    class ByteWriter
    {
    public:
        template <typename T>
        void put(T value)
        {
            static_assert(std::is_arithmetic_v<T>);
            unsigned char raw[sizeof(T)];
            std::memcpy(raw, &value, sizeof(T));
            if constexpr (std::endian::native == std::endian::big)
                for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
                    std::swap(raw[i], raw[sizeof(T) - 1 - i]);
            bytes_.insert(bytes_.end(), raw, raw + sizeof(T));
        }

        void put_bytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

        const std::vector<unsigned char> &bytes() const { return bytes_; }

    private:
        std::vector<unsigned char> bytes_;
    };

    // Bounds-checked little-endian reader; every failure reports its offset.
    class ByteReader
    {
    public:
        explicit ByteReader(const std::vector<unsigned char> &bytes) : bytes_(bytes) {}

        template <typename T>
        T get(const char *what)
        {
            static_assert(std::is_arithmetic_v<T>);
            require(sizeof(T), what);
            unsigned char raw[sizeof(T)];
            std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
            if constexpr (std::endian::native == std::endian::big)
                for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
                    std::swap(raw[i], raw[sizeof(T) - 1 - i]);
            T value;
            std::memcpy(&value, raw, sizeof(T));
            pos_ += sizeof(T);
            return value;
        }

        std::string get_bytes(std::size_t n, const char *what)
        {
            require(n, what);
            std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
            pos_ += n;
            return s;
        }

        void require(std::uint64_t n, const char *what) const
        {
            if (n > bytes_.size() - pos_)
                throw FormatError(std::string("truncated file while reading ") + what + ": expected " +
                                      std::to_string(pos_ + n) + " bytes, file has " + std::to_string(bytes_.size()),
                                  pos_);
        }

        std::uint64_t offset() const { return pos_; }
        std::uint64_t remaining() const { return bytes_.size() - pos_; }

    private:
        const std::vector<unsigned char> &bytes_;
        std::uint64_t pos_ = 0;
    };

    std::vector<unsigned char> read_file(const std::string &path);
    void write_file(const std::string &path, const std::vector<unsigned char> &bytes);
}

#endif
