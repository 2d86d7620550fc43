// SPDX-License-Identifier: Apache-2.0
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

#ifndef BMAL_BINARY_IO_HPP
#define BMAL_BINARY_IO_HPP

#include "bmal/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace bmal::io
{
    // Whole file contents; IoError if it cannot be read
    std::vector<char> read_file(const std::string &path);
    void write_file(const std::string &path, const std::vector<char> &bytes);

    // Little-endian encoder into an in-memory buffer
    class ByteWriter
    {
    public:
        void put_bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

        template <typename T>
        void put(T value)
        {
            static_assert(std::is_arithmetic_v<T>);
            using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
            static_assert(sizeof(U) == sizeof(T));
            U bits = std::bit_cast<U>(value);
            for (std::size_t i = 0; i < sizeof(U); ++i)
                buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
        }

        const std::vector<char> &bytes() const { return buf_; }
        void write_file(const std::string &path) const { io::write_file(path, buf_); }

    private:
        std::vector<char> buf_;
    };

    // Little-endian decoder; every read past the end raises TruncationError with the offset
    class ByteReader
    {
    public:
        explicit ByteReader(std::vector<char> data) : data_(std::move(data)) {}
        static ByteReader from_file(const std::string &path);

        std::string get_bytes(std::size_t n, const char *what)
        {
            require(n, what);
            std::string s(data_.data() + pos_, n);
            pos_ += n;
            return s;
        }

        template <typename T>
        T get(const char *what)
        {
            static_assert(std::is_arithmetic_v<T>);
            using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
            require(sizeof(U), what);
            U bits = 0;
            for (std::size_t i = 0; i < sizeof(U); ++i)
                bits |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
            pos_ += sizeof(U);
            return std::bit_cast<T>(bits);
        }

        std::size_t offset() const { return pos_; }
        std::size_t remaining() const { return data_.size() - pos_; }
        std::size_t size() const { return data_.size(); }

    private:
        void require(std::size_t n, const char *what) const
        {
            if (data_.size() - pos_ < n)
                throw TruncationError(std::string("unexpected end of file while reading ") + what, data_.size());
        }

        std::vector<char> data_;
        std::size_t pos_ = 0;
    };

    // 64-bit FNV-1a
    class Fnv1a
    {
    public:
        void add_bytes(const void *p, std::size_t n)
        {
            const auto *b = static_cast<const unsigned char *>(p);
            for (std::size_t i = 0; i < n; ++i)
            {
                h_ ^= b[i];
                h_ *= 0x100000001b3ULL;
            }
        }
        template <typename T>
        void add(T value)
        {
            static_assert(std::is_arithmetic_v<T>);
            ByteWriter w;
            w.put(value);
            add_bytes(w.bytes().data(), w.bytes().size());
        }
        void add(std::string_view s) { add_bytes(s.data(), s.size()); }
        std::uint64_t value() const { return h_; }

    private:
        std::uint64_t h_ = 0xcbf29ce484222325ULL;
    };

    // splitmix64 finalizer; derives independent per-item seeds from a master seed
    inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index)
    {
        std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
}

#endif
