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

#ifndef BMAL_ERRORS_HPP
#define BMAL_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bmal
{
    // Process exit codes used by the command line tool
    enum class ExitCode : int
    {
        ok = 0,
        usage = 1,
        config = 2,
        data = 3,
        numeric = 4
    };

    // Bad argument passed to a numerical routine
    class InvalidInput : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Call sequence violated (e.g. backward before forward)
    class StateError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    // NaN or Inf detected during training or inference
    class NumericError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Configuration file problems; the message carries the field path
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &field, const std::string &what)
            : std::runtime_error(field + ": " + what), field_(field) {}
        const std::string &field() const noexcept { return field_; }

    private:
        std::string field_;
    };

    // Base for every persisted-data failure
    class DataError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class IoError : public DataError
    {
    public:
        using DataError::DataError;
    };

    // Wrong magic bytes or unsupported format version
    class FormatError : public DataError
    {
    public:
        using DataError::DataError;
    };

    class TruncationError : public DataError
    {
    public:
        TruncationError(const std::string &what, std::uint64_t offset)
            : DataError(what + " (truncated at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
        std::uint64_t offset() const noexcept { return offset_; }

    private:
        std::uint64_t offset_;
    };

    // Header and payload disagree on array sizes or label ranges
    class DimensionError : public DataError
    {
    public:
        using DataError::DataError;
    };
}

#endif
