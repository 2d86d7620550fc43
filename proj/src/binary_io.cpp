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

#include "bmal/binary_io.hpp"

#include <fstream>
#include <iterator>

namespace bmal::io
{
    void write_file(const std::string &path, const std::vector<char> &buf_)
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw IoError("cannot open '" + path + "' for writing");
        os.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!os)
            throw IoError("write to '" + path + "' failed");
    }

    std::vector<char> read_file(const std::string &path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw IoError("cannot open '" + path + "' for reading");
        std::vector<char> data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        if (is.bad())
            throw IoError("read from '" + path + "' failed");
        return data;
    }

    ByteReader ByteReader::from_file(const std::string &path)
    {
        return ByteReader(read_file(path));
    }
}
