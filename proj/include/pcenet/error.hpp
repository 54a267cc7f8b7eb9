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

#ifndef PCENET_ERROR_HPP
#define PCENET_ERROR_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace pce
{
    // Argument and shape violations are reported as std::invalid_argument.

    // Malformed binary file (dataset or checkpoint). Carries the byte offset
    // at which decoding failed.
    class FormatError : public std::runtime_error
    {
    public:
        FormatError(const std::string &what, std::uint64_t offset)
            : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
        std::uint64_t offset() const { return offset_; }

    private:
        std::uint64_t offset_;
    };

    // Operation invoked in the wrong lifecycle state (missing forward cache,
    // untrained pipeline stage, ...).
    class StateError : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    // A file could not be opened, read, or written.
    class IoError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A NaN or Inf escaped a numerical operation.
    class NumericError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Non-fatal diagnostics (out-of-box positions, degenerate charts). The
    // default sink writes to stderr; an empty function silences warnings.
    using WarningSink = std::function<void(const std::string &)>;
    void set_warning_sink(WarningSink sink);
    void warn(const std::string &message);
}

#endif
