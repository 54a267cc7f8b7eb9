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

#ifndef PCENET_ORACLES_HPP
#define PCENET_ORACLES_HPP

// Independent reference checks of the numerical core, run by `selftest` and
// the acceptance suite.

#include <cstdint>
#include <string>
#include <vector>

namespace pce
{
    struct OracleResult
    {
        int criterion = 0;
        std::string name;
        bool pass = false;
        std::string detail;
        double seconds = 0;
    };

    // Tolerances of the oracle checks.
    inline constexpr double kGradientRelTol = 1e-4;
    inline constexpr double kGradientFdStep = 1e-5;
    inline constexpr double kReceptionAbsTol = 1e-12;
    inline constexpr double kDftAbsTol = 1e-10;
    inline constexpr std::size_t kQuantizerGridPoints = 1000000;

    // Analytic backward of every layer kind against central finite
    // differences on `instances` random graphs per kind; quantize and awgn
    // must pass the upstream gradient through bit for bit.
    OracleResult gradient_oracle(std::uint64_t seed = 1, int instances = 100);

    // Noiseless pilot reception against a naive complex matmul and the
    // angular transform against an O(N^2) DFT.
    OracleResult complex_oracle(std::uint64_t seed = 1, int cases = 1000);

    // max |q(x) - clamp(x)| <= 2^-(B+1) on a dense grid and exact codeword
    // bit round trips for B in {1, 2, 4, 8}.
    OracleResult quantizer_oracle(std::uint64_t seed = 1);

    std::vector<OracleResult> run_selftest(std::uint64_t seed = 1);
}

#endif
