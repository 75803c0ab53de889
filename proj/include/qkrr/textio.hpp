// Copyright 2026 The qkrr Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qkrr::textio {

/// Shortest decimal string that round-trips to the same double
/// (std::to_chars); infinities render as "inf"/"-inf".
std::string format_double(double value);

/// Strict double parse of the whole token; accepts "inf"/"-inf"/"nan".
double parse_double(std::string_view token);

/// Strict integer parse of the whole token.
long long parse_int(std::string_view token);
unsigned long long parse_uint(std::string_view token);

/// Split on a delimiter; no trimming, empty fields preserved.
std::vector<std::string> split(std::string_view line, char delim);

/// Strip leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s);

}  // namespace qkrr::textio
