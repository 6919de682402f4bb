// Copyright 2026 The Herdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HERDSIM_NUMFMT_H_
#define HERDSIM_NUMFMT_H_

#include <optional>
#include <string>
#include <string_view>

namespace herdsim {

// Shortest decimal text that parses back to the same double.
std::string FormatReal(double value);

// Fixed two-decimal text, as in printf("%.2f").
std::string FormatFixed2(double value);

std::optional<double> ParseReal(std::string_view text);

// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string Fnv1aHex(std::string_view bytes);

}  // namespace herdsim

#endif  // HERDSIM_NUMFMT_H_
