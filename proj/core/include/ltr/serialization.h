// Copyright 2026 The ltr Authors
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

// Model files.
//
// Nets and rankers are stored as JSON. Every real is written as a C99 hex
// float string ("0x1.91eb851eb851fp+1"), so a save/load round trip is bit
// exact. A net is its NetConfig plus the flat parameter array in layer
// order (weights row-major, then biases). A ranker file bundles the
// variant tag, the widths (F, Q, K, E) and every constituent net.

#ifndef LTR_SERIALIZATION_H_
#define LTR_SERIALIZATION_H_

#include <string>

#include "json.hpp"
#include "ltr/neural.h"
#include "ltr/rankers.h"

namespace ltr {

inline constexpr int kModelFormatVersion = 1;

std::string double_to_hex(double value);
// Throws ParseError on anything strtod does not fully consume.
double hex_to_double(const std::string& text);

nlohmann::json net_to_json(const FeedForwardNet& net);
FeedForwardNet net_from_json(const nlohmann::json& j);

nlohmann::json ranker_to_json(const RankerVariant& ranker);
// Throws ParseError on a malformed document or an unsupported version.
RankerVariant ranker_from_json(const nlohmann::json& j);

void save_net(const FeedForwardNet& net, const std::string& path);
FeedForwardNet load_net(const std::string& path);
void save_ranker(const RankerVariant& ranker, const std::string& path);
RankerVariant load_ranker(const std::string& path);

// Variant, widths, net shapes and parameter counts; no parameters.
nlohmann::json ranker_metadata(const RankerVariant& ranker);

}  // namespace ltr

#endif  // LTR_SERIALIZATION_H_
