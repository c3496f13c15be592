// Copyright 2026 The colight-cpp Authors. All rights reserved.
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

#ifndef COLIGHT_ROADNET_IO_H_
#define COLIGHT_ROADNET_IO_H_

#include <string>
#include <string_view>

#include "colight/roadnet.h"

namespace colight::roadnet {

// Network file:
//   {"intersections": [{"id", "x", "y", "phases": [{"id", "green":
//        [{"approach": "N", "movement": "through"}, ...]}]}],
//    "boundaries": [{"id", "x", "y"}],
//    "lanes": [{"id", "from", "to", "length", "movement"}]}
// Errors carry "line N:" prefixes pointing at the offending element.
RoadNetwork ParseNetworkJson(std::string_view text);
RoadNetwork LoadNetworkFile(const std::string& path);
std::string NetworkToJson(const RoadNetwork& net);

}  // namespace colight::roadnet

#endif  // COLIGHT_ROADNET_IO_H_
