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

#include "colight/roadnet_io.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace colight::roadnet {
namespace {

using nlohmann::json;

// Line number (1-based) of each element in the top-level arrays of a JSON
// object document, keyed by the array's member name.
std::map<std::string, std::vector<int>> ElementLines(std::string_view text) {
  std::map<std::string, std::vector<int>> out;
  int line = 1;
  int depth = 0;
  bool in_string = false;
  bool escape = false;
  std::string token;
  std::string last_key;
  std::string array_key;
  bool expect_value = false;
  for (char ch : text) {
    if (ch == '\n') ++line;
    if (in_string) {
      if (escape) {
        escape = false;
      } else if (ch == '\\') {
        escape = true;
      } else if (ch == '"') {
        in_string = false;
        if (depth == 1) last_key = token;
      } else if (depth == 1) {
        token.push_back(ch);
      }
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') continue;
    if (depth == 2 && !array_key.empty() && expect_value && ch != ']') {
      out[array_key].push_back(line);
      expect_value = false;
    }
    switch (ch) {
      case '"':
        in_string = true;
        token.clear();
        break;
      case '{':
      case '[':
        if (depth == 1 && ch == '[') {
          array_key = last_key;
          expect_value = true;
        }
        ++depth;
        break;
      case '}':
      case ']':
        --depth;
        if (depth == 1) array_key.clear();
        break;
      case ',':
        if (depth == 2) expect_value = true;
        break;
      default:
        break;
    }
  }
  return out;
}

int LineOfByte(std::string_view text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

[[noreturn]] void Fail(int line, const std::string& msg) {
  throw NetworkError("line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T Field(const json& obj, const char* key, int line, const std::string& what) {
  if (!obj.is_object() || !obj.contains(key)) {
    Fail(line, what + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    Fail(line, what + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

RoadNetwork ParseNetworkJson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    Fail(LineOfByte(text, e.byte == 0 ? 0 : e.byte - 1),
         std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) Fail(1, "top level must be an object");
  const auto lines = ElementLines(text);
  auto line_of = [&](const std::string& key, std::size_t idx) {
    auto it = lines.find(key);
    if (it == lines.end() || idx >= it->second.size()) return 1;
    return it->second[idx];
  };
  for (const char* key : {"intersections", "lanes"}) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      Fail(1, std::string("missing array '") + key + "'");
    }
  }

  std::vector<Intersection> inters;
  const auto& jin = doc["intersections"];
  for (std::size_t i = 0; i < jin.size(); ++i) {
    const int line = line_of("intersections", i);
    const std::string what = "intersection #" + std::to_string(i);
    Intersection it;
    it.id = Field<int>(jin[i], "id", line, what);
    if (it.id != static_cast<int>(i)) {
      Fail(line, what + ": id " + std::to_string(it.id) + " out of order (expected " +
                     std::to_string(i) + ")");
    }
    it.position = {Field<double>(jin[i], "x", line, what),
                   Field<double>(jin[i], "y", line, what)};
    const auto phases = Field<json>(jin[i], "phases", line, what);
    if (!phases.is_array() || phases.empty()) Fail(line, what + ": no phases");
    std::set<std::vector<GreenMovement>> seen;
    for (std::size_t p = 0; p < phases.size(); ++p) {
      Phase phase;
      phase.id = static_cast<int>(p);
      if (phases[p].is_object() && phases[p].contains("id")) {
        phase.id = Field<int>(phases[p], "id", line, what);
      }
      const auto green = phases[p].is_object() && phases[p].contains("green")
                             ? phases[p]["green"]
                             : json::array();
      if (!green.is_array() || green.empty()) {
        Fail(line, what + ": phase " + std::to_string(p) + " has no green movements");
      }
      for (const auto& g : green) {
        try {
          phase.green.push_back(
              {ParseApproach(Field<std::string>(g, "approach", line, what)),
               ParseMovement(Field<std::string>(g, "movement", line, what))});
        } catch (const NetworkError& e) {
          if (std::string(e.what()).rfind("line ", 0) == 0) throw;
          Fail(line, what + ": " + e.what());
        }
      }
      std::sort(phase.green.begin(), phase.green.end());
      if (!seen.insert(phase.green).second) {
        Fail(line, what + ": phase " + std::to_string(p) + " duplicates an earlier phase");
      }
      it.phases.push_back(std::move(phase));
    }
    inters.push_back(std::move(it));
  }

  const int n = static_cast<int>(inters.size());
  std::vector<BoundaryNode> bounds;
  if (doc.contains("boundaries")) {
    const auto& jb = doc["boundaries"];
    for (std::size_t b = 0; b < jb.size(); ++b) {
      const int line = line_of("boundaries", b);
      const std::string what = "boundary #" + std::to_string(b);
      BoundaryNode node;
      node.id = Field<int>(jb[b], "id", line, what);
      if (node.id != n + static_cast<int>(b)) {
        Fail(line, what + ": id must be " + std::to_string(n + static_cast<int>(b)));
      }
      node.position = {Field<double>(jb[b], "x", line, what),
                       Field<double>(jb[b], "y", line, what)};
      bounds.push_back(node);
    }
  }
  const int num_nodes = n + static_cast<int>(bounds.size());

  std::vector<Lane> lanes;
  const auto& jl = doc["lanes"];
  for (std::size_t l = 0; l < jl.size(); ++l) {
    const int line = line_of("lanes", l);
    const std::string what = "lane #" + std::to_string(l);
    Lane lane;
    lane.id = Field<int>(jl[l], "id", line, what);
    if (lane.id != static_cast<int>(l)) Fail(line, what + ": id out of order");
    lane.from = Field<int>(jl[l], "from", line, what);
    lane.to = Field<int>(jl[l], "to", line, what);
    lane.length = Field<double>(jl[l], "length", line, what);
    if (!(lane.length > 0.0)) Fail(line, what + ": length must be > 0");
    for (int node : {lane.from, lane.to}) {
      if (node < 0 || node >= num_nodes) {
        Fail(line, what + ": unknown node " + std::to_string(node));
      }
    }
    try {
      lane.movement = ParseMovement(Field<std::string>(jl[l], "movement", line, what));
    } catch (const NetworkError& e) {
      if (std::string(e.what()).rfind("line ", 0) == 0) throw;
      Fail(line, what + ": " + e.what());
    }
    lanes.push_back(lane);
  }
  return RoadNetwork(std::move(inters), std::move(bounds), std::move(lanes));
}

RoadNetwork LoadNetworkFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseNetworkJson(buf.str());
}

std::string NetworkToJson(const RoadNetwork& net) {
  json doc;
  doc["intersections"] = json::array();
  for (const auto& it : net.intersections()) {
    json phases = json::array();
    for (const auto& p : it.phases) {
      json green = json::array();
      for (const auto& g : p.green) {
        green.push_back({{"approach", ToString(g.approach)},
                         {"movement", ToString(g.movement)}});
      }
      phases.push_back({{"id", p.id}, {"green", green}});
    }
    doc["intersections"].push_back(
        {{"id", it.id}, {"x", it.position.x}, {"y", it.position.y}, {"phases", phases}});
  }
  doc["boundaries"] = json::array();
  for (const auto& b : net.boundaries()) {
    doc["boundaries"].push_back({{"id", b.id}, {"x", b.position.x}, {"y", b.position.y}});
  }
  doc["lanes"] = json::array();
  for (const auto& l : net.lanes()) {
    doc["lanes"].push_back({{"id", l.id},
                            {"from", l.from},
                            {"to", l.to},
                            {"length", l.length},
                            {"movement", ToString(l.movement)}});
  }
  return doc.dump(1);
}

}  // namespace colight::roadnet
