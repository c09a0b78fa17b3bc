/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <fstream>
#include <json.hpp>

#include "causalnet/error.hpp"
#include "causalnet/granger.hpp"

namespace causalnet {
namespace {

using nlohmann::json;

json matrix_json(const Eigen::MatrixXd& m, bool as_int) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (as_int) {
        row.push_back(static_cast<int>(m(i, j)));
      } else {
        row.push_back(m(i, j));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) throw_error(ErrorKind::Input, what + " must be an " + std::to_string(n) + "x" + std::to_string(n) + " array");
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw_error(ErrorKind::Input, what + " row " + std::to_string(i) + " has wrong length");
    for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

void write_graph_set_json(const std::string& path, const CausalGraphSet& set, std::span<const std::string> airports) {
  json doc;
  doc["anchor_time"] = set.anchor;
  doc["airports"] = json(std::vector<std::string>(airports.begin(), airports.end()));
  json graphs = json::array();
  for (Scale s : kScales) {
    const auto i = static_cast<std::size_t>(s);
    graphs.push_back({{"anchor_time", set.anchor},
                      {"scale", scale_name(s)},
                      {"adjacency", matrix_json(set.graphs[i], true)},
                      {"p_values", matrix_json(set.p_values[i], false)}});
  }
  doc["graphs"] = std::move(graphs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorKind::Io, "cannot write '" + path + "'");
  out << doc.dump(1) << "\n";
}

CausalGraphSet read_graph_set_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open '" + path + "'");
  CausalGraphSet set;
  try {
    const json doc = json::parse(in);
    set.anchor = doc.at("anchor_time").get<std::size_t>();
    const std::size_t n = doc.at("airports").size();
    std::array<bool, kScaleCount> seen{};
    for (const auto& g : doc.at("graphs")) {
      const auto s = static_cast<std::size_t>(scale_from_name(g.at("scale").get<std::string>()));
      set.graphs[s] = matrix_from(g.at("adjacency"), n, "adjacency");
      set.p_values[s] = matrix_from(g.at("p_values"), n, "p_values");
      seen[s] = true;
    }
    for (std::size_t s = 0; s < kScaleCount; ++s)
      if (!seen[s]) throw_error(ErrorKind::Input, path + ": missing scale " + scale_name(kScales[s]));
  } catch (const json::exception& e) {
    throw_error(ErrorKind::Input, path + ": " + e.what());
  }
  return set;
}

}  // namespace causalnet
