#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wgstl/error.hpp"
#include "wgstl/graph.hpp"

namespace wgstl {

using Json = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path.string() + "'");
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

inline Json read_json_file(const std::filesystem::path& path) { return parse_json(read_text_file(path), path.string()); }

namespace detail {

// Typed access that reports the offending JSON path.
inline const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "." + key + ": missing field");
  return *it;
}

inline std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ValidationError(path + ": expected a string");
  return j.get<std::string>();
}

inline double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected a number");
  return j.get<double>();
}

inline long long as_integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
  return j.get<long long>();
}

inline const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  return j;
}

inline std::vector<std::string> string_list(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  const auto& arr = as_array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_string(arr[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> number_list(const Json& j, const std::string& path) {
  std::vector<double> out;
  const auto& arr = as_array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_number(arr[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline LatLon lat_lon(const Json& j, const std::string& path) {
  const auto v = number_list(j, path);
  if (v.size() != 2) throw ValidationError(path + ": expected [lat, lon]");
  return {v[0], v[1]};
}

}  // namespace detail

struct GraphFile {
  Graph graph;
  std::map<std::string, LatLon> coords;
};

inline GraphFile graph_from_json(const Json& j, const std::string& path = "graph") {
  using namespace detail;
  auto nodes = string_list(field(j, "nodes", path), path + ".nodes");
  std::vector<std::pair<std::string, std::string>> edges;
  const auto& ej = as_array(field(j, "edges", path), path + ".edges");
  for (std::size_t i = 0; i < ej.size(); ++i) {
    const std::string p = path + ".edges[" + std::to_string(i) + "]";
    auto pair = string_list(ej[i], p);
    if (pair.size() != 2) throw ValidationError(p + ": expected two node ids");
    edges.emplace_back(pair[0], pair[1]);
  }
  GraphFile out;
  try {
    out.graph = Graph(std::move(nodes), edges);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (auto it = j.find("coords"); it != j.end()) {
    if (!it->is_object()) throw ValidationError(path + ".coords: expected an object");
    for (auto c = it->begin(); c != it->end(); ++c) {
      if (out.graph.find(c.key()) == Graph::npos) {
        throw ValidationError(path + ".coords." + c.key() + ": not a declared node");
      }
      out.coords[c.key()] = lat_lon(c.value(), path + ".coords." + c.key());
    }
  }
  return out;
}

inline Json graph_to_json(const Graph& g, const std::map<std::string, LatLon>& coords = {}) {
  Json j;
  j["nodes"] = g.nodes();
  Json edges = Json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = edges;
  if (!coords.empty()) {
    Json c = Json::object();
    for (const auto& id : g.nodes()) {
      if (auto it = coords.find(id); it != coords.end()) c[id] = {it->second.lat_deg, it->second.lon_deg};
    }
    j["coords"] = c;
  }
  return j;
}

// Missing values are written as null.
inline Json dataset_to_json(const Dataset& ds) {
  Json j;
  j["graph"] = graph_to_json(ds.graph, ds.coords);
  j["dimensions"] = ds.dim_names;
  Json samples = Json::array();
  for (const auto& s : ds.samples) {
    Json traj = Json::object();
    for (NodeIndex v = 0; v < ds.graph.size(); ++v) {
      Json rows = Json::array();
      for (std::size_t k = 0; k < s.trajectory.length(); ++k) {
        Json row = Json::array();
        for (double x : s.trajectory.row(v, k)) {
          if (std::isnan(x)) {
            row.push_back(nullptr);
          } else {
            row.push_back(x);
          }
        }
        rows.push_back(std::move(row));
      }
      traj[ds.graph.name(v)] = std::move(rows);
    }
    samples.push_back(Json{{"label", s.label}, {"trajectory", std::move(traj)}});
  }
  j["samples"] = std::move(samples);
  return j;
}

inline Dataset dataset_from_json(const Json& j) {
  using namespace detail;
  Dataset ds;
  auto gf = graph_from_json(field(j, "graph", "$"), "$.graph");
  ds.graph = std::move(gf.graph);
  ds.coords = std::move(gf.coords);
  ds.dim_names = string_list(field(j, "dimensions", "$"), "$.dimensions");
  if (ds.dim_names.empty()) throw ValidationError("$.dimensions: need at least one dimension");
  const std::size_t d = ds.dim_names.size();
  const auto& samples = as_array(field(j, "samples", "$"), "$.samples");
  std::size_t length = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = "$.samples[" + std::to_string(i) + "]";
    const auto label = as_integer(field(samples[i], "label", sp), sp + ".label");
    if (label != 1 && label != -1) throw ValidationError(sp + ".label: must be -1 or 1");
    const auto& traj = field(samples[i], "trajectory", sp);
    if (!traj.is_object()) throw ValidationError(sp + ".trajectory: expected an object");
    for (auto it = traj.begin(); it != traj.end(); ++it) {
      if (ds.graph.find(it.key()) == Graph::npos) {
        throw ValidationError(sp + ".trajectory." + it.key() + ": not a node of the graph");
      }
    }
    Trajectory t;
    for (NodeIndex v = 0; v < ds.graph.size(); ++v) {
      const std::string np = sp + ".trajectory." + ds.graph.name(v);
      auto it = traj.find(ds.graph.name(v));
      if (it == traj.end()) throw ValidationError(np + ": missing node");
      const auto& rows = as_array(*it, np);
      if (rows.empty()) throw ValidationError(np + ": needs at least one time step");
      if (v == 0) {
        if (i == 0) length = rows.size();
        if (rows.size() != length) throw ValidationError(np + ": horizon differs from the first sample");
        t = Trajectory(ds.graph.size(), length - 1, d);
      }
      if (rows.size() != length) throw ValidationError(np + ": horizon differs from other nodes");
      for (std::size_t k = 0; k < length; ++k) {
        const std::string rp = np + "[" + std::to_string(k) + "]";
        const auto& row = as_array(rows[k], rp);
        if (row.size() != d) {
          throw ValidationError(rp + ": has " + std::to_string(row.size()) + " values, expected " + std::to_string(d));
        }
        for (std::size_t c = 0; c < d; ++c) {
          const std::string cp = rp + "[" + std::to_string(c) + "]";
          if (row[c].is_null()) {
            t.at(v, k, c) = std::numeric_limits<double>::quiet_NaN();
          } else {
            const double x = as_number(row[c], cp);
            if (!std::isfinite(x)) throw ValidationError(cp + ": not finite");
            t.at(v, k, c) = x;
          }
        }
      }
    }
    if (ds.graph.size() == 0) throw ValidationError("$.graph.nodes: graph has no nodes");
    ds.samples.push_back({std::move(t), static_cast<int>(label)});
  }
  return ds;
}

inline Dataset read_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json_file(path)); }

inline void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_text_file(path, dataset_to_json(ds).dump(1) + "\n");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

struct CsvSeries {
  std::vector<std::string> dims;
  std::vector<std::vector<double>> rows;  // NaN for empty fields
};

inline CsvSeries read_node_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  CsvSeries out;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "time") {
    throw ValidationError(path.string() + ":1: header must be time,dim_1,...,dim_d");
  }
  out.dims.assign(header.begin() + 1, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " fields");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        std::size_t used = 0;
        const double x = std::stod(cells[c], &used);
        if (used != cells[c].size() || !std::isfinite(x)) throw std::invalid_argument("bad");
        row.push_back(x);
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": '" + cells[c] + "' is not a number");
      }
    }
    out.rows.push_back(std::move(row));
  }
  if (out.rows.empty()) throw ValidationError(path.string() + ": no data rows");
  return out;
}

}  // namespace detail

// Tabular import. The manifest is a JSON object
//   { "graph": {...}, "dimensions": [...]?, "samples": [ {"label": 1, "files": {node: "a.csv"}} ] }
// and each CSV has the header time,dim_1,...,dim_d with rows in time order.
// Empty fields are missing values. Relative paths resolve against the
// manifest's directory.
inline Dataset import_tabular(const std::filesystem::path& manifest_path) {
  using namespace detail;
  const Json m = read_json_file(manifest_path);
  const auto base = manifest_path.parent_path();
  Dataset ds;
  auto gf = graph_from_json(field(m, "graph", "$"), "$.graph");
  ds.graph = std::move(gf.graph);
  ds.coords = std::move(gf.coords);
  if (auto it = m.find("dimensions"); it != m.end()) ds.dim_names = string_list(*it, "$.dimensions");
  const auto& samples = as_array(field(m, "samples", "$"), "$.samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = "$.samples[" + std::to_string(i) + "]";
    const auto label = as_integer(field(samples[i], "label", sp), sp + ".label");
    if (label != 1 && label != -1) throw ValidationError(sp + ".label: must be -1 or 1");
    const auto& files = field(samples[i], "files", sp);
    Trajectory t;
    for (NodeIndex v = 0; v < ds.graph.size(); ++v) {
      const auto& id = ds.graph.name(v);
      auto path = std::filesystem::path(as_string(field(files, id, sp + ".files"), sp + ".files." + id));
      if (path.is_relative()) path = base / path;
      auto series = read_node_csv(path);
      if (ds.dim_names.empty()) ds.dim_names = series.dims;
      if (series.dims.size() != ds.dim_names.size()) {
        throw ValidationError(path.string() + ": has " + std::to_string(series.dims.size()) +
                              " dimensions, expected " + std::to_string(ds.dim_names.size()));
      }
      if (v == 0) t = Trajectory(ds.graph.size(), series.rows.size() - 1, ds.dim_names.size());
      if (series.rows.size() != t.length()) throw ValidationError(path.string() + ": row count differs from other nodes");
      for (std::size_t k = 0; k < t.length(); ++k) {
        std::copy(series.rows[k].begin(), series.rows[k].end(), t.row(v, k).begin());
      }
    }
    ds.samples.push_back({std::move(t), static_cast<int>(label)});
  }
  ds.validate();
  return ds;
}

// Node coordinates for the radius builder: JSON {id: [lat, lon], ...} or CSV
// with header id,lat,lon. File order is kept.
inline std::vector<std::pair<std::string, LatLon>> read_coords(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, LatLon>> out;
  if (path.extension() == ".csv") {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::getline(in, line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      auto cells = detail::split_csv_line(line);
      if (cells.size() != 3) throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected id,lat,lon");
      try {
        out.emplace_back(cells[0], LatLon{std::stod(cells[1]), std::stod(cells[2])});
      } catch (const std::exception&) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": bad coordinate");
      }
    }
    return out;
  }
  const Json j = read_json_file(path);
  if (!j.is_object()) throw ValidationError(path.string() + ": expected an object of id: [lat, lon]");
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), detail::lat_lon(it.value(), "$." + it.key()));
  return out;
}

}  // namespace wgstl
