#include "mse_adjust/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mse_adjust {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("graph JSON lacks \"") + key + "\"");
  }
  return j.at(key);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
      cell = cell.substr(1, cell.size() - 2);
    }
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw std::invalid_argument("data row " + std::to_string(row) + ", column " + col +
                                ": not a finite number: '" + s + "'");
  }
  return v;
}

struct ParsedGraph {
  std::vector<std::string> nodes;
  std::vector<WeightedEdge> edges;
  std::vector<bool> has_coef;
  std::string treatment;
  std::string outcome;
};

ParsedGraph parse_graph(const json& j) {
  ParsedGraph p;
  try {
    p.nodes = require(j, "nodes").get<std::vector<std::string>>();
    for (const auto& e : require(j, "edges")) {
      WeightedEdge we{e.at("from").get<std::string>(), e.at("to").get<std::string>(), 0.0};
      p.has_coef.push_back(e.contains("coef"));
      if (e.contains("coef")) we.coef = e.at("coef").get<double>();
      p.edges.push_back(std::move(we));
    }
    p.treatment = require(j, "treatment").get<std::string>();
    p.outcome = require(j, "outcome").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed graph JSON: ") + e.what());
  }
  return p;
}

}  // namespace

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
  }
}

CausalDag graph_from_json(const json& j) {
  ParsedGraph p = parse_graph(j);
  std::vector<Edge> edges;
  auto index = [&](const std::string& l) -> NodeId {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (p.nodes[i] == l) return i;
    }
    throw std::invalid_argument("edge refers to unknown node '" + l + "'");
  };
  for (const auto& e : p.edges) edges.push_back({index(e.from), index(e.to)});
  return CausalDag(std::move(p.nodes), std::move(edges), p.treatment, p.outcome);
}

LinearGaussianScm scm_from_json(const json& j) {
  ParsedGraph p = parse_graph(j);
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    if (!p.has_coef[i]) {
      throw std::invalid_argument("edge " + p.edges[i].from + " -> " + p.edges[i].to +
                                  " lacks \"coef\"");
    }
  }
  std::vector<double> noise;
  try {
    const json& nv = require(j, "noise_vars");
    for (const auto& l : p.nodes) {
      if (!nv.contains(l)) throw std::invalid_argument("no noise variance for '" + l + "'");
      noise.push_back(nv.at(l).get<double>());
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed noise_vars: ") + e.what());
  }
  return LinearGaussianScm::from_edges(std::move(p.nodes), p.edges, p.treatment, p.outcome,
                                       std::move(noise));
}

json scm_to_json(const LinearGaussianScm& m) {
  const CausalDag& g = m.dag();
  json j;
  j["nodes"] = g.labels();
  j["edges"] = json::array();
  for (const Edge& e : g.edges()) {
    j["edges"].push_back({{"from", g.label(e.from)}, {"to", g.label(e.to)},
                          {"coef", m.coef(e.from, e.to)}});
  }
  j["treatment"] = g.label(g.treatment());
  j["outcome"] = g.label(g.outcome());
  json nv = json::object();
  for (std::size_t v = 0; v < g.size(); ++v) nv[g.label(v)] = m.noise_var()[v];
  j["noise_vars"] = nv;
  return j;
}

Dataset read_dataset_csv(const std::string& path, const Dag& g) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return parse_dataset_csv(in, g);
}

Dataset parse_dataset_csv(std::istream& in, const Dag& g) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("data file is empty");
  const std::vector<std::string> header = split_csv_line(line);
  std::vector<NodeId> target(header.size());
  NodeSet seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto v = g.find(header[c]);
    if (!v) throw std::invalid_argument("data column '" + header[c] + "' is not a graph node");
    if (seen.contains(*v)) throw std::invalid_argument("duplicate data column '" + header[c] + "'");
    seen.insert(*v);
    target[c] = *v;
  }
  if (seen != g.all_nodes()) {
    throw std::invalid_argument("data lacks columns for {" + format_set(g, g.all_nodes() - seen) +
                                "}");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("data row " + std::to_string(rows.size() + 1) + " has " +
                                  std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    }
    std::vector<double> row(g.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      row[target[c]] = parse_double(cells[c], rows.size() + 1, header[c]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("data file has no rows");
  Dataset d{g.labels(), Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()),
                                        static_cast<Eigen::Index>(g.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t v = 0; v < g.size(); ++v) {
      d.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) = rows[i][v];
    }
  }
  return d;
}

void write_dataset_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t c = 0; c < d.labels.size(); ++c) out << (c ? "," : "") << d.labels[c];
  out << '\n';
  for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
    for (Eigen::Index c = 0; c < d.values.cols(); ++c) {
      out << (c ? "," : "") << format_number(d.values(i, c));
    }
    out << '\n';
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace mse_adjust
