#include "gendep/dataio.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace gendep {

Eigen::Index ExpressionMatrix::feature_index(const std::string& id) const {
  const auto it = std::find(feature_ids.begin(), feature_ids.end(), id);
  return it == feature_ids.end() ? -1 : it - feature_ids.begin();
}

Eigen::Index ExpressionMatrix::sample_index(const std::string& id) const {
  const auto it = std::find(sample_ids.begin(), sample_ids.end(), id);
  return it == sample_ids.end() ? -1 : it - sample_ids.begin();
}

Eigen::MatrixXd ExpressionMatrix::rows(const std::vector<std::string>& ids) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), n_samples());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Eigen::Index r = feature_index(ids[i]);
    if (r < 0) throw std::invalid_argument("unknown feature id: " + ids[i]);
    out.row(static_cast<Eigen::Index>(i)) = values.row(r);
  }
  return out;
}

void ExpressionMatrix::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(feature_ids.size()))
    throw std::invalid_argument("ExpressionMatrix: row count != feature id count");
  if (values.cols() != static_cast<Eigen::Index>(sample_ids.size()))
    throw std::invalid_argument("ExpressionMatrix: column count != sample id count");
  std::unordered_set<std::string> seen;
  for (const auto& id : feature_ids)
    if (!seen.insert(id).second) throw std::invalid_argument("ExpressionMatrix: duplicate feature id: " + id);
  seen.clear();
  for (const auto& id : sample_ids)
    if (!seen.insert(id).second) throw std::invalid_argument("ExpressionMatrix: duplicate sample id: " + id);
  if (!values.allFinite()) throw std::invalid_argument("ExpressionMatrix: non-finite values");
}

std::pair<std::string, std::string> InteractionNetwork::edge_key(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

bool InteractionNetwork::has_node(const std::string& id) const {
  return std::find(nodes.begin(), nodes.end(), id) != nodes.end();
}

bool InteractionNetwork::has_edge(const std::string& a, const std::string& b) const {
  return edges.count(edge_key(a, b)) > 0;
}

void InteractionNetwork::add_node(const std::string& id) {
  if (!has_node(id)) nodes.push_back(id);
}

void InteractionNetwork::add_edge(const std::string& a, const std::string& b) {
  if (a == b) {
    ++skipped_self_loops;
    return;
  }
  add_node(a);
  add_node(b);
  edges.insert(edge_key(a, b));
}

std::vector<std::string> InteractionNetwork::neighbors(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [a, b] : edges) {
    if (a == id) out.push_back(b);
    if (b == id) out.push_back(a);
  }
  return out;
}

}  // namespace gendep

namespace gendep::io {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

// Locale-independent decimal parse; rejects NaN/inf and trailing junk.
double parse_cell(const std::string& s, const std::filesystem::path& path, int line_no) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": non-numeric cell '" + s + "'");
  }
  return value;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable across platforms
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

ExpressionMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  strip_cr(line);
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2) throw std::runtime_error(path.string() + ":1: header must list at least one sample");

  ExpressionMatrix m;
  m.sample_ids.assign(header.begin() + 1, header.end());
  const std::size_t n_cols = m.sample_ids.size();

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_tabs(line);
    if (cells.size() != n_cols + 1) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(n_cols + 1) + " columns, got " + std::to_string(cells.size()));
    }
    m.feature_ids.push_back(cells[0]);
    std::vector<double> row(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) row[j] = parse_cell(cells[j + 1], path, line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no feature rows");

  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < n_cols; ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  m.validate();
  return m;
}

void write_matrix(const ExpressionMatrix& m, const std::filesystem::path& path) {
  m.validate();
  std::ofstream out = open_output(path);
  out << "id";
  for (const auto& s : m.sample_ids) out << '\t' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < m.n_features(); ++i) {
    out << m.feature_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.n_samples(); ++j) out << '\t' << format_double(m.values(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

InteractionNetwork read_edge_list(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  InteractionNetwork net;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_tabs(line);
    if (cells.size() != 2 || cells[0].empty() || cells[1].empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected two tab-separated node ids");
    }
    net.add_edge(cells[0], cells[1]);
  }
  return net;
}

void write_edge_list(const InteractionNetwork& net, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& [a, b] : net.edges) out << a << '\t' << b << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

PositionTable read_positions(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  PositionTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_tabs(line);
    if (cells.size() != 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected feature_id, chromosome, coordinate");
    }
    std::int64_t coord = 0;
    const auto [ptr, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), coord);
    if (ec != std::errc{} || ptr != cells[2].data() + cells[2].size() || coord < 0) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad coordinate '" + cells[2] + "'");
    }
    if (!table.entries.emplace(cells[0], PositionTable::Position{cells[1], coord}).second) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": duplicate feature id '" + cells[0] + "'");
    }
  }
  return table;
}

void write_positions(const PositionTable& table, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& [id, pos] : table.entries)
    out << id << '\t' << pos.chromosome << '\t' << pos.coordinate << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_results(const std::vector<nlohmann::json>& records, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& rec : records) out << rec.dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<nlohmann::json> read_results(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<nlohmann::json> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace gendep::io
