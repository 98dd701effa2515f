#include "sparsecert/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sparsecert {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw std::invalid_argument(context + ": " + what);
}

Json parse(const std::string& context, const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(context, e.what());
  }
}

const Json& field(const std::string& context, const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(context, std::string("missing field \"") + key + "\"");
  return *it;
}

std::vector<int> int_list(const std::string& context, const Json& node, const char* key) {
  if (!node.is_array()) fail(context, std::string("\"") + key + "\" must be an array of ints");
  std::vector<int> out;
  out.reserve(node.size());
  for (const auto& e : node) {
    if (!e.is_number_integer()) {
      fail(context, std::string("\"") + key + "\" must be an array of ints");
    }
    out.push_back(e.get<int>());
  }
  return out;
}

Vec double_list(const std::string& context, const Json& node, const char* key) {
  if (!node.is_array()) fail(context, std::string("\"") + key + "\" must be an array of numbers");
  Vec out(static_cast<Eigen::Index>(node.size()));
  Eigen::Index k = 0;
  for (const auto& e : node) {
    if (!e.is_number()) {
      fail(context, std::string("\"") + key + "\" must be an array of numbers");
    }
    out[k++] = e.get<double>();
  }
  return out;
}

bool columns_normalized(const Mat& a) {
  for (int j = 0; j < a.cols(); ++j) {
    if (std::abs(a.col(j).norm() - 1.0) > 1e-12) return false;
  }
  return true;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw std::runtime_error("error while reading: " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << text;
  out.flush();
  if (!out.good()) throw std::runtime_error("error while writing: " + path);
}

std::string matrix_to_json(const SenseMatrix& mat) {
  Json doc;
  doc["m"] = mat.m();
  doc["n"] = mat.n();
  Json data = Json::array();
  for (int i = 0; i < mat.m(); ++i) {
    for (int j = 0; j < mat.n(); ++j) data.push_back(mat.a(i, j));
  }
  doc["data"] = std::move(data);
  doc["ensemble"] = mat.ensemble;
  doc["seed"] = mat.seed;
  return doc.dump() + "\n";
}

SenseMatrix matrix_from_json(const std::string& text) {
  const std::string ctx = "matrix json";
  Json doc = parse(ctx, text);
  if (!doc.is_object()) fail(ctx, "document must be an object");

  const Json& jm = field(ctx, doc, "m");
  const Json& jn = field(ctx, doc, "n");
  if (!jm.is_number_integer() || !jn.is_number_integer()) fail(ctx, "m and n must be ints");
  const int m = jm.get<int>();
  const int n = jn.get<int>();
  if (m < 1 || n < 1) fail(ctx, "m and n must be positive");

  Vec data = double_list(ctx, field(ctx, doc, "data"), "data");
  if (data.size() != static_cast<Eigen::Index>(m) * n) {
    fail(ctx, "data length does not equal m*n");
  }

  SenseMatrix mat;
  mat.a.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) mat.a(i, j) = data[static_cast<Eigen::Index>(i) * n + j];
  }
  if (auto it = doc.find("ensemble"); it != doc.end()) {
    if (!it->is_string()) fail(ctx, "\"ensemble\" must be a string");
    mat.ensemble = it->get<std::string>();
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_integer()) fail(ctx, "\"seed\" must be an integer");
    mat.seed = it->get<std::uint64_t>();
  }
  mat.column_normalized = columns_normalized(mat.a);
  mat.validate();
  return mat;
}

void write_matrix_json(const std::string& path, const SenseMatrix& mat) {
  write_text_file(path, matrix_to_json(mat));
}

SenseMatrix read_matrix_json(const std::string& path) {
  try {
    return matrix_from_json(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

Mat matrix_from_csv(const std::string& text) {
  const std::string ctx = "matrix csv";
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(ctx, "line " + std::to_string(lineno) + ": not a number: \"" + cell + "\"");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos) {
        fail(ctx, "line " + std::to_string(lineno) + ": trailing junk: \"" + cell + "\"");
      }
      row.push_back(value);
    }
    if (row.empty()) fail(ctx, "line " + std::to_string(lineno) + ": empty row");
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ctx, "line " + std::to_string(lineno) + ": row length differs from the first row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ctx, "no rows");

  Mat a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      a(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return a;
}

SenseMatrix read_matrix_csv(const std::string& path) {
  SenseMatrix mat;
  try {
    mat.a = matrix_from_csv(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  mat.ensemble = "csv";
  mat.seed = 0;
  mat.column_normalized = columns_normalized(mat.a);
  mat.validate();
  return mat;
}

SenseMatrix read_matrix(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".csv") return read_matrix_csv(path);
  return read_matrix_json(path);
}

std::string pattern_to_json(const PatternSets& sets) {
  Json doc;
  doc["p_plus"] = sets.p_plus;
  doc["p_minus"] = sets.p_minus;
  return doc.dump() + "\n";
}

PatternSets pattern_from_json(const std::string& text) {
  const std::string ctx = "pattern json";
  Json doc = parse(ctx, text);
  if (!doc.is_object()) fail(ctx, "document must be an object");
  PatternSets sets;
  for (const auto& [key, value] : doc.items()) {
    if (key == "p_plus") {
      sets.p_plus = int_list(ctx, value, "p_plus");
    } else if (key == "p_minus") {
      sets.p_minus = int_list(ctx, value, "p_minus");
    } else {
      fail(ctx, "unknown key \"" + key + "\" (allowed: p_plus, p_minus)");
    }
  }
  return sets;
}

void write_pattern_json(const std::string& path, const PatternSets& sets) {
  write_text_file(path, pattern_to_json(sets));
}

PatternSets read_pattern_json(const std::string& path) {
  try {
    return pattern_from_json(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::string vector_to_json(const Vec& x) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) arr.push_back(x[i]);
  return arr.dump() + "\n";
}

Vec vector_from_json(const std::string& text) {
  const std::string ctx = "vector json";
  Json doc = parse(ctx, text);
  if (doc.is_object()) {
    return double_list(ctx, field(ctx, doc, "data"), "data");
  }
  return double_list(ctx, doc, "data");
}

void write_vector_json(const std::string& path, const Vec& x) {
  write_text_file(path, vector_to_json(x));
}

Vec read_vector_json(const std::string& path) {
  try {
    return vector_from_json(read_text_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace sparsecert
