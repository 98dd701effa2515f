/**
 * @file io.hpp
 * @brief File formats: matrix JSON, CSV import, sign-pattern JSON and plain
 *        vector JSON.
 *
 * The matrix document is {"m": int, "n": int, "data": row-major doubles,
 * "ensemble": string, "seed": int}.  Doubles are written in shortest
 * round-trip form, so write followed by read reproduces every entry bit for
 * bit.  Sign patterns are {"p_plus": [ints], "p_minus": [ints]} in the
 * caller's three-way orientation; normalization to the two-way form happens
 * at the problem-assembly layer, not here.
 *
 * All parsers throw std::invalid_argument with a short context-prefixed
 * message on malformed input; the JSON library stays an implementation
 * detail and never leaks through this interface.
 */

#pragma once

#include "sparsecert/types.hpp"

#include <string>
#include <vector>

namespace sparsecert {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Compact single-line JSON document in the canonical key order
/// m, n, data, ensemble, seed, terminated by a newline.
std::string matrix_to_json(const SenseMatrix& mat);

/// Requires keys m, n and data (with len(data) = m*n); ensemble and seed
/// are optional provenance defaulting to "custom" and 0.  Extra keys are
/// ignored.  The column_normalized flag is recomputed from the entries,
/// which reproduces the generator's flag exactly because generated columns
/// are normalized to within 1e-12.
SenseMatrix matrix_from_json(const std::string& text);

void write_matrix_json(const std::string& path, const SenseMatrix& mat);
SenseMatrix read_matrix_json(const std::string& path);

/// One row per line, comma-separated doubles; blank lines are skipped.
/// Rows must agree in length.
Mat matrix_from_csv(const std::string& text);

/// CSV import wrapped as a SenseMatrix with ensemble "csv" and seed 0.
SenseMatrix read_matrix_csv(const std::string& path);

/// Dispatches on the file extension: ".csv" goes through the CSV reader,
/// anything else through the JSON reader.
SenseMatrix read_matrix(const std::string& path);

/// Three-way sign restriction sets as stored on disk.  Disjointness and
/// range checks against a concrete n happen in
/// normalize_sign_restrictions, not at parse time.
struct PatternSets {
  std::vector<int> p_plus;
  std::vector<int> p_minus;
};

/// {"p_plus": [...], "p_minus": [...]}, compact, newline-terminated.
std::string pattern_to_json(const PatternSets& sets);

/// Both keys are optional (missing means empty) but no other key is
/// accepted; pattern files are written by hand, so unknown keys are
/// treated as spelling mistakes.
PatternSets pattern_from_json(const std::string& text);

void write_pattern_json(const std::string& path, const PatternSets& sets);
PatternSets read_pattern_json(const std::string& path);

/// Plain JSON array of doubles, compact, newline-terminated.
std::string vector_to_json(const Vec& x);

/// Accepts a bare array or an object wrapping one under "data".
Vec vector_from_json(const std::string& text);

void write_vector_json(const std::string& path, const Vec& x);
Vec read_vector_json(const std::string& path);

}  // namespace sparsecert
