/**
 * @file ensembles.hpp
 * @brief Seeded generators for the sensing-matrix families used in the
 * experiments, plus the deterministic trigonometric fixture.
 *
 * All randomness flows through Rng::stream(seed, purpose), so the same
 * spec reproduces the same matrix bit for bit.  Random families are
 * column-normalized; the trigonometric fixture is kept raw because its
 * properties are stated for the unnormalized polynomial values.
 */

#pragma once

#include "sparsecert/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sparsecert {

enum class EnsembleKind { Rademacher, Gaussian, FourierSub, HadamardSub, Trig };

std::string to_string(EnsembleKind kind);

/// Parses "rademacher", "gaussian", "fourier-sub", "hadamard-sub", "trig".
EnsembleKind ensemble_kind_from_string(std::string_view name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;
  int d = 0;  ///< Trig only: the polynomial degree, with m = 2d+1.

  void validate() const;
};

/// The n x n Hadamard matrix from the doubling recurrence; n a power of
/// two.  Entries are exactly +-1 and H'H = nI holds in exact arithmetic.
Mat hadamard_matrix(int n);

/// First `rows` elements of the real trigonometric system evaluated on the
/// uniform grid phi_j = 2*pi*j/n: row 0 is constant 1, rows 2i-1 and 2i
/// are cos(i*phi_j) and sin(i*phi_j).
Mat trig_rows(int rows, int n);

/// The m row indices sampled (without replacement, sorted) for the
/// submatrix kinds.  Exposed so tests can reconstruct generated matrices
/// from public pieces.
std::vector<int> sampled_row_indices(const EnsembleSpec& spec);

SenseMatrix generate(const EnsembleSpec& spec);

}  // namespace sparsecert
