/**
 * @file types.hpp
 * @brief Shared value types for sign-restricted sparse recovery problems.
 *
 * A problem instance is a sensing matrix together with a sign pattern that
 * partitions the coordinates into a nonnegative part and an unrestricted
 * part.  Inputs that also carry a nonpositive part are normalized up front
 * by flipping the corresponding columns, so every algorithm in this library
 * only ever sees the two-way partition.
 */

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace sparsecert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Norm used on the observation space for residual constraints.  The dual
/// norm (L1 <-> LINF) is applied to certificate columns.
enum class ResidualNorm { L1, Linf };

ResidualNorm dual_of(ResidualNorm norm);
double vector_norm(const Vec& x, ResidualNorm norm);
std::string to_string(ResidualNorm norm);

/// Parses "l1" or "linf".
ResidualNorm residual_norm_from_string(std::string_view name);

/// Two-way coordinate partition after normalization: indices in `p_plus`
/// are constrained nonnegative, indices in `p_n` are unrestricted.
/// `flipped` records which columns were negated by the normalization so
/// that recovered signals can be mapped back to the caller's orientation.
class SignPattern {
 public:
  SignPattern(int n, std::vector<int> p_plus, std::vector<int> flipped = {});

  static SignPattern unrestricted(int n);
  static SignPattern nonnegative(int n);

  int n() const { return n_; }
  const std::vector<int>& p_plus() const { return p_plus_; }
  const std::vector<int>& p_n() const { return p_n_; }
  const std::vector<int>& flipped() const { return flipped_; }
  bool is_plus(int i) const { return plus_mask_[static_cast<size_t>(i)] != 0; }
  bool all_unrestricted() const { return p_plus_.empty(); }

  /// Short tag used in reports: "unsigned", "nonneg" or "mixed".
  std::string kind() const;

  /// True if x satisfies the sign restrictions within `tol`.
  bool sign_feasible(const Vec& x, double tol = 0.0) const;

 private:
  int n_;
  std::vector<int> p_plus_;
  std::vector<int> p_n_;
  std::vector<int> flipped_;
  std::vector<std::uint8_t> plus_mask_;
};

/// Sensing matrix plus provenance.  `column_normalized` asserts unit
/// Euclidean column norms and is validated on construction.
struct SenseMatrix {
  Mat a;
  std::string ensemble = "custom";
  std::uint64_t seed = 0;
  bool column_normalized = false;

  int m() const { return static_cast<int>(a.rows()); }
  int n() const { return static_cast<int>(a.cols()); }
  void validate() const;
};

/// Parameters of a semigoodness certificate search.
struct CertParams {
  int s = 1;
  double xi = 0.9999;
  double theta = 10.0;
  double rho = kInf;
  double sigma = kInf;
  ResidualNorm residual = ResidualNorm::Linf;

  void validate(int n) const;
};

/// A sparse signal together with its declared sparsity level.
struct SparseSignal {
  Vec x;
  int s = 0;
};

struct NormalizedProblem {
  Mat a;
  SignPattern pattern;
};

/// Folds a three-way sign specification (nonnegative / nonpositive /
/// unrestricted) into the two-way form by negating the columns listed in
/// `p_minus`.  The index sets must be disjoint subsets of [0, n).
NormalizedProblem normalize_sign_restrictions(const Mat& a,
                                              const std::vector<int>& p_plus,
                                              const std::vector<int>& p_minus);

/// Maps a signal expressed in the normalized orientation back to the
/// caller's original orientation (undoes the column flips).
Vec unflip(const Vec& x, const SignPattern& pattern);

}  // namespace sparsecert
