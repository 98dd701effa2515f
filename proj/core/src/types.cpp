#include "sparsecert/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsecert {

ResidualNorm dual_of(ResidualNorm norm) {
  return norm == ResidualNorm::L1 ? ResidualNorm::Linf : ResidualNorm::L1;
}

double vector_norm(const Vec& x, ResidualNorm norm) {
  if (norm == ResidualNorm::L1) return x.lpNorm<1>();
  return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
}

std::string to_string(ResidualNorm norm) {
  return norm == ResidualNorm::L1 ? "l1" : "linf";
}

ResidualNorm residual_norm_from_string(std::string_view name) {
  if (name == "l1") return ResidualNorm::L1;
  if (name == "linf") return ResidualNorm::Linf;
  throw std::invalid_argument("unknown residual norm: " + std::string(name) +
                              " (expected l1 or linf)");
}

namespace {

void check_index_set(const std::vector<int>& set, int n, const char* name) {
  for (int i : set) {
    if (i < 0 || i >= n) {
      throw std::invalid_argument(std::string(name) + ": index out of range");
    }
  }
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
    throw std::invalid_argument("sign pattern: duplicate index");
  }
  return v;
}

}  // namespace

SignPattern::SignPattern(int n, std::vector<int> p_plus, std::vector<int> flipped)
    : n_(n),
      p_plus_(sorted_unique(std::move(p_plus))),
      flipped_(sorted_unique(std::move(flipped))) {
  if (n < 1) throw std::invalid_argument("sign pattern: n must be positive");
  check_index_set(p_plus_, n, "p_plus");
  check_index_set(flipped_, n, "flipped");
  plus_mask_.assign(static_cast<size_t>(n), 0);
  for (int i : p_plus_) plus_mask_[static_cast<size_t>(i)] = 1;
  p_n_.reserve(static_cast<size_t>(n) - p_plus_.size());
  for (int i = 0; i < n; ++i) {
    if (!plus_mask_[static_cast<size_t>(i)]) p_n_.push_back(i);
  }
}

SignPattern SignPattern::unrestricted(int n) { return SignPattern(n, {}); }

SignPattern SignPattern::nonnegative(int n) {
  std::vector<int> all(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<size_t>(i)] = i;
  return SignPattern(n, std::move(all));
}

std::string SignPattern::kind() const {
  if (p_plus_.empty()) return "unsigned";
  if (p_n_.empty()) return "nonneg";
  return "mixed";
}

bool SignPattern::sign_feasible(const Vec& x, double tol) const {
  if (x.size() != n_) return false;
  for (int i : p_plus_) {
    if (x[i] < -tol) return false;
  }
  return true;
}

void SenseMatrix::validate() const {
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument("sense matrix: empty");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("sense matrix: non-finite entry");
  }
  if (column_normalized) {
    for (int j = 0; j < a.cols(); ++j) {
      if (std::abs(a.col(j).norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("sense matrix: column norm differs from 1");
      }
    }
  }
}

void CertParams::validate(int n) const {
  if (s < 1 || s > n) throw std::invalid_argument("cert params: s out of range");
  if (!(xi > 0.0 && xi < 1.0)) throw std::invalid_argument("cert params: xi must lie in (0,1)");
  if (!(theta >= 1.0)) throw std::invalid_argument("cert params: theta must be >= 1");
  if (!(rho > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("cert params: rho and sigma must be positive");
  }
}

NormalizedProblem normalize_sign_restrictions(const Mat& a,
                                              const std::vector<int>& p_plus,
                                              const std::vector<int>& p_minus) {
  const int n = static_cast<int>(a.cols());
  std::vector<int> plus = p_plus;
  std::vector<int> minus = p_minus;
  check_index_set(plus, n, "p_plus");
  check_index_set(minus, n, "p_minus");
  std::vector<std::uint8_t> seen(static_cast<size_t>(n), 0);
  for (int i : plus) seen[static_cast<size_t>(i)] = 1;
  for (int i : minus) {
    if (seen[static_cast<size_t>(i)]) {
      throw std::invalid_argument("normalize: p_plus and p_minus overlap");
    }
  }
  Mat out = a;
  for (int i : minus) {
    out.col(i) = -out.col(i);
    plus.push_back(i);
  }
  return NormalizedProblem{std::move(out), SignPattern(n, std::move(plus), std::move(minus))};
}

Vec unflip(const Vec& x, const SignPattern& pattern) {
  Vec out = x;
  for (int i : pattern.flipped()) out[i] = -out[i];
  return out;
}

}  // namespace sparsecert
