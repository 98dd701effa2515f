#include "sparsecert/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparsecert {

namespace {

void check_s(int s, Eigen::Index n) {
  if (s < 1 || s > n) throw std::invalid_argument("s out of range");
}

}  // namespace

double s_top_norm(const Vec& x, int s) {
  check_s(s, x.size());
  std::vector<double> mags(static_cast<size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[static_cast<size_t>(i)] = std::abs(x[i]);
  std::nth_element(mags.begin(), mags.begin() + (s - 1), mags.end(), std::greater<double>());
  return std::accumulate(mags.begin(), mags.begin() + s, 0.0);
}

double psi(const Vec& x, const SignPattern& pattern, double theta) {
  if (x.size() != pattern.n()) throw std::invalid_argument("psi: dimension mismatch");
  if (!(theta >= 1.0)) throw std::invalid_argument("psi: theta must be >= 1");
  double total = 0.0;
  for (int i = 0; i < pattern.n(); ++i) {
    total += pattern.is_plus(i) ? std::max(-x[i], theta * x[i]) : std::abs(x[i]);
  }
  return total;
}

Vec d_theta(const Vec& x, const SignPattern& pattern, double xi, double theta) {
  if (x.size() != pattern.n()) throw std::invalid_argument("d_theta: dimension mismatch");
  Vec d(x.size());
  const double c_plus = 1.0 + theta * xi;
  const double c_n = 1.0 + xi;
  for (int i = 0; i < pattern.n(); ++i) {
    d[i] = pattern.is_plus(i) ? c_plus * std::max(x[i], 0.0) : c_n * std::abs(x[i]);
  }
  return d;
}

double phi_s(const Vec& x, const SignPattern& pattern, int s, double xi, double theta) {
  check_s(s, x.size());
  return s_top_norm(d_theta(x, pattern, xi, theta), s);
}

Vec phi_argmax_vertex(const Vec& x, const SignPattern& pattern, int s, double xi, double theta) {
  check_s(s, x.size());
  const Vec gains = d_theta(x, pattern, xi, theta);
  std::vector<int> idx(static_cast<size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return gains[i] > gains[j]; });
  const double c_plus = 1.0 + theta * xi;
  const double c_n = 1.0 + xi;
  Vec u = Vec::Zero(x.size());
  for (int k = 0; k < s; ++k) {
    const int i = idx[static_cast<size_t>(k)];
    if (gains[i] <= 0.0) break;
    u[i] = pattern.is_plus(i) ? c_plus : (x[i] > 0.0 ? c_n : -c_n);
  }
  return u;
}

double mutual_incoherence(const Mat& a) {
  const int n = static_cast<int>(a.cols());
  if (n < 2) throw std::invalid_argument("mutual incoherence needs >= 2 columns");
  Vec sq(n);
  for (int j = 0; j < n; ++j) {
    sq[j] = a.col(j).squaredNorm();
    if (sq[j] <= 0.0) throw std::invalid_argument("mutual incoherence: zero column");
  }
  const Mat gram = a.transpose() * a;
  double mu = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      mu = std::max(mu, std::abs(gram(i, j)) / sq[i]);
    }
  }
  return mu;
}

BestSApprox best_s_approx(const Vec& x, int s) {
  check_s(s, x.size());
  std::vector<int> idx(static_cast<size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
    return std::abs(x[i]) > std::abs(x[j]);
  });
  BestSApprox out;
  out.ws = Vec::Zero(x.size());
  for (int k = 0; k < s; ++k) out.ws[idx[static_cast<size_t>(k)]] = x[idx[static_cast<size_t>(k)]];
  out.tail = (x - out.ws).lpNorm<1>();
  return out;
}

}  // namespace sparsecert
