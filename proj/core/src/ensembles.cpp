#include "sparsecert/ensembles.hpp"

#include "sparsecert/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sparsecert {

namespace {

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

Mat column_normalized(Mat a) {
  for (int j = 0; j < a.cols(); ++j) {
    const double norm = a.col(j).norm();
    if (norm <= 0.0) throw std::runtime_error("generate: zero column before normalization");
    a.col(j) /= norm;
  }
  return a;
}

Mat take_rows(const Mat& parent, const std::vector<int>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), parent.cols());
  for (size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = parent.row(rows[r]);
  return out;
}

}  // namespace

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Rademacher: return "rademacher";
    case EnsembleKind::Gaussian: return "gaussian";
    case EnsembleKind::FourierSub: return "fourier-sub";
    case EnsembleKind::HadamardSub: return "hadamard-sub";
    case EnsembleKind::Trig: return "trig";
  }
  throw std::logic_error("unknown ensemble kind");
}

EnsembleKind ensemble_kind_from_string(std::string_view name) {
  if (name == "rademacher") return EnsembleKind::Rademacher;
  if (name == "gaussian") return EnsembleKind::Gaussian;
  if (name == "fourier-sub") return EnsembleKind::FourierSub;
  if (name == "hadamard-sub") return EnsembleKind::HadamardSub;
  if (name == "trig") return EnsembleKind::Trig;
  throw std::invalid_argument("unknown ensemble kind: " + std::string(name));
}

void EnsembleSpec::validate() const {
  if (m < 1 || n < 1) throw std::invalid_argument("ensemble: m and n must be positive");
  switch (kind) {
    case EnsembleKind::Rademacher:
    case EnsembleKind::Gaussian:
      break;
    case EnsembleKind::FourierSub:
      if (m > n) throw std::invalid_argument("fourier-sub: m must be <= n");
      break;
    case EnsembleKind::HadamardSub:
      if (m > n) throw std::invalid_argument("hadamard-sub: m must be <= n");
      if (!is_power_of_two(n)) throw std::invalid_argument("hadamard-sub: n must be a power of two");
      break;
    case EnsembleKind::Trig:
      if (d < 1) throw std::invalid_argument("trig: degree d must be >= 1");
      if (m != 2 * d + 1) throw std::invalid_argument("trig: m must equal 2d+1");
      if (n < m) throw std::invalid_argument("trig: n must be >= 2d+1");
      break;
  }
}

Mat hadamard_matrix(int n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("hadamard_matrix: n must be a power of two");
  Mat h = Mat::Ones(1, 1);
  for (int size = 1; size < n; size *= 2) {
    Mat next(2 * size, 2 * size);
    next.topLeftCorner(size, size) = h;
    next.topRightCorner(size, size) = h;
    next.bottomLeftCorner(size, size) = h;
    next.bottomRightCorner(size, size) = -h;
    h.swap(next);
  }
  return h;
}

Mat trig_rows(int rows, int n) {
  if (rows < 1 || rows > n) throw std::invalid_argument("trig_rows: rows out of range");
  Mat t(rows, n);
  for (int j = 0; j < n; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / n;
    t(0, j) = 1.0;
    for (int r = 1; r < rows; ++r) {
      const int freq = (r + 1) / 2;
      t(r, j) = (r % 2 == 1) ? std::cos(freq * phi) : std::sin(freq * phi);
    }
  }
  return t;
}

std::vector<int> sampled_row_indices(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.kind != EnsembleKind::FourierSub && spec.kind != EnsembleKind::HadamardSub) {
    throw std::invalid_argument("sampled_row_indices: only submatrix kinds sample rows");
  }
  Rng rng = Rng::stream(spec.seed, to_string(spec.kind) + "-rows");
  std::vector<int> perm(static_cast<size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int i = 0; i < spec.n - 1; ++i) {
    const int j = rng.uniform_int(i, spec.n - 1);
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  std::vector<int> rows(perm.begin(), perm.begin() + spec.m);
  std::sort(rows.begin(), rows.end());
  return rows;
}

SenseMatrix generate(const EnsembleSpec& spec) {
  spec.validate();
  SenseMatrix out;
  out.ensemble = to_string(spec.kind);
  out.seed = spec.seed;
  switch (spec.kind) {
    case EnsembleKind::Rademacher: {
      Rng rng = Rng::stream(spec.seed, "rademacher");
      Mat a(spec.m, spec.n);
      for (int i = 0; i < spec.m; ++i) {
        for (int j = 0; j < spec.n; ++j) a(i, j) = rng.sign();
      }
      // Columns of +-1 entries all have norm sqrt(m), so normalization is
      // the constant scaling and stays exactly reproducible.
      out.a = a / std::sqrt(static_cast<double>(spec.m));
      out.column_normalized = true;
      break;
    }
    case EnsembleKind::Gaussian: {
      Rng rng = Rng::stream(spec.seed, "gaussian");
      Mat a(spec.m, spec.n);
      for (int i = 0; i < spec.m; ++i) {
        for (int j = 0; j < spec.n; ++j) a(i, j) = rng.normal();
      }
      out.a = column_normalized(std::move(a));
      out.column_normalized = true;
      break;
    }
    case EnsembleKind::HadamardSub: {
      out.a = take_rows(hadamard_matrix(spec.n), sampled_row_indices(spec)) /
              std::sqrt(static_cast<double>(spec.m));
      out.column_normalized = true;
      break;
    }
    case EnsembleKind::FourierSub: {
      out.a = column_normalized(take_rows(trig_rows(spec.n, spec.n), sampled_row_indices(spec)));
      out.column_normalized = true;
      break;
    }
    case EnsembleKind::Trig: {
      out.a = trig_rows(2 * spec.d + 1, spec.n);
      out.column_normalized = false;
      break;
    }
  }
  out.validate();
  return out;
}

}  // namespace sparsecert
