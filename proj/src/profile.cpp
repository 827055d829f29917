#include "rmt/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "rmt/errors.hpp"

namespace rmt {

namespace {

constexpr double kCustomTolerance = 1e-10;
constexpr double kSimpleEigenvalueTolerance = 1e-8;

std::uint64_t fnv1a(const Eigen::MatrixXd& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const unsigned char* bytes, std::size_t len) {
    for (std::size_t k = 0; k < len; ++k) {
      h ^= bytes[k];
      h *= 1099511628211ULL;
    }
  };
  const std::int64_t n = m.rows();
  mix(reinterpret_cast<const unsigned char*>(&n), sizeof n);
  mix(reinterpret_cast<const unsigned char*>(m.data()), sizeof(double) * static_cast<std::size_t>(m.size()));
  return h;
}

double max_column_residual(const Eigen::MatrixXd& s, Eigen::Index* where = nullptr) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    const double r = std::abs(s.col(j).sum() - 1.0);
    if (r > worst) {
      worst = r;
      if (where) *where = j;
    }
  }
  return worst;
}

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::flat: return "flat";
    case ProfileKind::band: return "band";
    case ProfileKind::custom: return "custom";
  }
  return "unknown";
}

VarianceProfile make_profile(Eigen::MatrixXd sigma2, ProfileKind kind, std::string description) {
  VarianceProfile p;
  const double n = static_cast<double>(sigma2.rows());
  p.c0_ = n * sigma2.maxCoeff();
  p.hash_ = fnv1a(sigma2);
  p.sigma2_ = std::move(sigma2);
  p.kind_ = kind;
  p.description_ = std::move(description);
  return p;
}

VarianceProfile flat_profile(int n) {
  if (n < 2) throw DimensionError(fmt::format("flat_profile: n must be >= 2, got {}", n));
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  return make_profile(std::move(s), ProfileKind::flat, fmt::format("flat(n={})", n));
}

BandShape indicator_shape() {
  return [](double x) { return std::abs(x) <= 1.0 ? 0.5 : 0.0; };
}

BandShape triangle_shape() {
  return [](double x) { return std::max(0.0, 1.0 - std::abs(x)); };
}

BandShape shape_by_name(const std::string& name) {
  if (name == "indicator") return indicator_shape();
  if (name == "triangle") return triangle_shape();
  throw ConfigError(fmt::format("unknown band shape '{}' (expected indicator|triangle)", name));
}

VarianceProfile band_profile(int n, int w, const BandShape& f, const std::string& shape_name) {
  if (w < 1 || n < 2 || 2 * w > n) {
    throw DimensionError(fmt::format("band_profile: need 1 <= w <= n/2, got n={} w={}", n, w));
  }
  // weight[d] is the raw variance at circulant offset d, using the symmetric
  // representative of d mod n in (-n/2, n/2].
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const int rep = (2 * d <= n) ? d : d - n;
    const double v = f(static_cast<double>(rep) / w) / w;
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError(fmt::format("band_profile: shape value {} at offset {} is not a finite nonnegative number", v, rep));
    }
    weight[static_cast<std::size_t>(d)] = v;
  }
  for (int d = 1; d < n; ++d) {
    if (weight[static_cast<std::size_t>(d)] != weight[static_cast<std::size_t>(n - d)]) {
      throw DomainError(fmt::format("band_profile: shape is not symmetric at offset {}", d));
    }
  }
  double row_sum = 0.0;
  for (double v : weight) row_sum += v;
  if (!(row_sum > 0.0)) throw DomainError("band_profile: shape vanishes on every admissible offset");

  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      s(i, j) = weight[static_cast<std::size_t>(((j - i) % n + n) % n)] / row_sum;
    }
  }
  return make_profile(std::move(s), ProfileKind::band, fmt::format("band(n={},w={},f={})", n, w, shape_name));
}

VarianceProfile custom_profile(const Eigen::MatrixXd& sigma2) {
  if (sigma2.rows() != sigma2.cols() || sigma2.rows() < 1) {
    throw DimensionError(fmt::format("custom_profile: expected a square matrix, got {}x{}", sigma2.rows(), sigma2.cols()));
  }
  for (Eigen::Index i = 0; i < sigma2.rows(); ++i) {
    for (Eigen::Index j = 0; j < sigma2.cols(); ++j) {
      if (!std::isfinite(sigma2(i, j)) || sigma2(i, j) < 0.0) {
        throw ValidationError(fmt::format("custom_profile: entry ({}, {}) = {} is not a nonnegative number", i, j, sigma2(i, j)));
      }
    }
  }
  Eigen::MatrixXd s = 0.5 * (sigma2 + sigma2.transpose());
  Eigen::Index bad = 0;
  const double residual = max_column_residual(s, &bad);
  if (residual > kCustomTolerance) {
    throw ValidationError(fmt::format("custom_profile: column {} sums to {} (residual {:.3e} > 1e-10)", bad, s.col(bad).sum(), residual));
  }
  return make_profile(std::move(s), ProfileKind::custom, fmt::format("custom(n={})", sigma2.rows()));
}

AssumptionReport assumption_report(const VarianceProfile& p) {
  AssumptionReport r;
  const auto& s = p.sigma2();
  const int n = p.n();
  r.row_sum_residual = max_column_residual(s);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  r.spectrum_of_b.assign(ev.data(), ev.data() + ev.size());

  const auto near_one = std::count_if(r.spectrum_of_b.begin(), r.spectrum_of_b.end(),
                                      [](double v) { return std::abs(v - 1.0) <= kSimpleEigenvalueTolerance; });
  r.eigenvalue_one_simple = near_one == 1;

  // Drop the top eigenvalue (the Perron eigenvalue 1) and bound the rest.
  if (n >= 2) {
    r.delta_plus = 1.0 - r.spectrum_of_b[static_cast<std::size_t>(n - 2)];
    r.delta_minus = 1.0 + r.spectrum_of_b.front();
  }
  r.c_inf = n * s.minCoeff();
  r.c_sup = n * s.maxCoeff();
  return r;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << fmt::format("{:.17g}", m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ValidationError(fmt::format("matrix file line {}: '{}' is not a number", rows.size() + 1, tok));
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("matrix file is empty");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw ValidationError(fmt::format("matrix file row {} has {} entries, expected {}", i + 1, rows[i].size(), cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open matrix file '{}'", path));
  return read_matrix(in);
}

void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write matrix file '{}'", path));
  write_matrix(out, m);
}

}  // namespace rmt
