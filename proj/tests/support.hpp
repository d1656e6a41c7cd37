#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("epf_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Zeller's congruence: 0 = Monday .. 6 = Sunday.
inline int weekday_oracle(int y, int m, int d) {
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  int k = y % 100, j = y / 100;
  int h = (d + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;  // 0 = Saturday
  return (h + 5) % 7;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/**
 * Minimum of sum (y - X b)^2 + lambda |b|_1 by nested grid search: a 41-point
 * grid per coordinate around the incumbent, shrunk tenfold each round. The
 * objective is convex, so the incumbent tracks the global minimum.
 */
inline double brute_force_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                double radius = 4.0, int rounds = 7) {
  const auto p = X.cols();
  Eigen::MatrixXd G = X.transpose() * X;
  Eigen::VectorXd c = X.transpose() * y;
  double yy = y.squaredNorm();
  auto value = [&](const Eigen::VectorXd& b) { return yy - 2.0 * b.dot(c) + b.dot(G * b) + lambda * b.lpNorm<1>(); };
  Eigen::VectorXd ols = G.ldlt().solve(c);
  if (ols.allFinite()) radius = std::max(radius, 1.5 * ols.cwiseAbs().maxCoeff());
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(p);
  double best = value(centre);
  double step = radius / 20.0;
  Eigen::VectorXd b(p);
  std::vector<int> idx(static_cast<std::size_t>(p));
  for (int round = 0; round < rounds; ++round) {
    Eigen::VectorXd arg = centre;
    std::fill(idx.begin(), idx.end(), -20);
    while (true) {
      for (Eigen::Index j = 0; j < p; ++j) b(j) = centre(j) + idx[static_cast<std::size_t>(j)] * step;
      double v = value(b);
      if (v < best) {
        best = v;
        arg = b;
      }
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] > 20) idx[j++] = -20;
      if (j == idx.size()) break;
    }
    centre = arg;
    step /= 10.0;
  }
  return best;
}

}  // namespace testing
