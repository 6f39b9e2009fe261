#pragma once

// Shared oracles and helpers for the test suites. Everything here is
// independent of the library's own computation paths: finite differences,
// adaptive quadrature, naive statistics, Haar draws via QR.

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "bmf/rng.hpp"

namespace test_support {

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

inline double adaptive_simpson_step(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-9) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Integral over [0, inf) through the substitution x = t / (1 - t).
inline double integrate_zero_inf(const std::function<double(double)>& f, double tol = 1e-9) {
  const auto g = [&f](double t) {
    if (t >= 1.0) return 0.0;
    const double x = t / (1.0 - t);
    const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
    return f(x) * jac;
  };
  return integrate(g, 0.0, 1.0 - 1e-12, tol);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

/// Standard error of the mean for (near) independent draws.
inline double se_mean(const std::vector<double>& v) {
  return std::sqrt(variance_of(v) / static_cast<double>(v.size()));
}

/// Batch-means standard error for autocorrelated chains.
inline double se_mean_batch(const std::vector<double>& v, int n_batches = 50) {
  const std::size_t n = v.size();
  const std::size_t len = n / static_cast<std::size_t>(n_batches);
  std::vector<double> batch;
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += v[static_cast<std::size_t>(b) * len + i];
    batch.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(variance_of(batch) / static_cast<double>(n_batches));
}

inline Eigen::MatrixXd haar_matrix(int n, int k, bmf::Rng& rng) {
  Eigen::MatrixXd g(n, k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < n; ++r) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (int c = 0; c < k; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  return q;
}

inline Eigen::VectorXd random_descending(int k, bmf::Rng& rng, double scale = 3.0) {
  Eigen::VectorXd incr(k);
  for (int i = 0; i < k; ++i) incr(i) = rng.uniform() * scale / k;
  Eigen::VectorXd w(k);
  double acc = 0.0;
  for (int i = k - 1; i >= 0; --i) {
    acc += incr(i);
    w(i) = acc;
  }
  return w;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "bmf_test_XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string sub(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

}  // namespace test_support
