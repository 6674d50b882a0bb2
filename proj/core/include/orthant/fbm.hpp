#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orthant/fft.hpp"
#include "orthant/rng.hpp"

namespace orthant {

/// Negative circulant eigenvalues above -kEigTol * max are clamped to zero.
inline constexpr double kEigTol = 1e-8;
/// Largest n for which the dense Cholesky fallback is attempted.
inline constexpr std::size_t kMaxCholeskyFallback = 2048;

/// Cov(B_H(t), B_H(s)).
double fbm_covariance(double hurst, double t, double s);
/// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, long long lag);

struct FbmPath {
  double hurst = 0.0;
  double dt = 0.0;
  std::vector<double> values;  // B_H(k dt), k = 1..n
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Exact fBm synthesis on {dt, 2dt, ..., n dt} by circulant embedding of
/// the fractional Gaussian noise covariance (Davies-Harte / Wood-Chan).
/// One FFT yields two independent paths (real and imaginary parts).
class FbmSampler {
 public:
  struct Workspace {
    std::vector<std::complex<double>> buffer;
    std::vector<double> normals;
  };

  FbmSampler(double hurst, std::size_t n, double dt);

  double hurst() const noexcept { return hurst_; }
  std::size_t size() const noexcept { return n_; }
  double dt() const noexcept { return dt_; }
  bool uses_embedding() const noexcept { return cholesky_.size() == 0; }
  /// Smallest circulant eigenvalue over the largest, before clamping.
  double min_eigenvalue_ratio() const noexcept { return min_ratio_; }
  std::size_t clamped_eigenvalues() const noexcept { return clamped_; }

  Workspace make_workspace() const;

  /// Two independent paths from one draw of the stream.
  void sample_pair(RandomStream& rng, std::span<double> first, std::span<double> second,
                   Workspace& work) const;
  void sample(RandomStream& rng, std::span<double> out, Workspace& work) const;

 private:
  void noise_pair(RandomStream& rng, std::span<double> first, std::span<double> second,
                  Workspace& work) const;

  double hurst_;
  std::size_t n_;
  double dt_;
  std::size_t embed_size_ = 0;
  std::vector<double> sqrt_eigen_;  // sqrt(lambda_k / N)
  FftPlan plan_;
  Eigen::MatrixXd cholesky_;        // fallback factor, empty when embedding works
  double min_ratio_ = 0.0;
  std::size_t clamped_ = 0;
};

FbmPath sample_fbm(double hurst, std::size_t n, double dt, std::uint64_t seed,
                   std::uint64_t stream);

/// Rows of the result are the components of D * (m independent fBms).
Eigen::MatrixXd sample_correlated_fbm(double hurst, const Eigen::MatrixXd& mixing, std::size_t n,
                                      double dt, RandomStream& rng);
Eigen::MatrixXd sample_correlated_fbm(const FbmSampler& sampler, const Eigen::MatrixXd& mixing,
                                      RandomStream& rng, FbmSampler::Workspace& work);

/// Two independent mixed samples from one draw of the stream: component j
/// of both samples comes from the real/imaginary parts of the same FFT.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_correlated_fbm_pair(
    const FbmSampler& sampler, const Eigen::MatrixXd& mixing, RandomStream& rng,
    FbmSampler::Workspace& work);

/// Columnar binary dump: "FBMP" magic, u32 version, f64 H, f64 dt, u64 n,
/// u64 seed, u64 path count, then each path as n little-endian f64.
void write_paths_binary(const std::string& file, double hurst, double dt, std::uint64_t seed,
                        const std::vector<std::vector<double>>& paths);

struct PathDump {
  double hurst = 0.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> paths;
};
PathDump read_paths_binary(const std::string& file);

/// One row per grid time: t, path_0, path_1, ...
void write_paths_csv(std::ostream& out, double dt, const std::vector<std::vector<double>>& paths);

}  // namespace orthant
