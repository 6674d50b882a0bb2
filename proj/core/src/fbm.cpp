#include "orthant/fbm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

#include "orthant/error.hpp"

namespace orthant {

static_assert(std::endian::native == std::endian::little, "path dumps assume a little-endian host");

double fbm_covariance(double hurst, double t, double s) {
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(std::abs(t), e) + std::pow(std::abs(s), e) - std::pow(std::abs(t - s), e));
}

double fgn_autocovariance(double hurst, long long lag) {
  const double k = std::abs(static_cast<double>(lag));
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, e) + std::pow(std::abs(k - 1.0), e) - 2.0 * std::pow(k, e));
}

FbmSampler::FbmSampler(double hurst, std::size_t n, double dt)
    : hurst_(hurst), n_(n), dt_(dt), plan_(2 * next_power_of_two(std::max<std::size_t>(n, 1))) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error(ErrorKind::InvalidModel, "fBm: H must lie in (0, 1)");
  if (n == 0) throw Error(ErrorKind::InvalidModel, "fBm: need at least one grid point");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidModel, "fBm: grid step must be positive");

  const std::size_t m = next_power_of_two(n);
  embed_size_ = 2 * m;
  std::vector<std::complex<double>> row(embed_size_);
  for (std::size_t k = 0; k <= m; ++k) row[k] = fgn_autocovariance(hurst, static_cast<long long>(k));
  for (std::size_t k = 1; k < m; ++k) row[embed_size_ - k] = row[k];
  plan_.forward(row);

  double top = 0.0;
  double bottom = std::numeric_limits<double>::infinity();
  for (const auto& z : row) {
    top = std::max(top, z.real());
    bottom = std::min(bottom, z.real());
  }
  min_ratio_ = bottom / top;

  if (bottom < -kEigTol * top) {
    if (n > kMaxCholeskyFallback) {
      throw Error(ErrorKind::NumericalFailure,
                  "fBm: circulant embedding has a negative eigenvalue and n is too large for "
                  "the Cholesky fallback");
    }
    Eigen::MatrixXd cov(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        cov(i, j) = fgn_autocovariance(hurst, static_cast<long long>(i) - static_cast<long long>(j));
      }
    }
    cholesky_ = cov.llt().matrixL();
    return;
  }

  sqrt_eigen_.resize(embed_size_);
  for (std::size_t k = 0; k < embed_size_; ++k) {
    double lambda = row[k].real();
    if (lambda < 0.0) {
      lambda = 0.0;
      ++clamped_;
    }
    sqrt_eigen_[k] = std::sqrt(lambda / static_cast<double>(embed_size_));
  }
  if (clamped_ > 0) {
    std::clog << "warning: fBm embedding clamped " << clamped_
              << " slightly negative eigenvalue(s) to zero (H=" << hurst << ", n=" << n << ")\n";
  }
}

FbmSampler::Workspace FbmSampler::make_workspace() const {
  Workspace w;
  if (uses_embedding()) {
    w.buffer.resize(embed_size_);
  } else {
    w.normals.resize(2 * n_);
  }
  return w;
}

void FbmSampler::noise_pair(RandomStream& rng, std::span<double> first, std::span<double> second,
                            Workspace& work) const {
  if (!uses_embedding()) {
    const Eigen::Index n = static_cast<Eigen::Index>(n_);
    Eigen::VectorXd z1(n), z2(n);
    for (Eigen::Index i = 0; i < n; ++i) z1(i) = rng.normal();
    for (Eigen::Index i = 0; i < n; ++i) z2(i) = rng.normal();
    const Eigen::VectorXd x1 = cholesky_.triangularView<Eigen::Lower>() * z1;
    const Eigen::VectorXd x2 = cholesky_.triangularView<Eigen::Lower>() * z2;
    std::copy(x1.data(), x1.data() + n, first.begin());
    std::copy(x2.data(), x2.data() + n, second.begin());
    return;
  }
  auto& buf = work.buffer;
  buf.resize(embed_size_);
  for (std::size_t k = 0; k < embed_size_; ++k) {
    const double re = rng.normal();
    const double im = rng.normal();
    buf[k] = {sqrt_eigen_[k] * re, sqrt_eigen_[k] * im};
  }
  plan_.forward(buf);
  for (std::size_t j = 0; j < n_; ++j) {
    first[j] = buf[j].real();
    second[j] = buf[j].imag();
  }
}

void FbmSampler::sample_pair(RandomStream& rng, std::span<double> first, std::span<double> second,
                             Workspace& work) const {
  if (first.size() < n_ || second.size() < n_) {
    throw Error(ErrorKind::InvalidModel, "fBm: output span shorter than the grid");
  }
  noise_pair(rng, first, second, work);
  const double scale = std::pow(dt_, hurst_);
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    s1 += first[j];
    s2 += second[j];
    first[j] = scale * s1;
    second[j] = scale * s2;
  }
}

void FbmSampler::sample(RandomStream& rng, std::span<double> out, Workspace& work) const {
  std::vector<double> discard(n_);
  sample_pair(rng, out, discard, work);
}

FbmPath sample_fbm(double hurst, std::size_t n, double dt, std::uint64_t seed, std::uint64_t stream) {
  const FbmSampler sampler(hurst, n, dt);
  auto work = sampler.make_workspace();
  RandomStream rng(seed, stream);
  FbmPath path{hurst, dt, std::vector<double>(n), seed, stream};
  sampler.sample(rng, path.values, work);
  return path;
}

Eigen::MatrixXd sample_correlated_fbm(const FbmSampler& sampler, const Eigen::MatrixXd& mixing,
                                      RandomStream& rng, FbmSampler::Workspace& work) {
  const Eigen::Index m = mixing.cols();
  const Eigen::Index n = static_cast<Eigen::Index>(sampler.size());
  // Row-major so each independent path is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> base(m + (m % 2), n);
  for (Eigen::Index j = 0; j < m; j += 2) {
    sampler.sample_pair(rng, {base.row(j).data(), static_cast<std::size_t>(n)},
                        {base.row(j + 1).data(), static_cast<std::size_t>(n)}, work);
  }
  return mixing * base.topRows(m);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_correlated_fbm_pair(
    const FbmSampler& sampler, const Eigen::MatrixXd& mixing, RandomStream& rng,
    FbmSampler::Workspace& work) {
  const Eigen::Index m = mixing.cols();
  const Eigen::Index n = static_cast<Eigen::Index>(sampler.size());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> first(m, n), second(m, n);
  for (Eigen::Index j = 0; j < m; ++j) {
    sampler.sample_pair(rng, {first.row(j).data(), static_cast<std::size_t>(n)},
                        {second.row(j).data(), static_cast<std::size_t>(n)}, work);
  }
  return {mixing * first, mixing * second};
}

Eigen::MatrixXd sample_correlated_fbm(double hurst, const Eigen::MatrixXd& mixing, std::size_t n,
                                      double dt, RandomStream& rng) {
  const FbmSampler sampler(hurst, n, dt);
  auto work = sampler.make_workspace();
  return sample_correlated_fbm(sampler, mixing, rng, work);
}

namespace {

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::InvalidModel, "path dump: truncated file");
  return value;
}

constexpr char kMagic[4] = {'F', 'B', 'M', 'P'};
constexpr std::uint32_t kDumpVersion = 1;

}  // namespace

void write_paths_binary(const std::string& file, double hurst, double dt, std::uint64_t seed,
                        const std::vector<std::vector<double>>& paths) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::Usage, "cannot write '" + file + "'");
  const std::uint64_t n = paths.empty() ? 0 : paths.front().size();
  out.write(kMagic, 4);
  put(out, kDumpVersion);
  put(out, hurst);
  put(out, dt);
  put(out, n);
  put(out, seed);
  put(out, static_cast<std::uint64_t>(paths.size()));
  for (const auto& p : paths) {
    if (p.size() != n) throw Error(ErrorKind::InvalidModel, "path dump: ragged paths");
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(n * sizeof(double)));
  }
}

PathDump read_paths_binary(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Usage, "cannot read '" + file + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::InvalidModel, "path dump: bad magic");
  if (get<std::uint32_t>(in) != kDumpVersion) throw Error(ErrorKind::InvalidModel, "path dump: unknown version");
  PathDump dump;
  dump.hurst = get<double>(in);
  dump.dt = get<double>(in);
  const auto n = get<std::uint64_t>(in);
  dump.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint64_t>(in);
  dump.paths.assign(count, std::vector<double>(n));
  for (auto& p : dump.paths) {
    in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorKind::InvalidModel, "path dump: truncated payload");
  }
  return dump;
}

void write_paths_csv(std::ostream& out, double dt, const std::vector<std::vector<double>>& paths) {
  out << "t";
  for (std::size_t p = 0; p < paths.size(); ++p) out << ",path_" << p;
  out << "\n" << std::setprecision(17);
  const std::size_t n = paths.empty() ? 0 : paths.front().size();
  for (std::size_t k = 0; k < n; ++k) {
    out << dt * static_cast<double>(k + 1);
    for (const auto& p : paths) out << "," << p[k];
    out << "\n";
  }
}

}  // namespace orthant
