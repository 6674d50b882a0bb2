#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace orthant {

/// Relative eigenvalue floor used by the positive-definiteness check.
inline constexpr double kCondTol = 1e-12;

/// A problem instance: X(t) = A B_H(t), drift mu, threshold direction nu.
///
/// Immutable once built. Sigma is always stored, symmetrized; the mixing
/// matrix A is kept only when the caller supplied it (simulation then uses
/// A directly, otherwise the Cholesky factor of Sigma).
class ModelSpec {
 public:
  static ModelSpec from_sigma(double hurst, Eigen::MatrixXd sigma, Eigen::VectorXd mu,
                              Eigen::VectorXd nu);
  static ModelSpec from_mixing(double hurst, Eigen::MatrixXd mixing, Eigen::VectorXd mu,
                               Eigen::VectorXd nu);

  double hurst() const noexcept { return hurst_; }
  int dim() const noexcept { return static_cast<int>(mu_.size()); }
  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const std::optional<Eigen::MatrixXd>& mixing() const noexcept { return mixing_; }
  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::VectorXd& nu() const noexcept { return nu_; }

  /// H == 1/2: valid for simulation, rejected by the asymptotic formula.
  bool is_brownian() const noexcept { return hurst_ == 0.5; }

  /// Matrix L with L L^T = Sigma used to mix independent fBm components.
  Eigen::MatrixXd factor() const;

  /// b(t) = nu + mu t.
  Eigen::VectorXd threshold(double t) const { return nu_ + mu_ * t; }

  friend bool operator==(const ModelSpec& a, const ModelSpec& b);

 private:
  ModelSpec() = default;
  void validate() const;

  double hurst_ = 0.0;
  Eigen::MatrixXd sigma_;
  std::optional<Eigen::MatrixXd> mixing_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd nu_;
};

/// Parse a JSON config: keys H, mu, nu and exactly one of A / Sigma.
ModelSpec load_model(std::string_view config_text);
ModelSpec load_model_file(const std::string& path);

/// Inverse of load_model (A is written when present, Sigma otherwise).
std::string serialize_model(const ModelSpec& model);

}  // namespace orthant
