#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace orthant {

/// Sorted set of 0-based coordinate indices. Reports print them 1-based.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<int> members);
  explicit IndexSet(std::vector<int> members);

  /// Subset encoded by the low `d` bits of `mask`.
  static IndexSet from_mask(unsigned mask, int d);
  static IndexSet all(int d);

  const std::vector<int>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  bool contains(int i) const noexcept;
  int operator[](std::size_t k) const { return members_[k]; }

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  IndexSet complement(int d) const;

  /// 1-based members, e.g. "{1,2}".
  std::string to_string() const;
  std::vector<int> one_based() const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<int> members_;
};

// Sub-block extraction helpers.
Eigen::VectorXd select(const Eigen::VectorXd& v, const IndexSet& rows);
Eigen::MatrixXd select(const Eigen::MatrixXd& m, const IndexSet& rows, const IndexSet& cols);

}  // namespace orthant
