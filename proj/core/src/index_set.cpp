#include "orthant/index_set.hpp"

#include <algorithm>

namespace orthant {

IndexSet::IndexSet(std::initializer_list<int> members) : IndexSet(std::vector<int>(members)) {}

IndexSet::IndexSet(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

IndexSet IndexSet::from_mask(unsigned mask, int d) {
  IndexSet out;
  for (int i = 0; i < d; ++i) {
    if (mask & (1u << i)) out.members_.push_back(i);
  }
  return out;
}

IndexSet IndexSet::all(int d) { return from_mask((1u << d) - 1u, d); }

bool IndexSet::contains(int i) const noexcept {
  return std::binary_search(members_.begin(), members_.end(), i);
}

IndexSet IndexSet::complement(int d) const {
  IndexSet out;
  for (int i = 0; i < d; ++i) {
    if (!contains(i)) out.members_.push_back(i);
  }
  return out;
}

std::vector<int> IndexSet::one_based() const {
  std::vector<int> out(members_);
  for (int& i : out) ++i;
  return out;
}

std::string IndexSet::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(members_[k] + 1);
  }
  return s + "}";
}

Eigen::VectorXd select(const Eigen::VectorXd& v, const IndexSet& rows) {
  Eigen::VectorXd out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out(k) = v(rows[k]);
  return out;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const IndexSet& rows, const IndexSet& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = m(rows[r], cols[c]);
  }
  return out;
}

}  // namespace orthant
