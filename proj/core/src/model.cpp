#include "orthant/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orthant/error.hpp"

namespace orthant {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidModel, message);
}

Eigen::VectorXd read_vector(const json& doc, const char* key) {
  if (!doc.contains(key)) invalid(std::string("missing key '") + key + "'");
  const json& node = doc.at(key);
  if (!node.is_array() || node.empty()) invalid(std::string("'") + key + "' must be a non-empty array");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) invalid(std::string("'") + key + "' must contain numbers");
    v(static_cast<Eigen::Index>(i)) = node[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const json& node, const char* key) {
  if (!node.is_array() || node.empty()) invalid(std::string("'") + key + "' must be an array of rows");
  const std::size_t rows = node.size();
  if (!node[0].is_array()) invalid(std::string("'") + key + "' must be an array of rows");
  const std::size_t cols = node[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!node[r].is_array() || node[r].size() != cols) {
      invalid(std::string("'") + key + "' rows have inconsistent lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!node[r][c].is_number()) invalid(std::string("'") + key + "' must contain numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = node[r][c].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

ModelSpec ModelSpec::from_sigma(double hurst, Eigen::MatrixXd sigma, Eigen::VectorXd mu,
                                Eigen::VectorXd nu) {
  ModelSpec m;
  m.hurst_ = hurst;
  m.mu_ = std::move(mu);
  m.nu_ = std::move(nu);
  if (sigma.rows() != sigma.cols()) invalid("Sigma must be square");
  m.sigma_ = (sigma + sigma.transpose()) / 2.0;
  m.validate();
  return m;
}

ModelSpec ModelSpec::from_mixing(double hurst, Eigen::MatrixXd mixing, Eigen::VectorXd mu,
                                 Eigen::VectorXd nu) {
  if (mixing.rows() != mixing.cols()) invalid("A must be square");
  Eigen::MatrixXd sigma = mixing * mixing.transpose();
  ModelSpec m = from_sigma(hurst, std::move(sigma), std::move(mu), std::move(nu));
  m.mixing_ = std::move(mixing);
  return m;
}

void ModelSpec::validate() const {
  if (!(hurst_ > 0.0 && hurst_ < 1.0)) invalid("H must lie in (0, 1)");
  const Eigen::Index d = mu_.size();
  if (d == 0) invalid("dimension must be positive");
  if (nu_.size() != d) invalid("mu and nu have different lengths");
  if (sigma_.rows() != d) invalid("covariance dimension does not match mu/nu");
  if (!sigma_.allFinite() || !mu_.allFinite() || !nu_.allFinite()) invalid("non-finite input");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top > 0.0) || bottom <= kCondTol * top) {
    std::ostringstream msg;
    msg << "Sigma is not positive definite (eigenvalues in [" << bottom << ", " << top << "])";
    invalid(msg.str());
  }

  bool rare = false;
  for (Eigen::Index i = 0; i < d; ++i) rare = rare || (mu_(i) > 0.0 && nu_(i) > 0.0);
  if (!rare) invalid("need at least one coordinate with mu_i > 0 and nu_i > 0");
}

Eigen::MatrixXd ModelSpec::factor() const {
  if (mixing_) return *mixing_;
  return sigma_.llt().matrixL();
}

bool operator==(const ModelSpec& a, const ModelSpec& b) {
  return a.hurst_ == b.hurst_ && a.mu_ == b.mu_ && a.nu_ == b.nu_ && a.sigma_ == b.sigma_ &&
         a.mixing_.has_value() == b.mixing_.has_value() && (!a.mixing_ || *a.mixing_ == *b.mixing_);
}

ModelSpec load_model(std::string_view config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) invalid("config must be a JSON object");
  if (!doc.contains("H") || !doc["H"].is_number()) invalid("missing numeric key 'H'");
  const double hurst = doc["H"].get<double>();
  Eigen::VectorXd mu = read_vector(doc, "mu");
  Eigen::VectorXd nu = read_vector(doc, "nu");

  const bool has_a = doc.contains("A");
  const bool has_sigma = doc.contains("Sigma");
  if (has_a == has_sigma) invalid("config must supply exactly one of 'A' and 'Sigma'");
  if (has_a) return ModelSpec::from_mixing(hurst, read_matrix(doc["A"], "A"), mu, nu);
  return ModelSpec::from_sigma(hurst, read_matrix(doc["Sigma"], "Sigma"), mu, nu);
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_model(buffer.str());
}

std::string serialize_model(const ModelSpec& model) {
  json doc;
  doc["H"] = model.hurst();
  doc["mu"] = vector_to_json(model.mu());
  doc["nu"] = vector_to_json(model.nu());
  if (model.mixing()) {
    doc["A"] = matrix_to_json(*model.mixing());
  } else {
    doc["Sigma"] = matrix_to_json(model.sigma());
  }
  return doc.dump();
}

}  // namespace orthant
