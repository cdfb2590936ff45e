#include "subergm/basis.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace subergm {

Eigen::VectorXd ExpBasis::values(double x) const {
  if (x < 0) throw std::invalid_argument("basis: change statistics are nonnegative");
  return 1.0 - (-gammas.array() * x).exp();
}

Eigen::VectorXd ExpBasis::derivs(double x) const {
  if (x < 0) throw std::invalid_argument("basis: change statistics are nonnegative");
  return gammas.array() * (-gammas.array() * x).exp();
}

Eigen::MatrixXd ExpBasis::design(const Eigen::VectorXd& xs) const {
  Eigen::MatrixXd out(xs.size(), K);
  for (Eigen::Index r = 0; r < xs.size(); ++r) out.row(r) = values(xs(r));
  return out;
}

double ExpBasis::effect(double x, const Eigen::VectorXd& u) const {
  if (u.size() != K) throw std::invalid_argument("basis: coefficient size mismatch");
  return values(x).dot(u);
}

ExpBasis build_basis(int K, double gamma_min, double gamma_max) {
  if (K < 2) throw std::invalid_argument("build_basis: need at least two rates");
  if (!(gamma_min > 0) || !(gamma_max > gamma_min))
    throw std::invalid_argument("build_basis: need 0 < gamma_min < gamma_max");

  ExpBasis b;
  b.K = K;
  b.gammas.resize(K);
  double log_ratio = std::log(gamma_max / gamma_min);
  for (int q = 0; q < K; ++q)
    b.gammas(q) = gamma_min * std::exp(log_ratio * q / (K - 1));
  b.gammas(K - 1) = gamma_max;  // exact endpoint

  // xi_r solves gamma_r exp(-gamma_r xi) = gamma_{r+1} exp(-gamma_{r+1} xi).
  b.cutpoints.resize(K - 1);
  for (int r = 0; r < K - 1; ++r)
    b.cutpoints(r) =
        std::log(b.gammas(r + 1) / b.gammas(r)) / (b.gammas(r + 1) - b.gammas(r));
  return b;
}

nlohmann::json basis_to_json(const ExpBasis& b) {
  nlohmann::json j;
  j["K"] = b.K;
  j["gammas"] = std::vector<double>(b.gammas.data(), b.gammas.data() + b.gammas.size());
  return j;
}

ExpBasis basis_from_json(const nlohmann::json& j) {
  ExpBasis b;
  b.K = j.at("K").get<int>();
  auto g = j.at("gammas").get<std::vector<double>>();
  if (static_cast<int>(g.size()) != b.K || b.K < 2)
    throw ParseError("basis: inconsistent serialized basis");
  b.gammas = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
  for (int q = 0; q + 1 < b.K; ++q)
    if (!(b.gammas(q) > 0) || !(b.gammas(q) < b.gammas(q + 1)))
      throw ParseError("basis: rates must be positive and ascending");
  b.cutpoints.resize(b.K - 1);
  for (int r = 0; r < b.K - 1; ++r)
    b.cutpoints(r) =
        std::log(b.gammas(r + 1) / b.gammas(r)) / (b.gammas(r + 1) - b.gammas(r));
  return b;
}

ConstraintMatrix constraint_matrix(const ExpBasis& b, const std::vector<int>& signs) {
  for (int s : signs)
    if (s != 1 && s != -1)
      throw std::invalid_argument("constraint_matrix: signs must be +1 or -1");
  const auto p = static_cast<Eigen::Index>(signs.size());
  const Eigen::Index K = b.K;
  ConstraintMatrix cm;
  cm.signs = signs;
  cm.A = Eigen::MatrixXd::Zero(p * (K - 1), 1 + p * K);
  for (Eigen::Index l = 0; l < p; ++l) {
    for (Eigen::Index r = 0; r < K - 1; ++r) {
      cm.A.block(l * (K - 1) + r, 1 + l * K, 1, K) =
          signs[static_cast<std::size_t>(l)] * b.derivs(b.cutpoints(r)).transpose();
    }
  }
  return cm;
}

}  // namespace subergm
