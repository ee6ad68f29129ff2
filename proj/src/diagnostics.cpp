#include "hdinfer/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace hdinfer {

namespace {

constexpr double kEigTol = 1e-12;

Matrix submatrix_cols(const Matrix& X, const std::vector<Index>& cols) {
  Matrix out(X.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Index>(k)) = X.col(cols[k]);
  }
  return out;
}

Matrix submatrix(const Matrix& A, const std::vector<Index>& rows,
                 const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Index>(r), static_cast<Index>(c)) = A(rows[r], cols[c]);
    }
  }
  return out;
}

double inf_norm(const Matrix& A) {
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

double sgn0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

std::vector<Index> complement(Index p, const std::vector<Index>& S) {
  std::vector<bool> in_s(static_cast<std::size_t>(p), false);
  for (Index j : S) in_s[static_cast<std::size_t>(j)] = true;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(p) - S.size());
  for (Index j = 0; j < p; ++j) {
    if (!in_s[static_cast<std::size_t>(j)]) out.push_back(j);
  }
  return out;
}

// Inverse of a symmetric PD matrix with an explicit singularity check.
Matrix checked_inverse(const Matrix& A, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
  if (eig.eigenvalues().minCoeff() <= kEigTol * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    if (std::string(what) == "support Gram matrix") {
      throw SingularSupportGramError("support Gram matrix is singular");
    }
    throw SingularCovarianceError(std::string(what) + " is singular");
  }
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

int count_in_band(const Vector& beta, double band) {
  int count = 0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double a = std::abs(beta[j]);
    if (a > 0.0 && a < band) ++count;
  }
  return count;
}

}  // namespace

ConditionReport condition_report(const RegressionData& data,
                                 const std::vector<Index>& S,
                                 const DebiasArtifacts& art,
                                 const Vector& beta_true, double lambda,
                                 double sigma) {
  validate(data);
  if (S.empty()) throw std::invalid_argument("S must be nonempty");
  const Index n = data.n();
  const Index p = data.p();

  const Matrix Xs = submatrix_cols(data.X, S);
  const Matrix G = Xs.transpose() * Xs / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
  const double cmin = eig.eigenvalues().minCoeff();
  if (cmin <= kEigTol * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw SingularSupportGramError("support Gram matrix is singular");
  }
  const Matrix Ginv = eig.eigenvectors() *
                      eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose();

  ConditionReport rep;
  rep.C_min = cmin;
  rep.K1 = inf_norm(Ginv);
  rep.K0 = data.X.cwiseAbs().maxCoeff();
  rep.s = static_cast<int>(S.size());
  rep.z4_ratio = art.z4_ratio;
  rep.z2_over_n = art.z2_over_n;

  const std::vector<Index> Sc = complement(p, S);
  if (Sc.empty()) {
    rep.kappa = 0.0;
  } else {
    const Matrix Xsc = submatrix_cols(data.X, Sc);
    const Matrix cross = Xsc.transpose() * Xs / static_cast<double>(n);
    rep.kappa = inf_norm(cross * Ginv);
  }

  const double tail = sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)) /
                                        (cmin * static_cast<double>(n)));
  rep.g1 = rep.K1 * lambda + 8.0 * tail;
  rep.g1_prime = rep.K1 * lambda + 2.0 * tail;
  rep.s_tilde = count_in_band(beta_true, rep.g1 + rep.g1_prime);
  return rep;
}

Vector oracle_estimator(const RegressionData& data, const std::vector<Index>& S,
                        const Vector& beta_true, const Vector& eps,
                        double lambda) {
  validate(data);
  if (S.empty()) throw std::invalid_argument("S must be nonempty");
  const Index n = data.n();
  const Matrix Xs = submatrix_cols(data.X, S);
  const Matrix G = Xs.transpose() * Xs / static_cast<double>(n);
  const Matrix Ginv = checked_inverse(G, "support Gram matrix");

  Vector sgn_beta(static_cast<Index>(S.size()));
  Vector beta_S(static_cast<Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) {
    beta_S[static_cast<Index>(k)] = beta_true[S[k]];
    sgn_beta[static_cast<Index>(k)] = sgn0(beta_true[S[k]]);
  }
  const Vector w = Xs.transpose() * eps / static_cast<double>(n);
  const Vector oracle_S = beta_S + Ginv * w - lambda * (Ginv * sgn_beta);

  Vector out = Vector::Zero(data.p());
  for (std::size_t k = 0; k < S.size(); ++k) {
    out[S[k]] = oracle_S[static_cast<Index>(k)];
  }
  return out;
}

ErrorDecomposition decompose_error(const RegressionData& data,
                                   const std::vector<Index>& S,
                                   const Vector& beta_true, const Vector& eps,
                                   const LassoFit& fit,
                                   const DebiasArtifacts& art, double lambda) {
  validate(data);
  if (S.empty()) throw std::invalid_argument("S must be nonempty");
  const Index n = data.n();
  const Index j = art.j;

  const Matrix Xs = submatrix_cols(data.X, S);
  const Matrix G = Xs.transpose() * Xs / static_cast<double>(n);
  const Matrix Ginv = checked_inverse(G, "support Gram matrix");

  // w_S = (e_j' - z'X / z'x_j) restricted to S.
  Vector w_S(static_cast<Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double zx = art.z.dot(data.X.col(S[k])) / art.denom;
    w_S[static_cast<Index>(k)] = (S[k] == j ? 1.0 : 0.0) - zx;
  }

  Vector sgn_beta(static_cast<Index>(S.size()));
  for (std::size_t k = 0; k < S.size(); ++k) {
    sgn_beta[static_cast<Index>(k)] = sgn0(beta_true[S[k]]);
  }

  // beta_db - beta_j = z'eps/denom + w'(beta_hat - beta); splitting beta_hat
  // through the oracle estimator gives the three terms below, with the signs
  // that make the identity hold exactly.
  ErrorDecomposition dec;
  const Vector xte = Xs.transpose() * eps / static_cast<double>(n);
  dec.noise = art.z.dot(eps) / art.denom + w_S.dot(Ginv * xte);
  dec.bias = -lambda * w_S.dot(Ginv * sgn_beta);

  const DebiasedEstimate est = debias(data, fit, art);
  dec.total = est.beta_db - beta_true[j];

  std::vector<bool> in_s(static_cast<std::size_t>(data.p()), false);
  for (Index k : S) in_s[static_cast<std::size_t>(k)] = true;
  bool inside = true;
  for (Index k : fit.active_set) {
    if (!in_s[static_cast<std::size_t>(k)]) {
      inside = false;
      break;
    }
  }

  if (inside) {
    // KKT-implied subgradient of |.|_1 at beta_hat: the sign on the active
    // set, x_k'(y - X beta_hat)/(n lambda) on {k in S : beta_hat_k = 0}.
    const Vector residual = data.y - data.X * fit.beta_hat;
    Vector sub(static_cast<Index>(S.size()));
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double bk = fit.beta_hat[S[k]];
      if (bk != 0.0) {
        sub[static_cast<Index>(k)] = sgn0(bk);
      } else {
        const double v = data.X.col(S[k]).dot(residual) /
                         (static_cast<double>(n) * lambda);
        sub[static_cast<Index>(k)] = std::clamp(v, -1.0, 1.0);
      }
    }
    dec.remainder = -lambda * w_S.dot(Ginv * (sub - sgn_beta));
    dec.sign_form = true;
  } else {
    dec.remainder = dec.total - dec.noise - dec.bias;
    dec.sign_form = false;
  }
  return dec;
}

ConditionReport population_condition_report(const Matrix& Sigma,
                                            const std::vector<Index>& S,
                                            const Vector& beta_true,
                                            double lambda, double n,
                                            double sigma) {
  const Index p = Sigma.rows();
  if (Sigma.cols() != p) throw std::invalid_argument("Sigma must be square");
  if (S.empty()) throw std::invalid_argument("S must be nonempty");

  const Matrix Sss = submatrix(Sigma, S, S);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Sss);
  const double cmin = eig.eigenvalues().minCoeff();
  if (cmin <= kEigTol * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    throw SingularCovarianceError("Sigma_{S,S} is not positive definite");
  }

  ConditionReport rep;
  rep.C_min = cmin;
  rep.s = static_cast<int>(S.size());
  rep.K0 = std::numeric_limits<double>::quiet_NaN();  // needs a realized X

  const Matrix Sss_inv = eig.eigenvectors() *
                         eig.eigenvalues().cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose();
  const Matrix inv_sqrt = eig.eigenvectors() *
                          eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          eig.eigenvectors().transpose();
  const double inv_sqrt_inf = inf_norm(inv_sqrt);
  rep.K1 = inv_sqrt_inf * inv_sqrt_inf;

  const std::vector<Index> Sc = complement(p, S);
  if (Sc.empty()) {
    rep.kappa = 0.0;
  } else {
    rep.kappa = inf_norm(submatrix(Sigma, Sc, S) * Sss_inv);
  }

  rep.C_star = Sigma.diagonal().maxCoeff();
  const Matrix Sigma_inv = checked_inverse(Sigma, "Sigma");
  rep.C_lower = 1.0 / Sigma_inv.diagonal().maxCoeff();

  int max_col_nnz = 0;
  for (Index c = 0; c < p; ++c) {
    int nnz = 0;
    for (Index r = 0; r < p; ++r) {
      if (std::abs(Sigma_inv(r, c)) > 1e-10) ++nnz;
    }
    max_col_nnz = std::max(max_col_nnz, nnz);
  }
  rep.precision_col_sparsity = max_col_nnz;

  const double s_d = static_cast<double>(S.size());
  const double log_p = std::log(static_cast<double>(p));
  const double c_n = std::max(std::sqrt(s_d), std::sqrt(log_p)) / std::sqrt(n);
  if (c_n < 0.5) {
    const double denom = (1.0 - 2.0 * c_n) * (1.0 - 2.0 * c_n);
    rep.C_n = 4.0 * std::sqrt(s_d) * c_n / denom;
  } else {
    rep.C_n = std::numeric_limits<double>::infinity();
  }
  rep.asymptotic_range = rep.C_n < 1.0;
  rep.g2 = (1.0 + rep.C_n) * rep.K1 * lambda +
           4.0 * sigma * std::sqrt(log_p / (cmin * n));
  rep.s_tilde = count_in_band(beta_true, 2.0 * rep.g2);
  return rep;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string to_text(const ConditionReport& rep) {
  std::ostringstream os;
  os << "kappa = " << fmt(rep.kappa) << "\n"
     << "K1 = " << fmt(rep.K1) << "\n"
     << "C_min = " << fmt(rep.C_min) << "\n"
     << "K0 = " << fmt(rep.K0) << "\n"
     << "z4_ratio = " << fmt(rep.z4_ratio) << "\n"
     << "z2_over_n = " << fmt(rep.z2_over_n) << "\n"
     << "s = " << rep.s << "\n"
     << "s_tilde = " << rep.s_tilde << "\n"
     << "g1 = " << fmt(rep.g1) << "\n"
     << "g1_prime = " << fmt(rep.g1_prime) << "\n";
  if (std::isfinite(rep.C_star)) {
    os << "C_star = " << fmt(rep.C_star) << "\n"
       << "C_lower = " << fmt(rep.C_lower) << "\n"
       << "g2 = " << fmt(rep.g2) << "\n"
       << "C_n = " << fmt(rep.C_n) << "\n"
       << "precision_col_sparsity = " << rep.precision_col_sparsity << "\n"
       << "asymptotic_range = " << (rep.asymptotic_range ? "true" : "false")
       << "\n";
  }
  return os.str();
}

std::string to_json_string(const ConditionReport& rep) {
  nlohmann::json j;
  j["kappa"] = rep.kappa;
  j["K1"] = rep.K1;
  j["C_min"] = rep.C_min;
  j["K0"] = rep.K0;
  if (std::isfinite(rep.z4_ratio)) {
    j["z4_ratio"] = rep.z4_ratio;
    j["z2_over_n"] = rep.z2_over_n;
  }
  j["s"] = rep.s;
  j["s_tilde"] = rep.s_tilde;
  if (std::isfinite(rep.g1)) {
    j["g1"] = rep.g1;
    j["g1_prime"] = rep.g1_prime;
  }
  if (std::isfinite(rep.C_star)) {
    j["C_star"] = rep.C_star;
    j["C_lower"] = rep.C_lower;
    j["g2"] = rep.g2;
    j["C_n"] = std::isfinite(rep.C_n) ? nlohmann::json(rep.C_n)
                                      : nlohmann::json("inf");
    j["precision_col_sparsity"] = rep.precision_col_sparsity;
    j["asymptotic_range"] = rep.asymptotic_range;
  }
  return j.dump(2);
}

}  // namespace hdinfer
