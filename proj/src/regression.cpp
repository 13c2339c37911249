#include "pbvote/regression.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "pbvote/stats.hpp"

namespace pbvote {

std::optional<double> CorrelationMatrix::at(std::string_view a, std::string_view b) const {
  std::optional<std::size_t> ia, ib;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == a) ia = i;
    if (names[i] == b) ib = i;
  }
  if (!ia || !ib) throw std::out_of_range("no such feature in correlation matrix");
  return r[*ia][*ib];
}

CorrelationMatrix pearson_correlation_matrix(const std::vector<Feature>& features) {
  if (features.empty()) throw std::invalid_argument("correlation matrix of no features");
  const std::size_t rows = features.front().values.size();
  for (const auto& f : features)
    if (f.values.size() != rows) throw std::invalid_argument("feature " + f.name + " has a different row count");
  if (rows < 3) throw std::invalid_argument("correlation matrix needs at least three rows");

  CorrelationMatrix m;
  const std::size_t k = features.size();
  m.r.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t i = 0; i < k; ++i) {
    m.names.push_back(features[i].name);
    for (std::size_t j = i; j < k; ++j) {
      std::optional<double> r;
      if (i == j) {
        if (stats::pearson(features[i].values, features[i].values)) r = 1.0;
      } else {
        r = stats::pearson(features[i].values, features[j].values);
      }
      m.r[i][j] = m.r[j][i] = r;
    }
  }
  return m;
}

namespace {

constexpr double kRankTolerance = 1e-10;

std::size_t column_rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankTolerance);
  return static_cast<std::size_t>(qr.rank());
}

// Names every column that does not raise the rank of the columns before it, together with
// the earlier columns it is built from.
void check_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  if (column_rank(x) == static_cast<std::size_t>(x.cols())) return;

  std::vector<Eigen::Index> independent;
  std::vector<std::string> collinear;
  std::string message = "design matrix is rank deficient:";
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXd basis(x.rows(), static_cast<Eigen::Index>(independent.size()) + 1);
    for (std::size_t b = 0; b < independent.size(); ++b) basis.col(static_cast<Eigen::Index>(b)) = x.col(independent[b]);
    basis.col(basis.cols() - 1) = x.col(j);
    if (column_rank(basis) > independent.size()) {
      independent.push_back(j);
      continue;
    }
    collinear.push_back(names[static_cast<std::size_t>(j)]);
    std::string with;
    if (!independent.empty()) {
      Eigen::MatrixXd prev = basis.leftCols(basis.cols() - 1);
      const Eigen::VectorXd coef = prev.colPivHouseholderQr().solve(x.col(j));
      for (Eigen::Index b = 0; b < coef.size(); ++b)
        if (std::abs(coef(b)) > 1e-8) {
          if (!with.empty()) with += ", ";
          with += "'" + names[static_cast<std::size_t>(independent[static_cast<std::size_t>(b)])] + "'";
        }
    }
    message += " column '" + names[static_cast<std::size_t>(j)] + "' is collinear with " +
               (with.empty() ? std::string("nothing (all zero)") : with) + ";";
  }
  message.pop_back();
  throw CollinearityError(message, collinear);
}

}  // namespace

RegressionResult ols_regression(std::span<const double> y, const std::vector<Feature>& features) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(features.size()) + 1;
  for (const auto& f : features)
    if (static_cast<Eigen::Index>(f.values.size()) != n)
      throw std::invalid_argument("feature " + f.name + " has a different row count than y");
  if (n <= p)
    throw std::invalid_argument("regression needs more rows (" + std::to_string(n) + ") than columns (" +
                                std::to_string(p) + ")");

  std::vector<std::string> names{"(intercept)"};
  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  for (Eigen::Index j = 1; j < p; ++j) {
    const auto& f = features[static_cast<std::size_t>(j - 1)];
    names.push_back(f.name);
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = f.values[static_cast<std::size_t>(i)];
  }
  check_full_rank(x, names);

  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::VectorXd beta = qr.solve(yv);
  const Eigen::VectorXd resid = yv - x * beta;

  RegressionResult out;
  out.n = static_cast<std::size_t>(n);
  out.dof = static_cast<std::size_t>(n - p);
  out.residual_variance = resid.squaredNorm() / static_cast<double>(out.dof);

  // (X'X)^-1 = R^-1 R^-T
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd cov = r_inv * r_inv.transpose() * out.residual_variance;

  const boost::math::students_t dist(static_cast<double>(out.dof));
  const double t = boost::math::quantile(dist, 0.975);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double se = std::sqrt(std::max(0.0, cov(j, j)));
    const ConfidenceInterval ci{beta(j) - t * se, beta(j) + t * se};
    if (j == 0) {
      out.intercept = beta(0);
      out.intercept_ci95 = ci;
      continue;
    }
    const auto& name = names[static_cast<std::size_t>(j)];
    out.features.push_back(name);
    out.coefficients[name] = beta(j);
    out.ci95[name] = ci;
    out.std_errors[name] = se;
  }
  return out;
}

}  // namespace pbvote
