#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbvote/analysis.hpp"

namespace pbvote {

// A named numeric column, one value per election (or other unit of observation).
struct Feature {
  std::string name;
  std::vector<double> values;
};

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> r;  // nullopt where a column has zero variance

  [[nodiscard]] std::optional<double> at(std::string_view a, std::string_view b) const;
};

// Pairwise Pearson r. Requires at least three rows and equal column lengths.
CorrelationMatrix pearson_correlation_matrix(const std::vector<Feature>& features);

class CollinearityError : public std::invalid_argument {
public:
  CollinearityError(std::string message, std::vector<std::string> columns)
      : std::invalid_argument(std::move(message)), columns_(std::move(columns)) {}
  [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
  std::vector<std::string> columns_;
};

struct RegressionResult {
  double intercept = 0.0;
  ConfidenceInterval intercept_ci95;
  std::vector<std::string> features;  // design-matrix order
  std::map<std::string, double> coefficients;
  std::map<std::string, ConfidenceInterval> ci95;
  std::map<std::string, double> std_errors;
  std::size_t n = 0;
  std::size_t dof = 0;
  double residual_variance = 0.0;
};

// Least squares of y on an intercept plus the given features. Confidence intervals use
// t quantiles with n - p degrees of freedom. Throws CollinearityError naming the columns
// that are linear combinations of earlier ones (the intercept included).
RegressionResult ols_regression(std::span<const double> y, const std::vector<Feature>& features);

}  // namespace pbvote
