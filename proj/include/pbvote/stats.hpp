#pragma once

#include <optional>
#include <span>
#include <vector>

namespace pbvote::stats {

double mean(std::span<const double> xs);
double median(std::span<const double> xs);
double minimum(std::span<const double> xs);

// Sample standard deviation (n - 1 denominator); nullopt for fewer than two values.
std::optional<double> sample_stddev(std::span<const double> xs);

// Linear interpolation between order statistics at h = (n - 1) p  (Hyndman & Fan type 7).
// `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

// Pearson r; nullopt when either side has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

}  // namespace pbvote::stats
