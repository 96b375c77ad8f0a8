#pragma once

#include <span>
#include <string>
#include <vector>

#include "kgeval/common.hpp"

namespace kgeval {

enum class MetricDirection : uint8_t { HigherBetter, LowerBetter };

// One metric evaluated under both accounting scenarios.
struct ScenarioMetrics {
  std::string name;
  double value_known = 0.0;  // over mapped entities only
  double value_all = 0.0;    // over all entities, unmapped penalized
  double coverage = 0.0;     // mapped / total dataset entities
  MetricDirection direction = MetricDirection::HigherBetter;
};

double accuracy(std::span<const int> gold, std::span<const int> predicted);
double rmse(std::span<const double> gold, std::span<const double> predicted);

// Adjusted Rand index via the pair-counting contingency formula.
double ari(std::span<const int> labels_a, std::span<const int> labels_b);
// Mutual information normalized by the arithmetic mean of the entropies
// (natural log, 0*log 0 := 0).
double nmi(std::span<const int> labels_a, std::span<const int> labels_b);

// Maximum accuracy over one-to-one assignments of predicted clusters to gold
// classes. Predicted label -1 marks noise and is never assigned.
double cluster_accuracy(std::span<const int> gold, std::span<const int> predicted);

double pearson(std::span<const double> x, std::span<const double> y);
// Pearson correlation of average ranks (ties averaged).
double spearman(std::span<const double> x, std::span<const double> y);
// Kendall's tau-b with tie correction.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// 2ab/(a+b); 0 when a+b <= 0.
double harmonic_mean(double a, double b);

double f1_at_k(std::span<const uint32_t> topk, std::span<const uint32_t> test_set, size_t k);

// Average ranks (1-based, ties averaged) of a vector.
std::vector<double> average_ranks(std::span<const double> x);

// Max-sum one-to-one assignment of rows to columns; returns per-row column or
// -1 when unassigned. Used for cluster_accuracy's confusion matrix.
std::vector<int> hungarian_max_assignment(const std::vector<std::vector<double>>& weight);

// A pointwise outcome tagged with mapping status. `value` is the metric
// contribution of the entity (1/0 correctness, squared error, ...).
struct ScenarioOutcome {
  double value = 0.0;
  bool mapped = false;
};

enum class OutcomeAggregation : uint8_t {
  Mean,      // value_* are means of the contributions
  RootMean,  // contributions are squared errors; value_* = sqrt(mean)
};

// Combines pointwise outcomes into one ScenarioMetrics record. value_known is
// the aggregate over mapped outcomes; value_all weights mapped and unmapped
// aggregates by coverage and 1-coverage so identities like
// accuracy_all = accuracy_known * coverage hold exactly.
ScenarioMetrics apply_scenario(const std::string& metric_name,
                               std::span<const ScenarioOutcome> outcomes, double coverage,
                               OutcomeAggregation aggregation, MetricDirection direction);

}  // namespace kgeval
