#include "kgeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace kgeval {

namespace {

void check_lengths(size_t a, size_t b, size_t min_len, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
  if (a < min_len)
    throw ValidationError(std::string(what) + ": needs at least " +
                          std::to_string(min_len) + " elements");
}

// Contingency counts between two labelings.
struct Contingency {
  std::vector<std::vector<size_t>> cells;
  std::vector<size_t> row_sums, col_sums;
  size_t n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  std::unordered_map<int, size_t> row_of, col_of;
  for (int v : a) row_of.emplace(v, row_of.size());
  for (int v : b) col_of.emplace(v, col_of.size());
  Contingency c;
  c.cells.assign(row_of.size(), std::vector<size_t>(col_of.size(), 0));
  c.row_sums.assign(row_of.size(), 0);
  c.col_sums.assign(col_of.size(), 0);
  c.n = a.size();
  for (size_t i = 0; i < a.size(); ++i) {
    const size_t r = row_of[a[i]], col = col_of[b[i]];
    ++c.cells[r][col];
    ++c.row_sums[r];
    ++c.col_sums[col];
  }
  return c;
}

double choose2(size_t n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1); }

}  // namespace

double accuracy(std::span<const int> gold, std::span<const int> predicted) {
  check_lengths(gold.size(), predicted.size(), 1, "accuracy");
  size_t correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) correct += gold[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double rmse(std::span<const double> gold, std::span<const double> predicted) {
  check_lengths(gold.size(), predicted.size(), 1, "rmse");
  double sum = 0.0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const double d = gold[i] - predicted[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(gold.size()));
}

double ari(std::span<const int> labels_a, std::span<const int> labels_b) {
  check_lengths(labels_a.size(), labels_b.size(), 2, "ari");
  const Contingency c = contingency(labels_a, labels_b);
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& row : c.cells)
    for (size_t cell : row) sum_cells += choose2(cell);
  for (size_t r : c.row_sums) sum_rows += choose2(r);
  for (size_t col : c.col_sums) sum_cols += choose2(col);
  const double total = choose2(c.n);
  const double expected = sum_rows * sum_cols / total;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  const double denom = maximum - expected;
  if (denom == 0.0) {
    // Both partitions degenerate (all-singletons or single cluster); they are
    // identical as pair relations exactly when the index equals its maximum.
    return sum_cells == maximum ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / denom;
}

double nmi(std::span<const int> labels_a, std::span<const int> labels_b) {
  check_lengths(labels_a.size(), labels_b.size(), 2, "nmi");
  const Contingency c = contingency(labels_a, labels_b);
  const double n = static_cast<double>(c.n);

  auto entropy = [&](const std::vector<size_t>& sums) {
    double h = 0.0;
    for (size_t s : sums) {
      if (s == 0) continue;
      const double p = static_cast<double>(s) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(c.row_sums);
  const double hb = entropy(c.col_sums);
  if (ha + hb == 0.0) return 1.0;  // both partitions constant, hence identical

  double mi = 0.0;
  for (size_t r = 0; r < c.cells.size(); ++r) {
    for (size_t col = 0; col < c.cells[r].size(); ++col) {
      const size_t cell = c.cells[r][col];
      if (cell == 0) continue;
      const double p = static_cast<double>(cell) / n;
      const double pr = static_cast<double>(c.row_sums[r]) / n;
      const double pc = static_cast<double>(c.col_sums[col]) / n;
      mi += p * std::log(p / (pr * pc));
    }
  }
  const double value = mi / (0.5 * (ha + hb));
  return std::clamp(value, 0.0, 1.0);
}

std::vector<int> hungarian_max_assignment(const std::vector<std::vector<double>>& weight) {
  const size_t rows = weight.size();
  if (rows == 0) return {};
  const size_t cols = weight[0].size();
  const size_t n = std::max(rows, cols);

  // Potentials-based Hungarian algorithm on a padded square cost matrix
  // (costs = -weights so the max-sum assignment minimizes cost).
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) cost[r + 1][c + 1] = -weight[r][c];

  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<size_t> match(n + 1, 0);  // column -> row
  std::vector<size_t> way(n + 1, 0);
  const double inf = std::numeric_limits<double>::infinity();

  for (size_t i = 1; i <= n; ++i) {
    match[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const size_t i0 = match[j0];
      double delta = inf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(rows, -1);
  for (size_t j = 1; j <= n; ++j) {
    const size_t r = match[j];
    if (r >= 1 && r <= rows && j <= cols) assignment[r - 1] = static_cast<int>(j - 1);
  }
  return assignment;
}

double cluster_accuracy(std::span<const int> gold, std::span<const int> predicted) {
  check_lengths(gold.size(), predicted.size(), 1, "cluster_accuracy");

  std::map<int, size_t> cluster_of, class_of;
  for (int p : predicted)
    if (p != -1) cluster_of.emplace(p, cluster_of.size());
  for (int g : gold) class_of.emplace(g, class_of.size());

  if (cluster_of.empty()) return 0.0;  // everything noise

  std::vector<std::vector<double>> counts(cluster_of.size(),
                                          std::vector<double>(class_of.size(), 0.0));
  for (size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i] == -1) continue;
    counts[cluster_of[predicted[i]]][class_of[gold[i]]] += 1.0;
  }

  const std::vector<int> assignment = hungarian_max_assignment(counts);
  double matched = 0.0;
  for (size_t r = 0; r < counts.size(); ++r)
    if (assignment[r] >= 0) matched += counts[r][assignment[r]];
  return matched / static_cast<double>(gold.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), 2, "pearson");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;  // degenerate input
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), 2, "spearman");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size(), 2, "kendall_tau_b");
  const size_t n = x.size();
  long long concordant = 0, discordant = 0;
  long long ties_x = 0, ties_y = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) {
        ++ties_x;
        ++ties_y;
      } else if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n0 = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double denom = std::sqrt((n0 - static_cast<double>(ties_x)) *
                                 (n0 - static_cast<double>(ties_y)));
  if (denom == 0.0) return 0.0;
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

double harmonic_mean(double a, double b) {
  if (a + b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

double f1_at_k(std::span<const uint32_t> topk, std::span<const uint32_t> test_set, size_t k) {
  if (k == 0) throw ConfigError("f1_at_k requires k >= 1");
  if (topk.size() > k) throw ValidationError("f1_at_k: top-k list longer than k");
  if (test_set.empty()) return 0.0;
  std::unordered_set<uint32_t> test(test_set.begin(), test_set.end());
  size_t hits = 0;
  for (uint32_t item : topk) hits += test.count(item);
  const double precision = static_cast<double>(hits) / static_cast<double>(k);
  const double recall = static_cast<double>(hits) / static_cast<double>(test.size());
  return harmonic_mean(precision, recall);
}

ScenarioMetrics apply_scenario(const std::string& metric_name,
                               std::span<const ScenarioOutcome> outcomes, double coverage,
                               OutcomeAggregation aggregation, MetricDirection direction) {
  if (outcomes.empty()) throw ValidationError("apply_scenario: no outcomes");

  double mapped_sum = 0.0, unmapped_sum = 0.0;
  size_t mapped_n = 0, unmapped_n = 0;
  for (const ScenarioOutcome& o : outcomes) {
    if (o.mapped) {
      mapped_sum += o.value;
      ++mapped_n;
    } else {
      unmapped_sum += o.value;
      ++unmapped_n;
    }
  }

  const double mapped_mean = mapped_n > 0 ? mapped_sum / static_cast<double>(mapped_n) : 0.0;
  const double unmapped_mean =
      unmapped_n > 0 ? unmapped_sum / static_cast<double>(unmapped_n) : 0.0;
  // Weighting by coverage (not by outcome counts) keeps the all-entities value
  // exact even when folds see only a slice of the mapped entities.
  const double all_mean = unmapped_n > 0
                              ? mapped_mean * coverage + unmapped_mean * (1.0 - coverage)
                              : mapped_mean;

  ScenarioMetrics m;
  m.name = metric_name;
  m.coverage = coverage;
  m.direction = direction;
  switch (aggregation) {
    case OutcomeAggregation::Mean:
      m.value_known = mapped_mean;
      m.value_all = all_mean;
      break;
    case OutcomeAggregation::RootMean:
      m.value_known = std::sqrt(mapped_mean);
      m.value_all = std::sqrt(all_mean);
      break;
  }
  return m;
}

}  // namespace kgeval
