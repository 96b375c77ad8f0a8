#include "kgeval/tasks_ml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "kgeval/rng.hpp"

namespace kgeval {

namespace {

double cosine_distance(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 0.0 : 1.0;
  return 1.0 - std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double sq_euclidean(std::span<const float> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  return sum;
}

// Indices of the k nearest training rows by cosine distance, ties by index.
std::vector<size_t> nearest_rows(MatView train, std::span<const float> query, size_t k) {
  std::vector<std::pair<double, size_t>> dists(train.rows);
  for (size_t i = 0; i < train.rows; ++i)
    dists[i] = {cosine_distance(query, train.row(i)), i};
  const size_t keep = std::min(k, train.rows);
  std::partial_sort(dists.begin(), dists.begin() + keep, dists.end());
  std::vector<size_t> out(keep);
  for (size_t i = 0; i < keep; ++i) out[i] = dists[i].second;
  return out;
}

int n_classes(std::span<const int> labels) {
  int maxc = -1;
  for (int c : labels) maxc = std::max(maxc, c);
  return maxc + 1;
}

// Gaussian elimination with partial pivoting; A is overwritten.
std::vector<double> solve_linear(std::vector<std::vector<double>>& a, std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (std::fabs(a[col][col]) < 1e-300)
      throw ValidationError("singular system in linear regression");
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double sum = b[r];
    for (size_t c = r + 1; c < n; ++c) sum -= a[r][c] * x[c];
    x[r] = sum / a[r][r];
  }
  return x;
}

struct TreeNode {
  bool leaf = true;
  double value = 0.0;
  size_t feature = 0;
  double threshold = 0.0;
  int left = -1, right = -1;
};

class RegressionTree {
 public:
  RegressionTree(MatView x, std::span<const double> y, int max_depth, size_t min_leaf)
      : x_(x), y_(y), max_depth_(max_depth), min_leaf_(std::max<size_t>(1, min_leaf)) {
    std::vector<size_t> rows(x.rows);
    std::iota(rows.begin(), rows.end(), size_t{0});
    root_ = grow(rows, 0);
  }

  double predict(std::span<const float> row) const {
    int node = root_;
    while (!nodes_[node].leaf)
      node = row[nodes_[node].feature] <= nodes_[node].threshold ? nodes_[node].left
                                                                 : nodes_[node].right;
    return nodes_[node].value;
  }

 private:
  static double mean_of(std::span<const double> y, const std::vector<size_t>& rows) {
    double sum = 0.0;
    for (size_t r : rows) sum += y[r];
    return sum / static_cast<double>(rows.size());
  }

  int grow(const std::vector<size_t>& rows, int depth) {
    TreeNode node;
    node.value = mean_of(y_, rows);

    double sse = 0.0;
    for (size_t r : rows) {
      const double d = y_[r] - node.value;
      sse += d * d;
    }

    const bool can_split = (max_depth_ < 0 || depth < max_depth_) &&
                           rows.size() >= 2 * min_leaf_ && sse > 0.0;
    if (can_split) {
      double best_sse = sse;
      size_t best_feature = 0;
      double best_threshold = 0.0;
      bool found = false;

      for (size_t f = 0; f < x_.cols; ++f) {
        std::vector<std::pair<double, double>> vals;  // (feature value, target)
        vals.reserve(rows.size());
        for (size_t r : rows) vals.emplace_back(x_.row(r)[f], y_[r]);
        std::sort(vals.begin(), vals.end());

        // Prefix sums over the sorted order give each midpoint split in O(1).
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (const auto& [v, t] : vals) {
          total_sum += t;
          total_sq += t * t;
        }
        for (size_t i = 0; i + 1 < vals.size(); ++i) {
          left_sum += vals[i].second;
          left_sq += vals[i].second * vals[i].second;
          if (vals[i].first == vals[i + 1].first) continue;
          const size_t nl = i + 1, nr = vals.size() - nl;
          if (nl < min_leaf_ || nr < min_leaf_) continue;
          const double right_sum = total_sum - left_sum;
          const double right_sq = total_sq - left_sq;
          const double split_sse = (left_sq - left_sum * left_sum / nl) +
                                   (right_sq - right_sum * right_sum / nr);
          if (split_sse < best_sse - 1e-12) {  // strict improvement, first-best order
            best_sse = split_sse;
            best_feature = f;
            best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
            found = true;
          }
        }
      }

      if (found) {
        std::vector<size_t> left, right;
        for (size_t r : rows)
          (x_.row(r)[best_feature] <= best_threshold ? left : right).push_back(r);
        node.leaf = false;
        node.feature = best_feature;
        node.threshold = best_threshold;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        nodes_[id].left = grow(left, depth + 1);
        nodes_[id].right = grow(right, depth + 1);
        return id;
      }
    }

    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }

  MatView x_;
  std::span<const double> y_;
  int max_depth_;
  size_t min_leaf_;
  std::vector<TreeNode> nodes_;
  int root_ = 0;
};

}  // namespace

std::vector<int> knn_classify(MatView train, std::span<const int> labels, MatView test,
                              size_t k) {
  if (train.rows == 0) throw ValidationError("knn: empty training set");
  if (n_classes(labels) < 2) throw ValidationError("knn: needs at least 2 classes");
  const size_t kk = std::min(std::max<size_t>(1, k), train.rows);
  std::vector<int> out(test.rows);
  const int classes = n_classes(labels);
  for (size_t t = 0; t < test.rows; ++t) {
    std::vector<int> votes(classes, 0);
    for (size_t idx : nearest_rows(train, test.row(t), kk)) ++votes[labels[idx]];
    int best = 0;
    for (int c = 1; c < classes; ++c)
      if (votes[c] > votes[best]) best = c;  // ties keep the smallest class label
    out[t] = best;
  }
  return out;
}

std::vector<int> gaussian_nb_classify(MatView train, std::span<const int> labels,
                                      MatView test) {
  if (train.rows == 0) throw ValidationError("naive bayes: empty training set");
  const int classes = n_classes(labels);
  if (classes < 2) throw ValidationError("naive bayes: needs at least 2 classes");
  const size_t d = train.cols;

  std::vector<double> counts(classes, 0.0);
  std::vector<std::vector<double>> mean(classes, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> var(classes, std::vector<double>(d, 0.0));
  for (size_t r = 0; r < train.rows; ++r) {
    const int c = labels[r];
    counts[c] += 1.0;
    const auto row = train.row(r);
    for (size_t j = 0; j < d; ++j) mean[c][j] += row[j];
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[c] == 0.0) continue;
    for (size_t j = 0; j < d; ++j) mean[c][j] /= counts[c];
  }
  for (size_t r = 0; r < train.rows; ++r) {
    const int c = labels[r];
    const auto row = train.row(r);
    for (size_t j = 0; j < d; ++j) {
      const double dd = row[j] - mean[c][j];
      var[c][j] += dd * dd;
    }
  }
  constexpr double kVarFloor = 1e-9;
  for (int c = 0; c < classes; ++c)
    for (size_t j = 0; j < d; ++j)
      var[c][j] = std::max(counts[c] > 0.0 ? var[c][j] / counts[c] : kVarFloor, kVarFloor);

  const double total = static_cast<double>(train.rows);
  std::vector<int> out(test.rows);
  for (size_t t = 0; t < test.rows; ++t) {
    const auto row = test.row(t);
    double best_ll = -std::numeric_limits<double>::infinity();
    int best = 0;
    for (int c = 0; c < classes; ++c) {
      if (counts[c] == 0.0) continue;
      double ll = std::log(counts[c] / total);
      for (size_t j = 0; j < d; ++j) {
        const double dd = row[j] - mean[c][j];
        ll += -0.5 * std::log(2.0 * M_PI * var[c][j]) - dd * dd / (2.0 * var[c][j]);
      }
      if (ll > best_ll) {
        best_ll = ll;
        best = c;
      }
    }
    out[t] = best;
  }
  return out;
}

std::vector<int> svm_classify(MatView train, std::span<const int> labels, MatView test,
                              double learning_rate, uint32_t epochs, uint64_t seed) {
  if (train.rows == 0) throw ValidationError("svm: empty training set");
  const int classes = n_classes(labels);
  if (classes < 2) throw ValidationError("svm: needs at least 2 classes");
  const size_t d = train.cols;

  std::vector<std::vector<double>> w(classes, std::vector<double>(d, 0.0));
  std::vector<double> bias(classes, 0.0);

  std::vector<uint32_t> order(train.rows);
  std::iota(order.begin(), order.end(), 0u);

  for (int c = 0; c < classes; ++c) {
    Rng rng(mix_seed(seed, 0x53F0000ull + static_cast<uint64_t>(c)));
    for (uint32_t e = 0; e < epochs; ++e) {
      rng.shuffle(order);
      for (uint32_t idx : order) {
        const auto row = train.row(idx);
        const double y = labels[idx] == c ? 1.0 : -1.0;
        double f = bias[c];
        for (size_t j = 0; j < d; ++j) f += w[c][j] * row[j];
        if (y * f < 1.0) {
          for (size_t j = 0; j < d; ++j) w[c][j] += learning_rate * y * row[j];
          bias[c] += learning_rate * y;
        }
      }
    }
  }

  std::vector<int> out(test.rows);
  for (size_t t = 0; t < test.rows; ++t) {
    const auto row = test.row(t);
    double best_margin = -std::numeric_limits<double>::infinity();
    int best = 0;
    for (int c = 0; c < classes; ++c) {
      double f = bias[c];
      for (size_t j = 0; j < d; ++j) f += w[c][j] * row[j];
      if (f > best_margin) {
        best_margin = f;
        best = c;
      }
    }
    out[t] = best;
  }
  return out;
}

std::vector<double> linear_regress(MatView train, std::span<const double> targets,
                                   MatView test, double lambda) {
  if (train.rows == 0) throw ValidationError("linear regression: empty training set");
  const size_t d = train.cols + 1;  // intercept column

  std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  for (size_t r = 0; r < train.rows; ++r) {
    const auto row = train.row(r);
    auto aug = [&](size_t j) { return j < train.cols ? static_cast<double>(row[j]) : 1.0; };
    for (size_t i = 0; i < d; ++i) {
      for (size_t j = i; j < d; ++j) a[i][j] += aug(i) * aug(j);
      b[i] += aug(i) * targets[r];
    }
  }
  for (size_t i = 0; i < d; ++i) {
    for (size_t j = 0; j < i; ++j) a[i][j] = a[j][i];
    a[i][i] += lambda;
  }

  const std::vector<double> w = solve_linear(a, std::move(b));
  std::vector<double> out(test.rows);
  for (size_t t = 0; t < test.rows; ++t) {
    const auto row = test.row(t);
    double y = w[train.cols];
    for (size_t j = 0; j < train.cols; ++j) y += w[j] * row[j];
    out[t] = y;
  }
  return out;
}

std::vector<double> knn_regress(MatView train, std::span<const double> targets, MatView test,
                                size_t k) {
  if (train.rows == 0) throw ValidationError("knn regression: empty training set");
  const size_t kk = std::min(std::max<size_t>(1, k), train.rows);
  std::vector<double> out(test.rows);
  for (size_t t = 0; t < test.rows; ++t) {
    double sum = 0.0;
    const auto nn = nearest_rows(train, test.row(t), kk);
    for (size_t idx : nn) sum += targets[idx];
    out[t] = sum / static_cast<double>(nn.size());
  }
  return out;
}

std::vector<double> tree_regress(MatView train, std::span<const double> targets,
                                 MatView test, int max_depth, size_t min_leaf) {
  if (train.rows == 0) throw ValidationError("decision tree: empty training set");
  const RegressionTree tree(train, targets, max_depth, min_leaf);
  std::vector<double> out(test.rows);
  for (size_t t = 0; t < test.rows; ++t) out[t] = tree.predict(test.row(t));
  return out;
}

std::vector<int> kmeans_cluster(MatView points, size_t k, uint64_t seed, double tol,
                                int max_iter, std::vector<double>* inertia_trace) {
  const size_t n = points.rows;
  if (k == 0 || k > n)
    throw ValidationError("kmeans: k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
  const size_t d = points.cols;
  Rng rng(mix_seed(seed, 0x4B3EA25ull));

  // k-means++ seeding
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  {
    const size_t first = rng.below(n);
    centroids.emplace_back(points.row(first).begin(), points.row(first).end());
    std::vector<double> d2(n);
    while (centroids.size() < k) {
      double total = 0.0;
      for (size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centroids) best = std::min(best, sq_euclidean(points.row(i), c));
        d2[i] = best;
        total += best;
      }
      size_t chosen = 0;
      if (total > 0.0) {
        const double r = rng.uniform() * total;
        double acc = 0.0;
        chosen = n - 1;
        for (size_t i = 0; i < n; ++i) {
          acc += d2[i];
          if (acc >= r) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = rng.below(n);  // all points coincide with some centroid
      }
      centroids.emplace_back(points.row(chosen).begin(), points.row(chosen).end());
    }
  }

  std::vector<int> assignment(n, 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    // assign
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (size_t c = 0; c < k; ++c) {
        const double dist = sq_euclidean(points.row(i), centroids[c]);
        if (dist < best) {
          best = dist;
          best_c = static_cast<int>(c);
        }
      }
      assignment[i] = best_c;
      inertia += best;
    }
    if (inertia_trace) inertia_trace->push_back(inertia);

    // update
    std::vector<std::vector<double>> next(k, std::vector<double>(d, 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const auto row = points.row(i);
      auto& c = next[assignment[i]];
      for (size_t j = 0; j < d; ++j) c[j] += row[j];
      ++counts[assignment[i]];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Revive an empty cluster at the point farthest from its centroid.
        size_t far = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
          const double dist = sq_euclidean(points.row(i), centroids[assignment[i]]);
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        next[c].assign(points.row(far).begin(), points.row(far).end());
        counts[c] = 1;
        continue;
      }
      for (size_t j = 0; j < d; ++j) next[c][j] /= static_cast<double>(counts[c]);
    }

    double shift = 0.0;
    for (size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (size_t j = 0; j < d; ++j) {
        const double dd = next[c][j] - centroids[c][j];
        s += dd * dd;
      }
      shift = std::max(shift, std::sqrt(s));
    }
    centroids = std::move(next);
    if (shift < tol) break;
  }

  // final assignment against the converged centroids
  for (size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (size_t c = 0; c < k; ++c) {
      const double dist = sq_euclidean(points.row(i), centroids[c]);
      if (dist < best) {
        best = dist;
        best_c = static_cast<int>(c);
      }
    }
    assignment[i] = best_c;
  }
  return assignment;
}

std::vector<int> dbscan_cluster(MatView points, double eps, size_t min_pts) {
  const size_t n = points.rows;
  if (n == 0) throw ValidationError("dbscan: empty input");

  std::vector<std::vector<uint32_t>> neighbors(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (cosine_distance(points.row(i), points.row(j)) <= eps)
        neighbors[i].push_back(static_cast<uint32_t>(j));
    }
  }

  std::vector<int> labels(n, -2);  // -2 = unvisited, -1 = noise
  int cluster = 0;
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] != -2) continue;
    if (neighbors[i].size() < min_pts) {
      labels[i] = -1;
      continue;
    }
    labels[i] = cluster;
    std::vector<uint32_t> frontier(neighbors[i].begin(), neighbors[i].end());
    for (size_t f = 0; f < frontier.size(); ++f) {
      const uint32_t q = frontier[f];
      if (labels[q] == -1) labels[q] = cluster;  // border point
      if (labels[q] != -2) continue;
      labels[q] = cluster;
      if (neighbors[q].size() >= min_pts)
        frontier.insert(frontier.end(), neighbors[q].begin(), neighbors[q].end());
    }
    ++cluster;
  }
  return labels;
}

std::vector<int> agglomerative_cluster(MatView points, size_t k) {
  const size_t n = points.rows;
  if (k == 0 || k > n) throw ValidationError("agglomerative: k must satisfy 1 <= k <= n");
  if (n > 20000) throw ValidationError("agglomerative: limited to 20k points");

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      dist[i][j] = dist[j][i] = cosine_distance(points.row(i), points.row(j));

  std::vector<size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);

  size_t clusters = n;
  while (clusters > k) {
    double best = std::numeric_limits<double>::infinity();
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i][j] < best) {
          best = dist[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams average-linkage update, merged cluster kept at bi.
    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      dist[bi][m] = dist[m][bi] = (ni * dist[bi][m] + nj * dist[bj][m]) / (ni + nj);
    }
    size[bi] += size[bj];
    active[bj] = false;
    parent[bj] = static_cast<int>(bi);
    --clusters;
  }

  auto find_root = [&](size_t i) {
    while (parent[i] != static_cast<int>(i)) i = static_cast<size_t>(parent[i]);
    return i;
  };
  std::vector<int> root_label(n, -1);
  int next = 0;
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const size_t root = find_root(i);
    if (root_label[root] == -1) root_label[root] = next++;
    labels[i] = root_label[root];
  }
  return labels;
}

std::string hyper_to_string(const Hyper& hyper) {
  if (hyper.empty()) return "default";
  std::string out;
  char buf[64];
  for (const auto& [key, value] : hyper) {
    if (!out.empty()) out.push_back(',');
    if (value == std::floor(value) && std::fabs(value) < 1e15)
      std::snprintf(buf, sizeof(buf), "%s=%lld", key.c_str(),
                    static_cast<long long>(value));
    else
      std::snprintf(buf, sizeof(buf), "%s=%g", key.c_str(), value);
    out += buf;
  }
  return out;
}

std::vector<std::string> algorithms_for(TaskType task) {
  switch (task) {
    case TaskType::Classification: return {"naive_bayes", "knn", "svm"};
    case TaskType::Regression: return {"linear_regression", "knn", "decision_tree"};
    case TaskType::Clustering: return {"dbscan", "kmeans", "agglomerative"};
    case TaskType::DocumentSimilarity:
    case TaskType::EntityRelatedness:
    case TaskType::SemanticAnalogies: return {"cosine_similarity"};
    case TaskType::Recommendation: return {"item_similarity"};
  }
  return {};
}

std::vector<Hyper> default_grid(TaskType task, const std::string& algo) {
  if (algo == "knn") {
    std::vector<Hyper> grid;
    for (double k : {1.0, 3.0, 5.0, 15.0}) grid.push_back({{"k", k}});
    return grid;
  }
  if (algo == "svm") {
    std::vector<Hyper> grid;
    for (double lr : {0.1, 0.01}) grid.push_back({{"lr", lr}, {"epochs", 100.0}});
    return grid;
  }
  if (algo == "decision_tree") {
    std::vector<Hyper> grid;
    for (double depth : {3.0, 5.0, -1.0}) grid.push_back({{"max_depth", depth}});
    return grid;
  }
  if (algo == "dbscan") {
    std::vector<Hyper> grid;
    for (double eps : {0.3, 0.5, 0.7}) grid.push_back({{"eps", eps}, {"min_pts", 5.0}});
    return grid;
  }
  (void)task;
  return {{}};  // single default assignment
}

std::vector<std::vector<uint32_t>> make_folds(size_t n_rows, std::span<const int> classes,
                                              size_t k, uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2 folds");
  std::vector<std::vector<uint32_t>> folds(k);
  Rng rng(mix_seed(seed, 0xF01D5ull));

  if (classes.empty()) {
    std::vector<uint32_t> order(n_rows);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);
    for (size_t i = 0; i < order.size(); ++i) folds[i % k].push_back(order[i]);
  } else {
    std::map<int, std::vector<uint32_t>> by_class;
    for (size_t i = 0; i < n_rows; ++i) by_class[classes[i]].push_back(static_cast<uint32_t>(i));
    size_t cursor = 0;
    for (auto& [cls, rows] : by_class) {
      rng.shuffle(rows);
      for (uint32_t row : rows) folds[cursor++ % k].push_back(row);
    }
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

struct TabularFeatures {
  std::vector<uint32_t> mapped_rows;    // dataset row -> mapped subset
  std::vector<uint32_t> unmapped_rows;
  std::vector<float> x;                 // |mapped_rows| x dim
  double coverage = 0.0;
  size_t dim = 0;

  MatView view() const { return {x.data(), mapped_rows.size(), dim}; }
};

TabularFeatures build_features(const TabularDataset& dataset, const EmbeddingSet& embeddings,
                               const EntityMapping& mapping) {
  TabularFeatures f;
  f.dim = embeddings.dim;
  for (uint32_t r = 0; r < dataset.entities.size(); ++r) {
    const MapEntry* entry = mapping.find(dataset.entities[r].id);
    if (entry) {
      f.mapped_rows.push_back(r);
      const auto vec = embeddings.vec(entry->kg_entity);
      f.x.insert(f.x.end(), vec.begin(), vec.end());
    } else {
      f.unmapped_rows.push_back(r);
    }
  }
  f.coverage = dataset.entities.empty()
                   ? 0.0
                   : static_cast<double>(f.mapped_rows.size()) /
                         static_cast<double>(dataset.entities.size());
  return f;
}

MatView subset(const std::vector<float>& storage, size_t dim, size_t rows) {
  return {storage.data(), rows, dim};
}

AlgoRun skipped_run(const std::string& algo, const Hyper& hyper, const std::string& reason) {
  AlgoRun run;
  run.algo = algo;
  run.hyper = hyper;
  run.skipped = true;
  run.skip_reason = reason;
  return run;
}

}  // namespace

std::vector<AlgoRun> run_tabular_task(const TabularDataset& dataset,
                                      const EmbeddingSet& embeddings,
                                      const EntityMapping& mapping, const std::string& algo,
                                      std::span<const Hyper> grid, size_t folds,
                                      uint64_t seed, int fold_filter) {
  const bool classification = dataset.task == TaskType::Classification;
  const TabularFeatures features = build_features(dataset, embeddings, mapping);
  std::vector<AlgoRun> runs;

  if (features.mapped_rows.size() < folds) {
    for (const Hyper& hyper : grid)
      runs.push_back(skipped_run(algo, hyper,
                                 "fewer mapped entities (" +
                                     std::to_string(features.mapped_rows.size()) +
                                     ") than folds (" + std::to_string(folds) + ")"));
    return runs;
  }

  // Gold targets restricted to the mapped subset.
  std::vector<int> class_ids;      // classification
  std::vector<double> reg_targets; // regression
  std::vector<int> class_of_mapped;
  std::map<std::string, int> class_index;
  if (classification) {
    std::set<std::string> distinct;
    for (uint32_t r : features.mapped_rows) distinct.insert(dataset.class_targets[r]);
    for (const std::string& c : distinct)
      class_index.emplace(c, static_cast<int>(class_index.size()));
    if (class_index.size() < 2) {
      for (const Hyper& hyper : grid)
        runs.push_back(skipped_run(algo, hyper, "fewer than 2 classes among mapped entities"));
      return runs;
    }
    for (uint32_t r : features.mapped_rows)
      class_of_mapped.push_back(class_index[dataset.class_targets[r]]);
  } else {
    for (uint32_t r : features.mapped_rows) reg_targets.push_back(dataset.numeric_targets[r]);
  }

  const auto fold_sets =
      make_folds(features.mapped_rows.size(),
                 classification ? std::span<const int>(class_of_mapped) : std::span<const int>(),
                 folds, seed);

  for (const Hyper& hyper : grid) {
    for (size_t fold = 0; fold < fold_sets.size(); ++fold) {
      if (fold_filter >= 0 && fold != static_cast<size_t>(fold_filter)) continue;
      const auto& test_rows = fold_sets[fold];
      if (test_rows.empty()) continue;

      std::vector<uint32_t> train_rows;
      for (size_t f2 = 0; f2 < fold_sets.size(); ++f2)
        if (f2 != fold)
          train_rows.insert(train_rows.end(), fold_sets[f2].begin(), fold_sets[f2].end());

      std::vector<float> train_x, test_x;
      for (uint32_t r : train_rows) {
        const auto row = features.view().row(r);
        train_x.insert(train_x.end(), row.begin(), row.end());
      }
      for (uint32_t r : test_rows) {
        const auto row = features.view().row(r);
        test_x.insert(test_x.end(), row.begin(), row.end());
      }
      const MatView train = subset(train_x, features.dim, train_rows.size());
      const MatView test = subset(test_x, features.dim, test_rows.size());

      AlgoRun run;
      run.algo = algo;
      run.hyper = hyper;
      run.fold = static_cast<uint32_t>(fold);
      try {
        std::vector<ScenarioOutcome> outcomes;
        if (classification) {
          std::vector<int> train_y, test_y;
          for (uint32_t r : train_rows) train_y.push_back(class_of_mapped[r]);
          for (uint32_t r : test_rows) test_y.push_back(class_of_mapped[r]);
          if (std::set<int>(train_y.begin(), train_y.end()).size() < 2)
            throw ValidationError("single-class training fold");

          std::vector<int> pred;
          if (algo == "naive_bayes") {
            pred = gaussian_nb_classify(train, train_y, test);
          } else if (algo == "knn") {
            pred = knn_classify(train, train_y, test,
                                static_cast<size_t>(hyper.at("k")));
          } else if (algo == "svm") {
            pred = svm_classify(train, train_y, test, hyper.at("lr"),
                                static_cast<uint32_t>(hyper.at("epochs")),
                                mix_seed(seed, fold));
          } else {
            throw ConfigError("unknown classification algorithm " + algo);
          }
          for (size_t i = 0; i < test_rows.size(); ++i)
            outcomes.push_back({pred[i] == test_y[i] ? 1.0 : 0.0, true});
          // Unmapped entities count as incorrect.
          for (size_t i = 0; i < features.unmapped_rows.size(); ++i)
            outcomes.push_back({0.0, false});
          run.metrics.push_back(apply_scenario("accuracy", outcomes, features.coverage,
                                               OutcomeAggregation::Mean,
                                               MetricDirection::HigherBetter));
        } else {
          std::vector<double> train_y, test_y;
          for (uint32_t r : train_rows) train_y.push_back(reg_targets[r]);
          for (uint32_t r : test_rows) test_y.push_back(reg_targets[r]);

          std::vector<double> pred;
          if (algo == "linear_regression") {
            pred = linear_regress(train, train_y, test);
          } else if (algo == "knn") {
            pred = knn_regress(train, train_y, test, static_cast<size_t>(hyper.at("k")));
          } else if (algo == "decision_tree") {
            pred = tree_regress(train, train_y, test,
                                static_cast<int>(hyper.at("max_depth")));
          } else {
            throw ConfigError("unknown regression algorithm " + algo);
          }
          for (size_t i = 0; i < test_rows.size(); ++i) {
            const double d = pred[i] - test_y[i];
            outcomes.push_back({d * d, true});
          }
          // Unmapped entities are predicted at the train-fold target mean.
          double train_mean = 0.0;
          for (double y : train_y) train_mean += y;
          train_mean /= static_cast<double>(train_y.size());
          for (uint32_t r : features.unmapped_rows) {
            const double d = train_mean - dataset.numeric_targets[r];
            outcomes.push_back({d * d, false});
          }
          run.metrics.push_back(apply_scenario("rmse", outcomes, features.coverage,
                                               OutcomeAggregation::RootMean,
                                               MetricDirection::LowerBetter));
        }
      } catch (const std::exception& e) {
        run.skipped = true;
        run.skip_reason = e.what();
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

std::vector<AlgoRun> run_clustering_task(const TabularDataset& dataset,
                                         const EmbeddingSet& embeddings,
                                         const EntityMapping& mapping,
                                         const std::string& algo,
                                         std::span<const Hyper> grid, uint64_t seed) {
  const TabularFeatures features = build_features(dataset, embeddings, mapping);
  std::vector<AlgoRun> runs;

  std::map<std::string, int> class_index;
  for (const std::string& c : dataset.class_targets)
    class_index.emplace(c, 0);
  {
    int next = 0;
    for (auto& [name, id] : class_index) id = next++;
  }
  const size_t k = dataset.num_clusters > 0 ? dataset.num_clusters : class_index.size();

  for (const Hyper& hyper : grid) {
    if (features.mapped_rows.size() < std::max<size_t>(2, k)) {
      runs.push_back(skipped_run(algo, hyper, "not enough mapped entities for clustering"));
      continue;
    }
    AlgoRun run;
    run.algo = algo;
    run.hyper = hyper;
    try {
      std::vector<int> pred;
      if (algo == "kmeans") {
        pred = kmeans_cluster(features.view(), k, seed);
      } else if (algo == "dbscan") {
        pred = dbscan_cluster(features.view(), hyper.at("eps"),
                              static_cast<size_t>(hyper.at("min_pts")));
      } else if (algo == "agglomerative") {
        pred = agglomerative_cluster(features.view(), k);
      } else {
        throw ConfigError("unknown clustering algorithm " + algo);
      }

      std::vector<int> gold_mapped;
      for (uint32_t r : features.mapped_rows)
        gold_mapped.push_back(class_index[dataset.class_targets[r]]);

      // All-entities view: unmapped entities form one synthetic wrong cluster.
      std::vector<int> gold_all = gold_mapped;
      std::vector<int> pred_all = pred;
      int synthetic = -1;
      for (int p : pred) synthetic = std::max(synthetic, p);
      ++synthetic;
      for (uint32_t r : features.unmapped_rows) {
        gold_all.push_back(class_index[dataset.class_targets[r]]);
        pred_all.push_back(synthetic);
      }

      auto push = [&](const std::string& name, double known, double all) {
        ScenarioMetrics m;
        m.name = name;
        m.value_known = known;
        m.value_all = all;
        m.coverage = features.coverage;
        m.direction = MetricDirection::HigherBetter;
        run.metrics.push_back(std::move(m));
      };
      push("ari", ari(gold_mapped, pred), ari(gold_all, pred_all));
      push("nmi", nmi(gold_mapped, pred), nmi(gold_all, pred_all));
      // Unmapped entities are always errors for the assignment accuracy.
      push("accuracy", cluster_accuracy(gold_mapped, pred),
           cluster_accuracy(gold_mapped, pred) * features.coverage);
    } catch (const std::exception& e) {
      run.skipped = true;
      run.skip_reason = e.what();
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace kgeval
