#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgeval/dataset.hpp"
#include "kgeval/embedding.hpp"
#include "kgeval/metrics.hpp"

namespace kgeval {

// Row-major matrix view over float features.
struct MatView {
  const float* data = nullptr;
  size_t rows = 0;
  size_t cols = 0;
  std::span<const float> row(size_t r) const { return {data + r * cols, cols}; }
};

// ---- classifiers ----------------------------------------------------------

// k nearest by cosine distance, majority vote, ties by smallest class label.
// k is clamped to the training size.
std::vector<int> knn_classify(MatView train, std::span<const int> labels, MatView test,
                              size_t k);

// Gaussian likelihoods with per-feature variance floored at 1e-9, log-space.
std::vector<int> gaussian_nb_classify(MatView train, std::span<const int> labels,
                                      MatView test);

// Linear one-vs-rest hinge loss via SGD (fixed epochs, seeded), argmax margin.
std::vector<int> svm_classify(MatView train, std::span<const int> labels, MatView test,
                              double learning_rate, uint32_t epochs, uint64_t seed);

// ---- regressors -----------------------------------------------------------

// Ridge closed form with intercept; lambda stabilizes the normal equations.
std::vector<double> linear_regress(MatView train, std::span<const double> targets,
                                   MatView test, double lambda = 1e-6);

std::vector<double> knn_regress(MatView train, std::span<const double> targets, MatView test,
                                size_t k);

// CART with variance-reduction splits at midpoints, deterministic first-best
// feature order. max_depth < 0 means unlimited.
std::vector<double> tree_regress(MatView train, std::span<const double> targets,
                                 MatView test, int max_depth, size_t min_leaf = 1);

// ---- clusterers -----------------------------------------------------------

// k-means++ init (seeded), Lloyd iterations until centroid shift < tol or
// max_iter. Optionally reports the inertia after every iteration.
std::vector<int> kmeans_cluster(MatView points, size_t k, uint64_t seed, double tol = 1e-6,
                                int max_iter = 300,
                                std::vector<double>* inertia_trace = nullptr);

// Density clustering on cosine distance; noise labeled -1. The eps
// neighborhood includes the point itself.
std::vector<int> dbscan_cluster(MatView points, double eps, size_t min_pts);

// Average linkage on cosine distance, cut at k clusters.
std::vector<int> agglomerative_cluster(MatView points, size_t k);

// ---- task running ---------------------------------------------------------

using Hyper = std::map<std::string, double>;
std::string hyper_to_string(const Hyper& hyper);

std::vector<std::string> algorithms_for(TaskType task);
std::vector<Hyper> default_grid(TaskType task, const std::string& algo);

// One executed (hyper assignment, fold) cell.
struct AlgoRun {
  std::string algo;
  Hyper hyper;
  uint32_t fold = 0;
  std::vector<ScenarioMetrics> metrics;
  bool skipped = false;
  std::string skip_reason;
};

// Stratified by class when `classes` is non-empty, otherwise shuffled.
std::vector<std::vector<uint32_t>> make_folds(size_t n_rows, std::span<const int> classes,
                                              size_t k, uint64_t seed);

// Cross-validated classification/regression over mapped entities; the
// scenario rule penalizes unmapped entities (wrong for classification,
// train-fold-mean prediction for regression).
std::vector<AlgoRun> run_tabular_task(const TabularDataset& dataset,
                                      const EmbeddingSet& embeddings,
                                      const EntityMapping& mapping, const std::string& algo,
                                      std::span<const Hyper> grid, size_t folds,
                                      uint64_t seed, int fold_filter = -1);

// Clustering of the mapped entities; unmapped entities count as errors (they
// form one synthetic wrong cluster for ARI/NMI).
std::vector<AlgoRun> run_clustering_task(const TabularDataset& dataset,
                                         const EmbeddingSet& embeddings,
                                         const EntityMapping& mapping,
                                         const std::string& algo,
                                         std::span<const Hyper> grid, uint64_t seed);

}  // namespace kgeval
