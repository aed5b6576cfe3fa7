#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qf/paths.hpp"

namespace qf {

/// Minimum number of votes that fixes a majority prediction regardless of
/// the remaining votes: floor(|T|/2 + 1).
struct Quorum {
    int value = 0;
    int source_size = 0;
};

Quorum quorum(int n_trees);

struct StageTrace {
    std::string name;
    int before = 0;
    int after = 0;
};

struct ReductionTrace {
    std::vector<StageTrace> stages;
    std::uint64_t seed = 0;
    bool under_quorum = false;  // input was already below quorum; left unchanged
};

struct ReductionConfig {
    bool association_enabled = true;
    double association_min_support = 0.1;
    bool clustering_enabled = true;
    int clustering_k = 2;  // 0 = silhouette auto-selection over k in {2..5}
    std::uint64_t seed = 0;
};

/// Stage a: mine frequent feature sets over the paths (each path's feature
/// set is one transaction), rank each path by the best support of a frequent
/// itemset covering its full feature set, and keep the top-ranked paths down
/// to the quorum floor. When nothing reaches min_support the set is returned
/// unchanged.
PathSet reduce_by_association(const PathSet& ps, Quorum q, double min_support);

/// Stage b: Jaccard distances on feature sets, k-medoids, then whole clusters
/// retained in decreasing size order until at least quorum paths are kept.
PathSet reduce_by_clustering(const PathSet& ps, Quorum q, int k);

/// Stage c: uniformly drop seeded-random paths until exactly quorum remain.
PathSet reduce_by_random(const PathSet& ps, Quorum q, std::uint64_t seed);

/// Stages a, b, c in order, each respecting the quorum floor; the final size
/// equals the quorum whenever the input had at least quorum paths. An input
/// already below quorum is returned unchanged with the trace flagged.
std::pair<PathSet, ReductionTrace> reduce_pipeline(const PathSet& ps, Quorum q,
                                                   const ReductionConfig& cfg);

// Clustering internals, exposed for direct verification.

Eigen::MatrixXd jaccard_distances(const PathSet& ps);

struct KMedoidsResult {
    std::vector<int> medoids;     // point indices, sorted ascending
    std::vector<int> assignment;  // per point: position in `medoids`
    double cost = 0.0;            // sum of distances to assigned medoids
};

/// Deterministic k-medoids on a precomputed distance matrix: exhaustive
/// medoid search when the combination count is small, greedy BUILD + SWAP
/// otherwise. Ties always resolve to the lexicographically smallest medoid
/// set / lowest index, so results are reproducible without randomness.
KMedoidsResult k_medoids(const Eigen::MatrixXd& dist, int k);

double mean_silhouette(const Eigen::MatrixXd& dist,
                       const std::vector<int>& assignment, int k);

} // namespace qf
