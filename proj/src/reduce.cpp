#include "qf/reduce.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "qf/errors.hpp"
#include "qf/fpm.hpp"
#include "qf/rng.hpp"

namespace qf {

Quorum quorum(int n_trees) {
    if (n_trees < 1) throw ArgError("quorum: n_trees must be >= 1");
    return Quorum{n_trees / 2 + 1, n_trees};
}

namespace {

PathSet keep_indices(const PathSet& ps, const std::vector<int>& idx) {
    PathSet out;
    out.source_size = ps.source_size;
    out.paths.reserve(idx.size());
    for (int i : idx) out.paths.push_back(ps.paths[i]);
    return out;
}

}  // namespace

PathSet reduce_by_association(const PathSet& ps, Quorum q, double min_support) {
    const int n = static_cast<int>(ps.size());
    if (n < q.value)
        throw ArgError("reduce_by_association: fewer paths than quorum");
    if (n == q.value) return ps;

    std::vector<Transaction> txns(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i)
        txns[i].items = ps.paths[i].feature_set();

    auto itemsets = fpgrowth(txns, min_support);
    if (itemsets.empty()) return ps;

    // Support is anti-monotone, so the best support of a frequent itemset
    // covering a path's feature set is the support of the set itself.
    std::map<std::vector<int>, double> support_of;
    for (const auto& fs : itemsets) support_of[fs.items] = fs.support;

    std::vector<double> rank(ps.size(), 0.0);
    bool any_ranked = false;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto it = support_of.find(txns[i].items);
        if (it != support_of.end()) {
            rank[i] = it->second;
            any_ranked = true;
        }
    }
    if (!any_ranked) return ps;

    std::vector<int> order(ps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return rank[a] > rank[b]; });
    order.resize(static_cast<std::size_t>(q.value));
    std::sort(order.begin(), order.end());
    return keep_indices(ps, order);
}

Eigen::MatrixXd jaccard_distances(const PathSet& ps) {
    const auto n = static_cast<Eigen::Index>(ps.size());
    std::vector<std::vector<int>> sets(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) sets[i] = ps.paths[i].feature_set();

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto& a = sets[i];
            const auto& b = sets[j];
            std::size_t inter = 0, ai = 0, bi = 0;
            while (ai < a.size() && bi < b.size()) {
                if (a[ai] == b[bi]) ++inter, ++ai, ++bi;
                else if (a[ai] < b[bi]) ++ai;
                else ++bi;
            }
            std::size_t uni = a.size() + b.size() - inter;
            double dist = uni == 0 ? 0.0
                                   : 1.0 - static_cast<double>(inter) /
                                               static_cast<double>(uni);
            d(i, j) = d(j, i) = dist;
        }
    }
    return d;
}

namespace {

double assignment_cost(const Eigen::MatrixXd& dist, const std::vector<int>& medoids) {
    double cost = 0.0;
    for (Eigen::Index p = 0; p < dist.rows(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (int m : medoids) best = std::min(best, dist(p, m));
        cost += best;
    }
    return cost;
}

void assign_points(const Eigen::MatrixXd& dist, KMedoidsResult& r) {
    r.assignment.assign(static_cast<std::size_t>(dist.rows()), 0);
    r.cost = 0.0;
    for (Eigen::Index p = 0; p < dist.rows(); ++p) {
        int best = 0;
        for (std::size_t m = 1; m < r.medoids.size(); ++m)
            if (dist(p, r.medoids[m]) < dist(p, r.medoids[best]))
                best = static_cast<int>(m);
        r.assignment[static_cast<std::size_t>(p)] = best;
        r.cost += dist(p, r.medoids[best]);
    }
}

// Number of k-subsets, saturating.
std::uint64_t n_choose_k(int n, int k) {
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
        if (c > (1ull << 40)) return 1ull << 40;
    }
    return c;
}

KMedoidsResult exhaustive_k_medoids(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    std::vector<int> medoids(static_cast<std::size_t>(k));
    std::iota(medoids.begin(), medoids.end(), 0);

    KMedoidsResult best;
    best.cost = std::numeric_limits<double>::infinity();
    // enumerate k-combinations in ascending lexicographic order; ties keep
    // the first (lexicographically smallest) optimum
    while (true) {
        double cost = assignment_cost(dist, medoids);
        if (cost < best.cost) {
            best.medoids = medoids;
            best.cost = cost;
        }
        int i = k - 1;
        while (i >= 0 && medoids[i] == n - k + i) --i;
        if (i < 0) break;
        ++medoids[i];
        for (int j = i + 1; j < k; ++j) medoids[j] = medoids[j - 1] + 1;
    }
    assign_points(dist, best);
    return best;
}

KMedoidsResult pam_k_medoids(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    KMedoidsResult r;

    // BUILD: greedy, lowest index on ties
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    for (int step = 0; step < k; ++step) {
        int best_p = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int p = 0; p < n; ++p) {
            if (chosen[p]) continue;
            r.medoids.push_back(p);
            double cost = assignment_cost(dist, r.medoids);
            r.medoids.pop_back();
            if (cost < best_cost) {
                best_cost = cost;
                best_p = p;
            }
        }
        chosen[best_p] = true;
        r.medoids.push_back(best_p);
    }

    // SWAP until no strict improvement; best improving swap first, ties to
    // the lexicographically smallest (medoid position, candidate)
    double cost = assignment_cost(dist, r.medoids);
    for (;;) {
        int swap_m = -1, swap_p = -1;
        double swap_cost = cost;
        for (std::size_t m = 0; m < r.medoids.size(); ++m) {
            int saved = r.medoids[m];
            for (int p = 0; p < n; ++p) {
                if (chosen[p]) continue;
                r.medoids[m] = p;
                double c = assignment_cost(dist, r.medoids);
                if (c < swap_cost) {
                    swap_cost = c;
                    swap_m = static_cast<int>(m);
                    swap_p = p;
                }
            }
            r.medoids[m] = saved;
        }
        if (swap_m < 0) break;
        chosen[r.medoids[swap_m]] = false;
        chosen[swap_p] = true;
        r.medoids[swap_m] = swap_p;
        cost = swap_cost;
    }
    std::sort(r.medoids.begin(), r.medoids.end());
    assign_points(dist, r);
    return r;
}

}  // namespace

KMedoidsResult k_medoids(const Eigen::MatrixXd& dist, int k) {
    const int n = static_cast<int>(dist.rows());
    if (k < 1) throw ArgError("k_medoids: k must be >= 1");
    k = std::min(k, n);
    if (n_choose_k(n, k) <= 20000) return exhaustive_k_medoids(dist, k);
    return pam_k_medoids(dist, k);
}

double mean_silhouette(const Eigen::MatrixXd& dist,
                       const std::vector<int>& assignment, int k) {
    const auto n = static_cast<std::size_t>(dist.rows());
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        int own = assignment[i];
        if (sizes[static_cast<std::size_t>(own)] <= 1) continue;  // s(i) = 0
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                sum[static_cast<std::size_t>(assignment[j])] +=
                    dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        double a = sum[static_cast<std::size_t>(own)] /
                   static_cast<double>(sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
            b = std::min(b, sum[static_cast<std::size_t>(c)] /
                                static_cast<double>(sizes[static_cast<std::size_t>(c)]));
        }
        if (!std::isfinite(b)) continue;
        double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

PathSet reduce_by_clustering(const PathSet& ps, Quorum q, int k) {
    const int n = static_cast<int>(ps.size());
    if (n < q.value)
        throw ArgError("reduce_by_clustering: fewer paths than quorum");
    if (n == q.value) return ps;

    Eigen::MatrixXd dist = jaccard_distances(ps);

    KMedoidsResult res;
    if (k == 0) {
        // silhouette auto-selection over k in {2..5}; smallest k on ties
        double best_s = -std::numeric_limits<double>::infinity();
        for (int kk = 2; kk <= std::min(5, n); ++kk) {
            KMedoidsResult r = k_medoids(dist, kk);
            double s = mean_silhouette(dist, r.assignment, kk);
            if (s > best_s) {
                best_s = s;
                res = std::move(r);
            }
        }
    } else {
        res = k_medoids(dist, std::min(k, n));
    }

    const int n_clusters = static_cast<int>(res.medoids.size());
    std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n_clusters));
    for (int p = 0; p < n; ++p)
        clusters[static_cast<std::size_t>(res.assignment[p])].push_back(p);

    // largest clusters first; equal sizes resolve to the lower medoid index
    std::vector<int> cluster_order(static_cast<std::size_t>(n_clusters));
    std::iota(cluster_order.begin(), cluster_order.end(), 0);
    std::sort(cluster_order.begin(), cluster_order.end(), [&](int a, int b) {
        if (clusters[a].size() != clusters[b].size())
            return clusters[a].size() > clusters[b].size();
        return res.medoids[a] < res.medoids[b];
    });

    std::vector<int> kept;
    for (int c : cluster_order) {
        if (static_cast<int>(kept.size()) >= q.value) break;
        kept.insert(kept.end(), clusters[c].begin(), clusters[c].end());
    }
    std::sort(kept.begin(), kept.end());
    return keep_indices(ps, kept);
}

PathSet reduce_by_random(const PathSet& ps, Quorum q, std::uint64_t seed) {
    const int n = static_cast<int>(ps.size());
    if (n < q.value)
        throw ArgError("reduce_by_random: fewer paths than quorum");
    std::vector<int> idx(ps.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    while (static_cast<int>(idx.size()) > q.value) {
        auto drop = static_cast<std::size_t>(rng.below(idx.size()));
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return keep_indices(ps, idx);
}

std::pair<PathSet, ReductionTrace> reduce_pipeline(const PathSet& ps, Quorum q,
                                                   const ReductionConfig& cfg) {
    ReductionTrace trace;
    trace.seed = cfg.seed;
    if (static_cast<int>(ps.size()) < q.value) {
        trace.under_quorum = true;
        return {ps, trace};
    }

    PathSet cur = ps;
    if (cfg.association_enabled) {
        int before = static_cast<int>(cur.size());
        cur = reduce_by_association(cur, q, cfg.association_min_support);
        trace.stages.push_back({"association", before, static_cast<int>(cur.size())});
    }
    if (cfg.clustering_enabled) {
        int before = static_cast<int>(cur.size());
        cur = reduce_by_clustering(cur, q, cfg.clustering_k);
        trace.stages.push_back({"clustering", before, static_cast<int>(cur.size())});
    }
    {
        int before = static_cast<int>(cur.size());
        cur = reduce_by_random(cur, q, cfg.seed);
        trace.stages.push_back({"random", before, static_cast<int>(cur.size())});
    }
    return {cur, trace};
}

} // namespace qf
