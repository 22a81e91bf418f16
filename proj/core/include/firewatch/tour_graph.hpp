#pragma once

#include <span>
#include <vector>

#include "firewatch/fire_sim.hpp"
#include "firewatch/rng.hpp"

namespace firewatch {

struct MstEdge {
  int a = 0;  // a < b
  int b = 0;
  double weight = 0.0;
};

// A tour node after close-enough merging: a visit position plus the ids of
// the member spots it stands in for.
struct TourNode {
  Vec2 pos = Vec2::Zero();
  std::vector<int> members;
};

// Prim MST over the complete Euclidean graph. Deterministic: ties go to the
// lowest (min id, max id) pair. One point yields an empty edge set.
std::vector<MstEdge> build_mst(std::span<const Vec2> points);

double mst_weight(const std::vector<MstEdge>& edges);

// Double-tree tour: preorder walk of the doubled MST with shortcutting,
// rooted at node 0, children in ascending id order. Cycle length is at most
// twice the tree weight.
std::vector<int> hamiltonian_from_mst(std::span<const Vec2> points,
                                      const std::vector<MstEdge>& tree);

// First-improvement 2-opt over lexicographic edge pairs; at most max_passes
// sweeps. Returns the number of improving moves applied. Never lengthens.
int two_opt(std::vector<int>& cycle, std::span<const Vec2> points,
            int max_passes = 50);

// Closed-cycle Euclidean length (includes the closing edge).
double path_length(std::span<const int> cycle, std::span<const Vec2> points);

// Steiner-zone merging: greedily groups nodes whose delta-disks pairwise
// overlap, capping total member count at k_max, and replaces each group by
// the centroid of its member spots. Rounds repeat until nothing merges, so
// the operation is idempotent.
std::vector<TourNode> steiner_merge(std::span<const TourNode> nodes,
                                    double radius, int k_max);
std::vector<TourNode> steiner_merge(std::span<const Vec2> points,
                                    std::span<const int> ids, double radius,
                                    int k_max);

struct Partition {
  std::vector<int> assignment;  // per-point cluster index in [0, k)
  std::vector<Vec2> centroids;
};

// Seeded k-means++ with Lloyd iterations (at most max_iters). Deterministic
// under a fixed stream. Throws std::invalid_argument when k > |points| or
// k < 1.
Partition kmeans_partition(std::span<const Vec2> points, int k, RngStream& rng,
                           int max_iters = 100);

// Merged-node graph with its spanning tree and service cycle.
struct TourGraph {
  std::vector<TourNode> nodes;
  std::vector<MstEdge> mst_edges;
  std::vector<int> cycle;
  double length = 0.0;      // closed cycle length
  double mst_length = 0.0;  // spanning tree weight (the bound input)
};

TourGraph build_tour(std::vector<TourNode> nodes, int two_opt_budget);

}  // namespace firewatch
