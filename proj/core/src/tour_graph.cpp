#include "firewatch/tour_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace firewatch {

namespace {
constexpr double kImproveEps = 1e-12;

double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
}  // namespace

std::vector<MstEdge> build_mst(std::span<const Vec2> points) {
  const int n = static_cast<int>(points.size());
  std::vector<MstEdge> edges;
  if (n <= 1) return edges;

  std::vector<bool> in_tree(n, false);
  std::vector<double> best_w(n, std::numeric_limits<double>::infinity());
  std::vector<int> best_from(n, -1);

  in_tree[0] = true;
  for (int v = 1; v < n; ++v) {
    best_w[v] = dist(points[0], points[v]);
    best_from[v] = 0;
  }

  for (int it = 1; it < n; ++it) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      if (pick == -1) {
        pick = v;
        continue;
      }
      const double w = best_w[v];
      const double pw = best_w[pick];
      if (w < pw) {
        pick = v;
      } else if (w == pw) {
        // Tie: lowest (min id, max id) endpoint pair wins.
        const int va = std::min(v, best_from[v]), vb = std::max(v, best_from[v]);
        const int pa = std::min(pick, best_from[pick]),
                  pb = std::max(pick, best_from[pick]);
        if (va < pa || (va == pa && vb < pb)) pick = v;
      }
    }
    in_tree[pick] = true;
    edges.push_back({std::min(pick, best_from[pick]),
                     std::max(pick, best_from[pick]), best_w[pick]});
    for (int v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double w = dist(points[pick], points[v]);
      if (w < best_w[v] || (w == best_w[v] && pick < best_from[v])) {
        best_w[v] = w;
        best_from[v] = pick;
      }
    }
  }
  return edges;
}

double mst_weight(const std::vector<MstEdge>& edges) {
  double total = 0.0;
  for (const MstEdge& e : edges) total += e.weight;
  return total;
}

std::vector<int> hamiltonian_from_mst(std::span<const Vec2> points,
                                      const std::vector<MstEdge>& tree) {
  const int n = static_cast<int>(points.size());
  if (n == 0) return {};
  if (n == 1) return {0};

  std::vector<std::vector<int>> adj(n);
  for (const MstEdge& e : tree) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());

  std::vector<int> cycle;
  cycle.reserve(n);
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (seen[v]) continue;
    seen[v] = true;
    cycle.push_back(v);
    for (auto it = adj[v].rbegin(); it != adj[v].rend(); ++it) {
      if (!seen[*it]) stack.push_back(*it);
    }
  }
  return cycle;
}

int two_opt(std::vector<int>& cycle, std::span<const Vec2> points,
            int max_passes) {
  const int n = static_cast<int>(cycle.size());
  int applied = 0;
  if (n < 4) return applied;

  for (int pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;  // same edge pair
        const Vec2& a = points[cycle[i]];
        const Vec2& a_next = points[cycle[i + 1]];
        const Vec2& b = points[cycle[j]];
        const Vec2& b_next = points[cycle[(j + 1) % n]];
        const double delta =
            dist(a, b) + dist(a_next, b_next) - dist(a, a_next) - dist(b, b_next);
        if (delta < -kImproveEps) {
          std::reverse(cycle.begin() + i + 1, cycle.begin() + j + 1);
          ++applied;
          improved = true;
        }
      }
    }
    if (!improved) break;
  }
  return applied;
}

double path_length(std::span<const int> cycle, std::span<const Vec2> points) {
  const int n = static_cast<int>(cycle.size());
  if (n < 2) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += dist(points[cycle[i]], points[cycle[(i + 1) % n]]);
  }
  return total;
}

namespace {

// One greedy grouping round. Returns true if anything merged.
bool merge_round(std::vector<TourNode>& nodes, double radius, int k_max) {
  const int n = static_cast<int>(nodes.size());
  std::vector<bool> used(n, false);
  std::vector<TourNode> out;
  bool merged_any = false;

  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    std::vector<int> group{i};
    int member_total = static_cast<int>(nodes[i].members.size());
    for (int j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      const int j_members = static_cast<int>(nodes[j].members.size());
      if (member_total + j_members > k_max) continue;
      bool overlaps_all = true;
      for (int g : group) {
        if (dist(nodes[g].pos, nodes[j].pos) > 2.0 * radius) {
          overlaps_all = false;
          break;
        }
      }
      if (!overlaps_all) continue;
      used[j] = true;
      group.push_back(j);
      member_total += j_members;
    }
    if (group.size() == 1) {
      out.push_back(nodes[i]);
      continue;
    }
    merged_any = true;
    TourNode node;
    Vec2 weighted = Vec2::Zero();
    int count = 0;
    for (int g : group) {
      const int m = static_cast<int>(nodes[g].members.size());
      weighted += nodes[g].pos * static_cast<double>(m);
      count += m;
      node.members.insert(node.members.end(), nodes[g].members.begin(),
                          nodes[g].members.end());
    }
    node.pos = weighted / static_cast<double>(count);
    std::sort(node.members.begin(), node.members.end());
    out.push_back(std::move(node));
  }
  nodes = std::move(out);
  return merged_any;
}

}  // namespace

std::vector<TourNode> steiner_merge(std::span<const TourNode> nodes,
                                    double radius, int k_max) {
  std::vector<TourNode> work(nodes.begin(), nodes.end());
  if (radius <= 0.0 || k_max < 2) return work;
  while (merge_round(work, radius, k_max)) {
  }
  return work;
}

std::vector<TourNode> steiner_merge(std::span<const Vec2> points,
                                    std::span<const int> ids, double radius,
                                    int k_max) {
  std::vector<TourNode> nodes;
  nodes.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    TourNode n;
    n.pos = points[i];
    n.members = {ids.empty() ? static_cast<int>(i) : ids[i]};
    nodes.push_back(std::move(n));
  }
  return steiner_merge(std::span<const TourNode>(nodes), radius, k_max);
}

Partition kmeans_partition(std::span<const Vec2> points, int k, RngStream& rng,
                           int max_iters) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || k > n) {
    throw std::invalid_argument("kmeans_partition: k must be in [1, |points|]");
  }

  Partition part;
  part.centroids.reserve(k);

  // k-means++ seeding.
  part.centroids.push_back(points[rng.uniform_int(n)]);
  std::vector<double> d2(n, 0.0);
  while (static_cast<int>(part.centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& c : part.centroids) {
        best = std::min(best, (points[i] - c).squaredNorm());
      }
      d2[i] = best;
      total += best;
    }
    int pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_int(n));
    }
    part.centroids.push_back(points[pick]);
  }

  part.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points[i] - part.centroids[c]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != part.assignment[i]) {
        part.assignment[i] = best;
        changed = true;
      }
    }

    std::vector<Vec2> sums(k, Vec2::Zero());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums[part.assignment[i]] += points[i];
      ++counts[part.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        part.centroids[c] = sums[c] / counts[c];
      } else {
        // Re-seed an empty cluster with the point farthest from its centroid.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (points[i] - part.centroids[part.assignment[i]]).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        part.centroids[c] = points[far];
        part.assignment[far] = c;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
  }
  return part;
}

TourGraph build_tour(std::vector<TourNode> nodes, int two_opt_budget) {
  TourGraph g;
  g.nodes = std::move(nodes);
  std::vector<Vec2> pos;
  pos.reserve(g.nodes.size());
  for (const TourNode& n : g.nodes) pos.push_back(n.pos);
  g.mst_edges = build_mst(pos);
  g.mst_length = mst_weight(g.mst_edges);
  g.cycle = hamiltonian_from_mst(pos, g.mst_edges);
  two_opt(g.cycle, pos, two_opt_budget);
  g.length = path_length(g.cycle, pos);
  return g;
}

}  // namespace firewatch
