#pragma once

#include "shrinker/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace shrinker {

// Static 3-d tree over a point set. Points are copied; queries are const and thread-safe.
class KdTree {
public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    index_.resize(points_.size());
    for (size_t i = 0; i < index_.size(); ++i) index_[i] = static_cast<int>(i);
    if (!index_.empty()) root_ = build(0, static_cast<int>(index_.size()), 0);
  }

  size_t size() const { return points_.size(); }
  const Vec3& point(int i) const { return points_[i]; }

  // Nearest point to q; returns {-1, inf} on an empty tree.
  std::pair<int, double> nearest(const Vec3& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    if (root_ >= 0) nearest_rec(root_, q, best, best_d2);
    return {best, std::sqrt(best_d2)};
  }

  // All points with |p - q| <= radius.
  std::vector<int> within(const Vec3& q, double radius) const {
    std::vector<int> out;
    if (root_ >= 0) within_rec(root_, q, radius * radius, out);
    return out;
  }

private:
  struct Node {
    int begin, end;   // leaf range in index_
    int dim = -1;     // split dimension, -1 for leaves
    double split = 0;
    int left = -1, right = -1;
  };

  static constexpr int kLeafSize = 8;

  int build(int begin, int end, int depth) {
    Node node{begin, end};
    if (end - begin > kLeafSize) {
      Vec3 lo = points_[index_[begin]], hi = lo;
      for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[index_[i]]);
        hi = hi.cwiseMax(points_[index_[i]]);
      }
      int dim = 0;
      (hi - lo).maxCoeff(&dim);
      int mid = (begin + end) / 2;
      std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                       [&](int a, int b) { return points_[a][dim] < points_[b][dim]; });
      node.dim = dim;
      node.split = points_[index_[mid]][dim];
      int self = static_cast<int>(nodes_.size());
      nodes_.push_back(node);
      int l = build(begin, mid, depth + 1);
      int r = build(mid, end, depth + 1);
      nodes_[self].left = l;
      nodes_[self].right = r;
      return self;
    }
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void nearest_rec(int n, const Vec3& q, int& best, double& best_d2) const {
    const Node& node = nodes_[n];
    if (node.dim < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        double d2 = (points_[index_[i]] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && index_[i] < best)) {
          best_d2 = d2;
          best = index_[i];
        }
      }
      return;
    }
    double diff = q[node.dim] - node.split;
    int first = diff < 0 ? node.left : node.right;
    int second = diff < 0 ? node.right : node.left;
    nearest_rec(first, q, best, best_d2);
    if (diff * diff <= best_d2) nearest_rec(second, q, best, best_d2);
  }

  void within_rec(int n, const Vec3& q, double r2, std::vector<int>& out) const {
    const Node& node = nodes_[n];
    if (node.dim < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        if ((points_[index_[i]] - q).squaredNorm() <= r2) out.push_back(index_[i]);
      }
      return;
    }
    double diff = q[node.dim] - node.split;
    if (diff <= 0 || diff * diff <= r2) within_rec(node.left, q, r2, out);
    if (diff >= 0 || diff * diff <= r2) within_rec(node.right, q, r2, out);
  }

  std::vector<Vec3> points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

} // namespace shrinker
