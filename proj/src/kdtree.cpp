#include "esa/kdtree.hpp"

#include "esa/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace esa {

KdTree::KdTree(Eigen::Matrix3Xd points) : points_(std::move(points)) {
    if (points_.cols() == 0) throw ArgumentError("k-d tree needs at least one point");
    if (!points_.allFinite()) throw InputError("k-d tree points must be finite");
    std::vector<int> order(static_cast<std::size_t>(points_.cols()));
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(order.size());
    root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree::build(std::vector<int>& order, int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int a, int b) {
        const double pa = points_(axis, a);
        const double pb = points_(axis, b);
        return pa < pb || (pa == pb && a < b);
    });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({order[static_cast<std::size_t>(mid)], axis, -1, -1});
    const int left = build(order, begin, mid, depth + 1);
    const int right = build(order, mid + 1, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void KdTree::search(int node, const Eigen::Vector3d& q, Hit& best) const {
    if (node < 0) return;
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    const double d2 = (points_.col(n.point) - q).squaredNorm();
    if (d2 < best.squared_distance || (d2 == best.squared_distance && n.point < best.index)) {
        best.squared_distance = d2;
        best.index = n.point;
    }
    const double diff = q[n.axis] - points_(n.axis, n.point);
    const int near = diff <= 0.0 ? n.left : n.right;
    const int far = diff <= 0.0 ? n.right : n.left;
    search(near, q, best);
    if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Eigen::Vector3d& query) const {
    Hit best{-1, std::numeric_limits<double>::infinity()};
    search(root_, query, best);
    return best;
}

} // namespace esa
