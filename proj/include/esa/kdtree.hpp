#pragma once

#include <Eigen/Core>

#include <vector>

namespace esa {

/// Static 3-d tree over the columns of a point matrix.
class KdTree {
public:
    explicit KdTree(Eigen::Matrix3Xd points);

    struct Hit {
        int index = -1;
        double squared_distance = 0.0;
    };

    /// Nearest stored point; ties go to the lower index.
    Hit nearest(const Eigen::Vector3d& query) const;
    int size() const noexcept { return static_cast<int>(points_.cols()); }
    const Eigen::Matrix3Xd& points() const noexcept { return points_; }

private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };

    int build(std::vector<int>& order, int begin, int end, int depth);
    void search(int node, const Eigen::Vector3d& q, Hit& best) const;

    Eigen::Matrix3Xd points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace esa
