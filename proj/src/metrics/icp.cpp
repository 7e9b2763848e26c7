#include "gdyn/metrics/icp.hpp"

#include "gdyn/core/errors.hpp"
#include "gdyn/metrics/kd_tree.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace gdyn {

namespace {

void require_non_collinear(const std::vector<Vec3>& pts, const char* which)
{
    if (pts.size() < 3)
        throw DegenerateRegistration(std::string(which) + " cloud has fewer than 3 points");
    Vec3 mean = Vec3::Zero();
    for (const Vec3& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : pts) cov += (p - mean) * (p - mean).transpose();
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const double largest = eig.eigenvalues()(2);
    const double second = eig.eigenvalues()(1);
    if (!(second > 1e-12 * std::max(largest, 1e-300)))
        throw DegenerateRegistration(std::string(which) + " cloud is collinear");
}

} // namespace

IcpResult icp_align(const std::vector<Vec3>& source, const std::vector<Vec3>& target,
                    int max_iters, double tol)
{
    require_non_collinear(source, "source");
    require_non_collinear(target, "target");

    const KdTree tree(target);
    const int n = static_cast<int>(source.size());

    IcpResult result;
    std::vector<Vec3> corr(n);
    double prev_rms = std::numeric_limits<double>::infinity();

    for (int it = 0; it < max_iters; ++it) {
        // Correspondences for the currently transformed source.
        double sq_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const Vec3 moved = result.transform.apply(source[i]);
            const KdTree::Result nn = tree.nearest_l2(moved);
            corr[i] = target[nn.index];
            sq_sum += nn.distance * nn.distance;
        }
        result.rms = std::sqrt(sq_sum / n);
        result.iterations = it;
        if (std::abs(prev_rms - result.rms) < tol) break;
        prev_rms = result.rms;

        // Procrustes between the original source and its correspondences.
        Vec3 src_mean = Vec3::Zero(), dst_mean = Vec3::Zero();
        for (int i = 0; i < n; ++i) {
            src_mean += source[i];
            dst_mean += corr[i];
        }
        src_mean /= n;
        dst_mean /= n;
        Mat3 cross = Mat3::Zero();
        for (int i = 0; i < n; ++i)
            cross += (source[i] - src_mean) * (corr[i] - dst_mean).transpose();
        const Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Mat3 d = Mat3::Identity();
        d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
        const Mat3 rot = svd.matrixV() * d * svd.matrixU().transpose();
        result.transform.rotation = Quat(rot).normalized();
        result.transform.translation = dst_mean - rot * src_mean;
    }
    return result;
}

} // namespace gdyn
