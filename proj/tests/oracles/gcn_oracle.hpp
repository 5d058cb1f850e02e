#pragma once

// Loop-form GCN and joint-layer forward passes, plus a central-difference
// gradient helper.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "handtrack/tensor.hpp"
#include "handtrack/tracking/gcn.hpp"

namespace oracle {

// Bones of the 21-joint hand: wrist to each finger base, then along each finger.
inline Eigen::MatrixXd hand_adjacency_normalized() {
    const int n = 21;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int finger = 0; finger < 5; ++finger) {
        int prev = 0;
        for (int k = 1; k <= 4; ++k) {
            const int j = 4 * finger + k;
            a[prev][j] = a[j][prev] = 1.0;
            prev = j;
        }
    }
    for (int i = 0; i < n; ++i) a[i][i] += 1.0;
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) deg[i] += a[i][j];
    Eigen::MatrixXd out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = a[i][j] / std::sqrt(deg[i] * deg[j]);
    return out;
}

inline Eigen::VectorXd gcn_embed(const Eigen::MatrixXd& x, const handtrack::GcnWeights& w) {
    const auto& A = w.adjacency;
    const int n = static_cast<int>(x.rows()), c = static_cast<int>(x.cols());
    const int h = static_cast<int>(w.w1.cols()), e = static_cast<int>(w.w2.cols());
    std::vector<std::vector<double>> h1(n, std::vector<double>(h));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < h; ++k) {
            double s = w.b1(k);
            for (int m = 0; m < n; ++m)
                for (int q = 0; q < c; ++q) s += A(i, m) * x(m, q) * w.w1(q, k);
            h1[i][k] = s > 0.0 ? s : 0.0;
        }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(e);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < e; ++k) {
            double s = w.b2(k);
            for (int m = 0; m < n; ++m)
                for (int q = 0; q < h; ++q) s += A(i, m) * h1[m][q] * w.w2(q, k);
            out(k) += (s > 0.0 ? s : 0.0) / n;
        }
    return out;
}

inline Eigen::VectorXd joint_embed(const handtrack::Tensor3& v, const Eigen::VectorXd& pose, const handtrack::GcnWeights& w) {
    std::vector<double> z;
    for (int c = 0; c < v.channels(); ++c) {
        double s = 0.0;
        for (int y = 0; y < v.height(); ++y)
            for (int x = 0; x < v.width(); ++x) s += v(c, y, x);
        z.push_back(s / (v.height() * v.width()));
    }
    for (int i = 0; i < pose.size(); ++i) z.push_back(pose(i));
    std::vector<double> a(w.f1.rows());
    for (int r = 0; r < w.f1.rows(); ++r) {
        double s = w.c1(r);
        for (std::size_t k = 0; k < z.size(); ++k) s += w.f1(r, static_cast<int>(k)) * z[k];
        a[r] = s > 0.0 ? s : 0.0;
    }
    Eigen::VectorXd out(w.f2.rows());
    for (int r = 0; r < w.f2.rows(); ++r) {
        double s = w.c2(r);
        for (int k = 0; k < w.f2.cols(); ++k) s += w.f2(r, k) * a[k];
        out(r) = s;
    }
    return out;
}

/// Central differences of a scalar function over every entry of `x`.
template <typename Mat>
Mat numeric_gradient(Mat& x, const std::function<double()>& f, double h = 1e-6) {
    Mat g = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f();
        x.data()[i] = keep - h;
        const double down = f();
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max({a.norm(), b.norm(), 1e-12});
    return (a - b).norm() / scale;
}

}  // namespace oracle
