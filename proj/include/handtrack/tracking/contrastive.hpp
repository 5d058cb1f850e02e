#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace handtrack {

struct ContrastiveResult {
    double loss = 0.0;
    Eigen::VectorXd grad_a;
    Eigen::VectorXd grad_b;
};

/// Contrastive loss over d = |a - b|^2 with label y (1 = same hand):
///   standard: 0.5 * (y d + (1 - y) max(0, m - sqrt(d))^2)
///   literal:  0.5 * (y d + (1 - y) (m - d)^2)
/// The literal form never stops pushing negatives; it exists only for
/// comparison runs.
inline ContrastiveResult contrastive_loss(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int y, double margin,
                                          bool literal_form = false) {
    if (!(margin > 0.0)) throw std::invalid_argument("contrastive_loss: margin must be positive");
    if (a.size() != b.size()) throw std::invalid_argument("contrastive_loss: dimension mismatch");
    if (y != 0 && y != 1) throw std::invalid_argument("contrastive_loss: label must be 0 or 1");
    const Eigen::VectorXd diff = a - b;
    const double d = diff.squaredNorm();
    ContrastiveResult r;
    Eigen::VectorXd g;
    if (y == 1) {
        r.loss = 0.5 * d;
        g = diff;
    } else if (literal_form) {
        r.loss = 0.5 * (margin - d) * (margin - d);
        g = -2.0 * (margin - d) * diff;
    } else {
        const double dist = std::sqrt(d);
        const double hinge = std::max(0.0, margin - dist);
        r.loss = 0.5 * hinge * hinge;
        // zero subgradient at coincident points
        g = (hinge > 0.0 && dist > 0.0) ? Eigen::VectorXd(-(hinge / dist) * diff) : Eigen::VectorXd::Zero(a.size());
    }
    r.grad_a = g;
    r.grad_b = -g;
    return r;
}

}  // namespace handtrack
