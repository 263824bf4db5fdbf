#pragma once

// RBF displacement field over matched control points: multiquadric kernel
// phi(r) = sqrt(r^2 + eps^2) plus an affine term, x and y components fitted
// independently with the usual moment side conditions on the weights.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "georeg/errors.hpp"
#include "georeg/model.hpp"

namespace georeg {

struct WarpParams {
    double epsilon = 0.6;     // kernel parameter
    double tau_match = 30.0;  // correspondence threshold (pixels)
    bool include_affine = true;
};

struct ControlPairSet {
    std::vector<Vec2> sources;
    std::vector<Vec2> targets;
};

// Nearest target per source; pairs at distance >= tau are dropped. Duplicate
// targets are allowed.
inline ControlPairSet match_control_points(const std::vector<Vec2>& cloud_kp,
                                           const std::vector<Vec2>& map_kp, double tau) {
    if (cloud_kp.empty() || map_kp.empty()) throw EmptyInput("empty keypoint set");
    ControlPairSet pairs;
    for (const auto& s : cloud_kp) {
        double best = std::numeric_limits<double>::max();
        Vec2 t{};
        for (const auto& m : map_kp) {
            const double d = (s - m).squared_norm();
            if (d < best) {
                best = d;
                t = m;
            }
        }
        if (std::sqrt(best) < tau) {
            pairs.sources.push_back(s);
            pairs.targets.push_back(t);
        }
    }
    if (pairs.sources.empty()) throw NoPairs("no correspondence within tau");
    return pairs;
}

inline double multiquadric(double r, double eps) { return std::sqrt(r * r + eps * eps); }

namespace detail {

// Coincident sources would make the kernel matrix singular; merge them,
// averaging their targets.
inline ControlPairSet dedupe_sources(const ControlPairSet& pairs, double tol = 1e-9) {
    ControlPairSet out;
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < pairs.sources.size(); ++i) {
        bool merged = false;
        for (std::size_t j = 0; j < out.sources.size(); ++j) {
            if ((pairs.sources[i] - out.sources[j]).norm() < tol) {
                out.targets[j] = out.targets[j] + pairs.targets[i];
                ++counts[j];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.sources.push_back(pairs.sources[i]);
            out.targets.push_back(pairs.targets[i]);
            counts.push_back(1);
        }
    }
    for (std::size_t j = 0; j < out.targets.size(); ++j)
        out.targets[j] = out.targets[j] * (1.0 / static_cast<double>(counts[j]));
    return out;
}

}  // namespace detail

// Interpolation conditions f(s_i) = t_i - s_i (displacement convention).
inline RbfWarp fit_rbf(const ControlPairSet& input, const WarpParams& params) {
    const ControlPairSet pairs = detail::dedupe_sources(input);
    const std::size_t n = pairs.sources.size();
    if (params.include_affine && n < 3) throw SingularSystem("affine fit needs >= 3 pairs");
    if (n < 1) throw SingularSystem("no control pairs");

    const std::size_t m = params.include_affine ? n + 3 : n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::VectorXd by = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                multiquadric((pairs.sources[i] - pairs.sources[j]).norm(), params.epsilon);
        if (params.include_affine) {
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = 1.0;
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + 1)) = pairs.sources[i].x;
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n + 2)) = pairs.sources[i].y;
            A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = 1.0;
            A(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(i)) = pairs.sources[i].x;
            A(static_cast<Eigen::Index>(n + 2), static_cast<Eigen::Index>(i)) = pairs.sources[i].y;
        }
        bx(static_cast<Eigen::Index>(i)) = pairs.targets[i].x - pairs.sources[i].x;
        by(static_cast<Eigen::Index>(i)) = pairs.targets[i].y - pairs.sources[i].y;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw SingularSystem("kernel system is singular (collinear or coincident input)");
    const Eigen::VectorXd wx = lu.solve(bx);
    const Eigen::VectorXd wy = lu.solve(by);

    RbfWarp w;
    w.epsilon = params.epsilon;
    w.centers = pairs.sources;
    w.weights_x.resize(n);
    w.weights_y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w.weights_x[i] = wx(static_cast<Eigen::Index>(i));
        w.weights_y[i] = wy(static_cast<Eigen::Index>(i));
    }
    if (params.include_affine) {
        for (int k = 0; k < 3; ++k) {
            w.affine[0][k] = wx(static_cast<Eigen::Index>(n) + k);
            w.affine[1][k] = wy(static_cast<Eigen::Index>(n) + k);
        }
    }
    return w;
}

namespace detail {

inline double warp_domain_limit(const RbfWarp& w) {
    double lox = std::numeric_limits<double>::max(), loy = lox;
    double hix = std::numeric_limits<double>::lowest(), hiy = hix;
    for (const auto& c : w.centers) {
        lox = std::min(lox, c.x);
        loy = std::min(loy, c.y);
        hix = std::max(hix, c.x);
        hiy = std::max(hiy, c.y);
    }
    return std::hypot(hix - lox, hiy - loy);
}

}  // namespace detail

inline Vec2 evaluate_affine(const RbfWarp& w, const Vec2& p) {
    return {w.affine[0][0] + w.affine[0][1] * p.x + w.affine[0][2] * p.y,
            w.affine[1][0] + w.affine[1][1] * p.x + w.affine[1][2] * p.y};
}

// Displacement at p. Queries farther than 3x the control bounding-box
// diagonal from the nearest center fall back to the affine part, so stray
// far-field points are not extrapolated wildly.
inline Vec2 evaluate_warp(const RbfWarp& w, const Vec2& p) {
    double nearest = std::numeric_limits<double>::max();
    Vec2 d = evaluate_affine(w, p);
    double rx = 0.0, ry = 0.0;
    for (std::size_t i = 0; i < w.centers.size(); ++i) {
        const double r = (p - w.centers[i]).norm();
        nearest = std::min(nearest, r);
        const double phi = multiquadric(r, w.epsilon);
        rx += w.weights_x[i] * phi;
        ry += w.weights_y[i] * phi;
    }
    const double limit = 3.0 * detail::warp_domain_limit(w);
    if (limit > 0.0 && nearest > limit) return d;
    return {d.x + rx, d.y + ry};
}

// Analytic spatial gradient of the displacement field (2x2 Jacobian),
// valid inside the warp domain.
inline void warp_jacobian(const RbfWarp& w, const Vec2& p, double J[2][2]) {
    J[0][0] = w.affine[0][1];
    J[0][1] = w.affine[0][2];
    J[1][0] = w.affine[1][1];
    J[1][1] = w.affine[1][2];
    for (std::size_t i = 0; i < w.centers.size(); ++i) {
        const Vec2 d = p - w.centers[i];
        const double phi = multiquadric(d.norm(), w.epsilon);
        // d(phi)/dx = x / phi
        const double gx = d.x / phi;
        const double gy = d.y / phi;
        J[0][0] += w.weights_x[i] * gx;
        J[0][1] += w.weights_x[i] * gy;
        J[1][0] += w.weights_y[i] * gx;
        J[1][1] += w.weights_y[i] * gy;
    }
}

inline PointCloud apply_warp(const PointCloud& cloud, const RbfWarp& w) {
    if (cloud.empty()) throw EmptyCloud();
    PointCloud out = cloud;
    for (auto& p : out.points) {
        const Vec2 d = evaluate_warp(w, p.xy());
        p.x += d.x;
        p.y += d.y;
    }
    return out;
}

}  // namespace georeg
