#include "tnlab/planar.hpp"

#include "tnlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tnlab::planar {

namespace {

constexpr double kConsistencyTol = 1e-8;

double max_abs3(double a, double b, double c) {
    return std::max({std::abs(a), std::abs(b), std::abs(c)});
}

// Quadratic form q(s, t) = A s^2 + B s t + C t^2 (a minor of s b1 + t b2).
struct MinorQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double eval(double s, double t) const { return (a * s + b * t) * s + c * t * t; }
};

MinorQuadratic minor_quadratic(const Mat32& b1, const Mat32& b2, const linalg::MinorSelector& z) {
    MinorQuadratic q;
    q.a = linalg::minor_det(b1, z);
    q.c = linalg::minor_det(b2, z);
    q.b = b1(z.first, 0) * b2(z.second, 1) + b2(z.first, 0) * b1(z.second, 1) -
          b1(z.first, 1) * b2(z.second, 0) - b2(z.first, 1) * b1(z.second, 0);
    return q;
}

// Projective roots of a quadratic as angles in [0, pi): the direction
// (s, t) = (cos th, sin th). Roots in the chart t = 1 are (s, 1); the point
// at infinity (1, 0) is a root iff the s^2 coefficient vanishes.
std::vector<double> projective_roots(const MinorQuadratic& q, double coeff_tol) {
    std::vector<double> roots;
    auto push = [&](double s, double t) {
        double th = std::atan2(t, s);
        if (th < 0.0) th += std::numbers::pi;
        if (th >= std::numbers::pi) th -= std::numbers::pi;
        roots.push_back(th);
    };

    if (std::abs(q.a) <= coeff_tol) {
        push(1.0, 0.0); // infinity
        if (std::abs(q.b) > coeff_tol) push(-q.c / q.b, 1.0);
        return roots;
    }
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    const double disc_scale = q.b * q.b + 4.0 * std::abs(q.a * q.c);
    if (disc < 0.0) {
        if (std::abs(disc) <= 1e-12 * (disc_scale + 1e-300)) {
            push(-q.b / (2.0 * q.a), 1.0); // tangential double root
        }
        return roots;
    }
    if (disc <= 1e-12 * disc_scale) {
        push(-q.b / (2.0 * q.a), 1.0);
        return roots;
    }
    const double root_disc = std::sqrt(disc);
    const double qq = -0.5 * (q.b + (q.b >= 0.0 ? root_disc : -root_disc));
    if (qq != 0.0) {
        push(qq / q.a, 1.0);
        push(q.c / qq, 1.0);
    } else {
        // b == 0: symmetric roots.
        const double s = std::sqrt(-q.c / q.a);
        push(s, 1.0);
        push(-s, 1.0);
    }
    return roots;
}

double angle_distance(double a, double b) {
    double d = std::abs(a - b);
    d = std::fmod(d, std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

std::vector<double> intersect_angles(const std::vector<double>& lhs, const std::vector<double>& rhs,
                                     double tol) {
    std::vector<double> out;
    for (double a : lhs) {
        for (double b : rhs) {
            if (angle_distance(a, b) <= tol) {
                out.push_back(a);
                break;
            }
        }
    }
    return out;
}

void dedup_angles(std::vector<double>& angles, double tol) {
    std::sort(angles.begin(), angles.end());
    std::vector<double> out;
    for (double a : angles) {
        if (out.empty() || angle_distance(out.back(), a) > tol) out.push_back(a);
    }
    // Wrap-around merge at the pi boundary.
    if (out.size() > 1 && angle_distance(out.front(), out.back()) <= tol) out.pop_back();
    angles = std::move(out);
}

// Least-squares coefficients fitting target ~ c0 * basis0 + c1 * basis1.
std::array<double, 2> fit_row(const std::vector<double>& basis0, const std::vector<double>& basis1,
                              const std::vector<double>& target, double& rel_residual) {
    const int n = static_cast<int>(target.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd y(n);
    for (int j = 0; j < n; ++j) {
        design(j, 0) = basis0[j];
        design(j, 1) = basis1[j];
        y(j) = target[j];
    }
    const Eigen::Vector2d c = design.colPivHouseholderQr().solve(y);
    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    rel_residual = (design * c - y).cwiseAbs().maxCoeff() / scale;
    return {c(0), c(1)};
}

} // namespace

int span_dimension(const tn::MatrixSet& set, int pivot, double rel_tol) {
    const int n = set.size();
    if (pivot < 0 || pivot >= n) throw input_error("span_dimension: pivot index out of range");
    Eigen::MatrixXd diffs(n, 6);
    for (int j = 0; j < n; ++j) {
        const Mat32 d = set.points[j] - set.points[pivot];
        int at = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) diffs(j, at++) = d(r, c);
    }
    return linalg::numeric_rank(diffs, rel_tol).rank;
}

PlanarCoefficients fit_planar(const ka::TranslatedSet& t, double rel_tol) {
    const int n = static_cast<int>(t.h.size());
    std::vector<double> prod_row(n), f_row(n);
    Eigen::MatrixXd stacked(5, n);
    for (int j = 0; j < n; ++j) {
        prod_row[j] = t.h[j] * t.a_of_r[j];
        f_row[j] = 0.5 * t.h[j] * t.h[j] + t.F_of_r[j];
        stacked(0, j) = t.h[j];
        stacked(1, j) = t.r[j];
        stacked(2, j) = t.a_of_r[j];
        stacked(3, j) = prod_row[j];
        stacked(4, j) = f_row[j];
    }
    const int stacked_rank = linalg::numeric_rank(stacked, rel_tol).rank;
    if (stacked_rank != 2) {
        std::ostringstream msg;
        msg << "fit_planar: difference span has dimension " << stacked_rank
            << ", not the two-dimensional regime";
        throw input_error(msg.str());
    }

    auto pair_rank = [&](const std::vector<double>& x, const std::vector<double>& y) {
        Eigen::MatrixXd m(2, n);
        for (int j = 0; j < n; ++j) {
            m(0, j) = x[j];
            m(1, j) = y[j];
        }
        return linalg::numeric_rank(m, rel_tol).rank;
    };

    PlanarCoefficients out;
    const std::vector<double>* basis1 = nullptr;
    if (pair_rank(t.h, t.r) == 2) {
        out.variant = Variant::Case1;
        basis1 = &t.r;
    } else if (pair_rank(t.h, t.a_of_r) == 2) {
        out.variant = Variant::Case2;
        basis1 = &t.a_of_r;
    } else {
        throw input_error("fit_planar: neither (h, r) nor (h, a) offset rows are independent");
    }

    double res_alpha = 0.0, res_beta = 0.0, res_gamma = 0.0;
    const std::vector<double>& alpha_target = out.variant == Variant::Case1 ? t.a_of_r : t.r;
    out.alpha = fit_row(t.h, *basis1, alpha_target, res_alpha);
    out.beta = fit_row(t.h, *basis1, prod_row, res_beta);
    out.gamma = fit_row(t.h, *basis1, f_row, res_gamma);
    out.fit_residual = std::max({res_alpha, res_beta, res_gamma});

    double rel1, rel2;
    if (out.variant == Variant::Case1) {
        rel1 = (out.gamma[1] - out.beta[0]) + out.gamma[0] * out.alpha[0];
        rel2 = out.beta[1] - out.gamma[0] * out.alpha[1];
    } else {
        rel1 = (out.beta[1] - out.gamma[0]) + out.beta[0] * out.alpha[0];
        rel2 = out.gamma[1] - out.beta[0] * out.alpha[1];
    }
    const double rel_scale =
        1.0 + max_abs3(out.alpha[0] * out.gamma[0], out.beta[0], out.gamma[1]) +
        max_abs3(out.alpha[1] * out.gamma[0], out.beta[1], out.gamma[0]);
    out.consistency_residual = std::max(std::abs(rel1), std::abs(rel2)) / rel_scale;
    out.consistency_ok = out.consistency_residual <= kConsistencyTol;

    std::array<double, 2> lambda = out.variant == Variant::Case1
                                       ? std::array<double, 2>{out.gamma[1], out.gamma[0]}
                                       : std::array<double, 2>{out.beta[0], out.beta[1]};
    if (!out.consistency_ok) {
        // Diagnostic only: the best least-squares lambda for the coupling
        // system, so callers can see how badly it fails.
        Eigen::MatrixXd design(2 * n, 2);
        Eigen::VectorXd y(2 * n);
        for (int j = 0; j < n; ++j) {
            design(j, 0) = t.h[j];
            design(j, 1) = t.a_of_r[j];
            y(j) = prod_row[j];
            design(n + j, 0) = t.r[j];
            design(n + j, 1) = t.h[j];
            y(n + j) = f_row[j];
        }
        const Eigen::Vector2d c = design.colPivHouseholderQr().solve(y);
        lambda = {c(0), c(1)};
    }

    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const double eq1 = prod_row[j] - lambda[0] * t.h[j] - lambda[1] * t.a_of_r[j];
        const double s1 = 1.0 + max_abs3(prod_row[j], lambda[0] * t.h[j], lambda[1] * t.a_of_r[j]);
        const double eq2 = f_row[j] - lambda[0] * t.r[j] - lambda[1] * t.h[j];
        const double s2 = 1.0 + max_abs3(f_row[j], lambda[0] * t.r[j], lambda[1] * t.h[j]);
        worst = std::max({worst, std::abs(eq1) / s1, std::abs(eq2) / s2});
    }
    out.lambda_residual = worst;
    if (out.consistency_ok) out.lambda = lambda;
    return out;
}

std::pair<Mat32, Mat32> span_basis(const PlanarCoefficients& c) {
    Mat32 b1, b2;
    if (c.variant == Variant::Case1) {
        b1 << 1.0, 0.0, c.alpha[0], 1.0, c.beta[0], c.gamma[0];
        b2 << 0.0, 1.0, c.alpha[1], 0.0, c.beta[1], c.gamma[1];
    } else {
        b1 << 1.0, c.alpha[0], 0.0, 1.0, c.beta[0], c.gamma[0];
        b2 << 0.0, c.alpha[1], 1.0, 0.0, c.beta[1], c.gamma[1];
    }
    return {b1, b2};
}

RankOneDirections rank_one_directions(const Mat32& b1, const Mat32& b2, double angle_tol) {
    Eigen::MatrixXd stacked(6, 2);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 2; ++c) {
            stacked(2 * r + c, 0) = b1(r, c);
            stacked(2 * r + c, 1) = b2(r, c);
        }
    }
    if (linalg::numeric_rank(stacked).rank != 2) {
        throw input_error("rank_one_directions: basis matrices are linearly dependent");
    }

    // Work on unit-normalized copies so coefficient tolerances are absolute.
    const Mat32 n1 = b1 / linalg::max_abs(b1);
    const Mat32 n2 = b2 / linalg::max_abs(b2);

    const linalg::MinorSelector selectors[] = {linalg::MinorSelector::rows(0, 1),
                                               linalg::MinorSelector::rows(0, 2),
                                               linalg::MinorSelector::rows(1, 2)};
    MinorQuadratic quads[3];
    double coeff_scale = 0.0;
    for (int k = 0; k < 3; ++k) {
        quads[k] = minor_quadratic(n1, n2, selectors[k]);
        coeff_scale = std::max(coeff_scale, max_abs3(quads[k].a, quads[k].b, quads[k].c));
    }

    RankOneDirections out;
    if (coeff_scale == 0.0) {
        out.infinite = true;
        return out;
    }
    const double zero_tol = 1e-12 * coeff_scale;

    bool have_roots = false;
    std::vector<double> angles;
    for (int k = 0; k < 3; ++k) {
        if (max_abs3(quads[k].a, quads[k].b, quads[k].c) <= zero_tol) continue; // vanishes identically
        auto roots = projective_roots(quads[k], zero_tol);
        if (!have_roots) {
            angles = std::move(roots);
            have_roots = true;
        } else {
            angles = intersect_angles(angles, roots, angle_tol);
        }
        if (angles.empty()) break;
    }
    if (!have_roots) {
        // All three minors vanish identically: every direction is rank one
        // (or zero), i.e. the plane contains no rank-two point.
        out.infinite = true;
        return out;
    }

    dedup_angles(angles, angle_tol);
    out.count = static_cast<int>(angles.size());
    for (double th : angles) {
        // Map the root of the normalized-basis pencil back to the caller's
        // basis: s b1 + t b2 with (s, t) = (cos th / |b1|, sin th / |b2|).
        Eigen::Vector2d dir(std::cos(th) / linalg::max_abs(b1), std::sin(th) / linalg::max_abs(b2));
        dir.normalize();
        if (dir(0) < -1e-12 || (std::abs(dir(0)) <= 1e-12 && dir(1) < 0.0)) dir = -dir;
        out.directions.push_back(dir);
    }
    return out;
}

} // namespace tnlab::planar
