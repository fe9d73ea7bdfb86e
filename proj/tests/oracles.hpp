// Test-only oracles, kept independent of the solver implementation paths
// they check. They rely only on direct evaluation of the public model and
// p/q operations.
#pragma once

#include "tnlab/entropy_system.hpp"
#include "tnlab/errors.hpp"
#include "tnlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace oracles {

inline double gap_or_nan(const tnlab::entropy::SystemSpec& spec, double v) {
    try {
        auto [p, q] = tnlab::entropy::pq_values(spec, v);
        return p - q;
    } catch (const tnlab::input_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Bisection refinement of a sign change of p - q inside [lo, hi].
inline double bisect_gap(const tnlab::entropy::SystemSpec& spec, double lo, double hi) {
    double glo = gap_or_nan(spec, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap_or_nan(spec, mid);
        if (!std::isfinite(gm)) break;
        if (gm == 0.0) return mid;
        if (glo * gm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    return 0.5 * (lo + hi);
}

// Dense-grid count of the solutions of the nondegenerate system over
// [lo, hi]: sign changes of p - q, except that the cell straddling v = 0 is
// resolved by bisection (v = 0 is an exact solution for normalized models,
// whether or not the gap crosses there; a distinct nearby crossing counts
// separately when it sits farther than dedup_tol from 0).
inline int grid_solution_count(const tnlab::entropy::SystemSpec& spec, double lo, double hi, int n,
                               double dedup_tol = 1e-9) {
    int count = 0;
    bool zero_cell_counted = false;
    const double step = (hi - lo) / static_cast<double>(n - 1);
    double prev_v = lo;
    double prev_g = gap_or_nan(spec, lo);
    for (int i = 1; i < n; ++i) {
        const double v = (i == n - 1) ? hi : lo + step * i;
        const double cur_g = gap_or_nan(spec, v);
        if (std::isfinite(prev_g) && std::isfinite(cur_g) && prev_g * cur_g < 0.0) {
            if (prev_v <= 0.0 && 0.0 <= v) {
                const double root = bisect_gap(spec, prev_v, v);
                count += std::abs(root) <= dedup_tol ? 1 : 2;
                zero_cell_counted = true;
            } else {
                ++count;
            }
        }
        prev_v = v;
        prev_g = cur_g;
    }
    if (!zero_cell_counted && lo <= 0.0 && 0.0 <= hi) ++count; // the exact solution at 0
    return count;
}

// Roots of the scalar equation fn(t) = 0 on a dense grid (sign changes
// refined by bisection). Used for the degenerate-route branch equations.
template <typename Fn>
std::vector<double> grid_roots(Fn&& fn, double lo, double hi, int n) {
    std::vector<double> roots;
    const double step = (hi - lo) / static_cast<double>(n - 1);
    double prev_v = lo;
    double prev_g = fn(lo);
    for (int i = 1; i < n; ++i) {
        const double v = (i == n - 1) ? hi : lo + step * i;
        const double cur_g = fn(v);
        if (std::isfinite(prev_g) && std::isfinite(cur_g)) {
            if (prev_g == 0.0) {
                roots.push_back(prev_v);
            } else if (prev_g * cur_g < 0.0) {
                double a = prev_v, b = v, ga = prev_g;
                for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
                    const double mid = 0.5 * (a + b);
                    const double gm = fn(mid);
                    if (gm == 0.0) {
                        a = b = mid;
                        break;
                    }
                    if (ga * gm < 0.0) {
                        b = mid;
                    } else {
                        a = mid;
                        ga = gm;
                    }
                }
                roots.push_back(0.5 * (a + b));
            }
        }
        prev_v = v;
        prev_g = cur_g;
    }
    if (std::isfinite(prev_g) && prev_g == 0.0) roots.push_back(prev_v);
    return roots;
}

// Full candidate solution list for a degenerate spec assembled from dense
// 1e6-point grids over the branch equations, deduplicated like the solver
// output. Independent of solve_degenerate's own bracketing logic.
inline std::vector<std::pair<double, double>> degenerate_grid_solutions(
    const tnlab::entropy::SystemSpec& spec, double lo, double hi, int n) {
    const tnlab::ScalarModel& model = *spec.model;
    std::vector<std::pair<double, double>> cands;
    if (spec.lambda1 == 0.0) {
        const double level = 0.5 * spec.lambda2 * spec.lambda2;
        for (double t : grid_roots([&](double t) { return model.F(t) - level; }, lo, hi, n)) {
            cands.emplace_back(spec.lambda2, t);
        }
        cands.emplace_back(0.0, 0.0);
        cands.emplace_back(2.0 * spec.lambda2, 0.0);
    } else {
        for (double t0 : grid_roots([&](double t) { return model.a(t) - spec.lambda1; }, lo, hi, n)) {
            const double gap = t0 * model.a(t0) - model.F(t0);
            if (gap >= 0.0) {
                cands.emplace_back(std::sqrt(2.0 * gap), t0);
                cands.emplace_back(-std::sqrt(2.0 * gap), t0);
            }
        }
        for (double t :
             grid_roots([&](double t) { return model.F(t) - spec.lambda1 * t; }, lo, hi, n)) {
            cands.emplace_back(0.0, t);
        }
        cands.emplace_back(0.0, 0.0); // exact root of F(t) = lambda1 t
    }

    // Verify against the system and deduplicate at the solver's tolerance.
    std::vector<std::pair<double, double>> out;
    for (auto [s, t] : cands) {
        if (tnlab::entropy::system_residual(spec, s, t) > 1e-9) continue;
        bool dup = false;
        for (auto [s2, t2] : out) {
            if (std::abs(s - s2) <= 1e-9 && std::abs(t - t2) <= 1e-9) {
                dup = true;
                break;
            }
        }
        if (!dup) out.emplace_back(s, t);
    }
    return out;
}

// Angular-sampling oracle for common zeros of the three minors of a matrix
// pencil. Samples 1e4 angles of f(theta) = max over non-vanishing minors of
// |minor(cos theta * b1 + sin theta * b2)|, then refines each candidate dip
// by ternary search to separate true zeros from near misses. Minor values
// are evaluated directly from the matrices, independent of any
// coefficient-based root finding. Returns -1 when all minors vanish
// identically (the whole plane is rank deficient).
inline int angular_direction_count(const tnlab::Mat32& b1, const tnlab::Mat32& b2,
                                   int samples = 10000) {
    using tnlab::Mat32;
    namespace linalg = tnlab::linalg;
    const Mat32 n1 = b1 / linalg::max_abs(b1);
    const Mat32 n2 = b2 / linalg::max_abs(b2);
    const auto selectors = {linalg::MinorSelector::rows(0, 1), linalg::MinorSelector::rows(0, 2),
                            linalg::MinorSelector::rows(1, 2)};

    std::vector<std::vector<double>> minor_values(3, std::vector<double>(samples));
    std::vector<double> minor_max(3, 0.0);
    for (int i = 0; i < samples; ++i) {
        const double th = std::numbers::pi * i / samples;
        const Mat32 m = std::cos(th) * n1 + std::sin(th) * n2;
        int k = 0;
        for (const auto& z : selectors) {
            minor_values[k][i] = std::abs(linalg::minor_det(m, z));
            minor_max[k] = std::max(minor_max[k], minor_values[k][i]);
            ++k;
        }
    }
    const double global_max = std::max({minor_max[0], minor_max[1], minor_max[2]});
    if (global_max <= 1e-14) return -1;

    std::vector<bool> active(3);
    for (int k = 0; k < 3; ++k) active[k] = minor_max[k] > 1e-10 * global_max;

    auto f_at = [&](double th) {
        const Mat32 m = std::cos(th) * n1 + std::sin(th) * n2;
        double f = 0.0;
        int k = 0;
        for (const auto& z : selectors) {
            if (active[k]) f = std::max(f, std::abs(linalg::minor_det(m, z)));
            ++k;
        }
        return f;
    };

    std::vector<double> f(samples);
    double f_max = 0.0;
    for (int i = 0; i < samples; ++i) {
        f[i] = 0.0;
        for (int k = 0; k < 3; ++k) {
            if (active[k]) f[i] = std::max(f[i], minor_values[k][i]);
        }
        f_max = std::max(f_max, f[i]);
    }

    const double step = std::numbers::pi / samples;
    const double coarse = 50.0 * step * f_max; // generous capture threshold
    const double zero_tol = 1e-8 * f_max;      // refined dips must reach this

    auto refine = [&](int i) {
        double lo = step * (i - 1), hi = step * (i + 1);
        for (int it = 0; it < 120; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (f_at(m1) < f_at(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        return f_at(0.5 * (lo + hi));
    };

    // Candidate clusters are maximal runs of below-threshold samples on the
    // projective circle; a cluster counts when its refined dip reaches zero.
    int start = -1;
    for (int i = 0; i < samples; ++i) {
        if (f[i] >= coarse) {
            start = i;
            break;
        }
    }
    if (start < 0) return refine(0) <= zero_tol ? 1 : 0; // everything below threshold

    int clusters = 0;
    int best_index = -1;
    double best_value = 0.0;
    for (int offset = 1; offset <= samples; ++offset) {
        const int i = (start + offset) % samples;
        if (f[i] < coarse) {
            if (best_index < 0 || f[i] < best_value) {
                best_index = i;
                best_value = f[i];
            }
        } else if (best_index >= 0) {
            if (refine(best_index) <= zero_tol) ++clusters;
            best_index = -1;
        }
    }
    if (best_index >= 0 && refine(best_index) <= zero_tol) ++clusters;
    return clusters;
}

// Degenerate-route agreement check between solve_degenerate output and the
// dense-grid oracle over [lo, hi]:
//   - the oracle must find nothing the solver missed ("no additional"),
//   - every solver solution inside the window must be matched by the oracle
//     (roots outside the window are exempt; the solver searches adaptively).
// Returns the number of violations.
inline int degenerate_agreement_violations(const tnlab::entropy::SystemSpec& spec,
                                           const tnlab::entropy::SolutionSet& sols, double lo,
                                           double hi, int n) {
    int violations = 0;
    auto oracle = degenerate_grid_solutions(spec, lo, hi, n);
    for (auto [s, t] : oracle) {
        bool matched = false;
        for (const auto& sol : sols.solutions) {
            if (std::abs(sol.s - s) <= 1e-6 && std::abs(sol.t - t) <= 1e-6) matched = true;
        }
        if (!matched) ++violations;
    }
    for (const auto& sol : sols.solutions) {
        if (sol.t < lo || sol.t > hi) continue;
        bool matched = false;
        for (auto [s, t] : oracle) {
            if (std::abs(sol.s - s) <= 1e-6 && std::abs(sol.t - t) <= 1e-6) matched = true;
        }
        if (!matched) ++violations;
    }
    return violations;
}

} // namespace oracles
