#include "tnlab/entropy_system.hpp"

#include "tnlab/errors.hpp"
#include "tnlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tnlab::entropy {

namespace {

constexpr double kDedupTol = 1e-9;
constexpr double kResidualBound = 1e-9;
constexpr double kBisectRelTol = 1e-13;
constexpr int kMaxGrid = 10000000;

double denom_margin(double lambda1) { return 1e-12 * (1.0 + std::abs(lambda1)); }

int sign_with_tol(double value, double scale) {
    if (std::abs(value) <= 1e-12 * scale) return 0;
    return value > 0.0 ? 1 : -1;
}

Solution classify(const SystemSpec& spec, double s, double t) {
    Solution sol;
    sol.s = s;
    sol.t = t;
    sol.residual = system_residual(spec, s, t);
    sol.trivial = std::abs(s) <= kDedupTol && std::abs(t) <= kDedupTol;
    const double a_t = spec.model->a(t);
    sol.below_lambda1 = a_t < spec.lambda1;
    sol.indicator = s * s - t * a_t;
    sol.indicator_sign = sign_with_tol(sol.indicator, 1.0 + s * s + std::abs(t * a_t));
    return sol;
}

// p - q, with NaN instead of an exception at the singular level so scans can
// skip the affected cell.
double safe_gap(const SystemSpec& spec, double v) {
    try {
        auto [p, q] = pq_values(spec, v);
        return p - q;
    } catch (const input_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Sign-change cells of g on n grid points over [lo, hi]; cells with
// non-finite endpoint values are skipped.
std::vector<std::pair<double, double>> sign_change_cells(const SystemSpec& spec, double lo,
                                                         double hi, int n) {
    std::vector<std::pair<double, double>> cells;
    const double step = (hi - lo) / static_cast<double>(n - 1);
    auto g = [&](double v) { return safe_gap(spec, v); };
    double prev_v = lo;
    double prev_g = g(lo);
    for (int i = 1; i < n; ++i) {
        const double v = (i == n - 1) ? hi : lo + step * i;
        const double cur_g = g(v);
        if (std::isfinite(prev_g) && std::isfinite(cur_g)) {
            if (prev_g == 0.0) {
                cells.emplace_back(prev_v, prev_v);
            } else if (prev_g * cur_g < 0.0) {
                cells.emplace_back(prev_v, v);
            }
        }
        prev_v = v;
        prev_g = cur_g;
    }
    if (std::isfinite(prev_g) && prev_g == 0.0) cells.emplace_back(prev_v, prev_v);
    return cells;
}

double refine_root(const SystemSpec& spec, double lo, double hi) {
    auto g = [&](double v) { return safe_gap(spec, v); };
    if (lo == hi) return lo;
    double glo = g(lo);
    if (glo == 0.0) return lo;
    if (g(hi) == 0.0) return hi;

    // Bisection down to the target width.
    while (hi - lo > kBisectRelTol * (1.0 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (!std::isfinite(gm)) break;
        if (gm == 0.0) return mid;
        if (glo * gm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }

    // One guarded derivative step; keep it only if it stays bracketed and
    // reduces |g|.
    double v = 0.5 * (lo + hi);
    const double a_v = spec.model->a(v);
    const double d = a_v - spec.lambda1;
    const double gp = d - spec.lambda1 * spec.lambda1 * spec.lambda2 * spec.lambda2 *
                              spec.model->a_prime(v) / (d * d * d);
    if (std::isfinite(gp) && gp != 0.0) {
        const double candidate = v - g(v) / gp;
        if (candidate > lo && candidate < hi && std::abs(g(candidate)) <= std::abs(g(v))) {
            v = candidate;
        }
    }
    return v;
}

std::vector<double> scan_bracket(const SystemSpec& spec, const Interval& bracket, int n) {
    std::vector<double> roots;
    for (const auto& [clo, chi] : sign_change_cells(spec, bracket.lo, bracket.hi, n)) {
        roots.push_back(refine_root(spec, clo, chi));
    }
    return roots;
}

// Scan with a phase-shifted verification pass; escalate the grid while the
// two passes disagree on the root count.
std::pair<std::vector<double>, int> scan_verified(const SystemSpec& spec, const Interval& bracket,
                                                  int grid) {
    int n = grid;
    for (;;) {
        auto coarse = scan_bracket(spec, bracket, n);
        auto fine = scan_bracket(spec, bracket, 2 * n + 1);
        if (coarse.size() == fine.size() || 10LL * n > kMaxGrid) {
            return {std::move(fine), n};
        }
        n *= 10;
    }
}

std::optional<double> find_level_increasing(const ScalarModel& model, double target, double lo,
                                            double hi) {
    if (!(model.a(lo) <= target && target <= model.a(hi))) return std::nullopt;
    double flo = model.a(lo) - target;
    if (flo == 0.0) return lo;
    while (hi - lo > 1e-15 * (1.0 + std::abs(lo))) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = model.a(mid) - target;
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

void dedup_and_sort(std::vector<Solution>& sols) {
    std::sort(sols.begin(), sols.end(), [](const Solution& a, const Solution& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.s < b.s;
    });
    std::vector<Solution> unique;
    for (const auto& sol : sols) {
        bool dup = false;
        for (const auto& kept : unique) {
            if (std::abs(kept.s - sol.s) <= kDedupTol && std::abs(kept.t - sol.t) <= kDedupTol) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(sol);
    }
    sols = std::move(unique);
}

// Roots of F(t) = c for convex F with minimum 0 at t = 0 (c >= 0 required
// for roots to exist). Expands outward until F clears the level.
std::vector<double> antiderivative_level_roots(const ScalarModel& model, double c) {
    std::vector<double> roots;
    if (c < 0.0) return roots;
    if (c == 0.0) {
        roots.push_back(0.0);
        return roots;
    }
    for (int side = 0; side < 2; ++side) {
        const double dir = side == 0 ? -1.0 : 1.0;
        double far = dir;
        int guard = 0;
        while (model.F(far) < c && ++guard < 80) far *= 2.0;
        if (model.F(far) < c) continue;
        double near = 0.0;
        // F - c < 0 at near, >= 0 at far.
        for (int it = 0; it < 200 && std::abs(far - near) > 1e-14 * (1.0 + std::abs(near)); ++it) {
            const double mid = 0.5 * (near + far);
            if (model.F(mid) - c < 0.0) {
                near = mid;
            } else {
                far = mid;
            }
        }
        roots.push_back(0.5 * (near + far));
    }
    return roots;
}

// Roots of psi(t) = F(t) - lambda1 t, a convex function with psi(0) = 0.
// Returns 0 plus the second crossing when one exists. The minimizer of psi
// sits where a(t) = lambda1; with no minimizer psi is strictly monotone and
// 0 is the only root.
std::vector<double> linear_level_roots(const ScalarModel& model, double lambda1) {
    std::vector<double> roots{0.0};
    if (lambda1 == 0.0) return roots; // psi = F >= 0, double root at 0
    auto psi = [&](double t) { return model.F(t) - lambda1 * t; };
    auto t_min = find_level_increasing(model, lambda1, -1e6, 1e6);
    if (!t_min || psi(*t_min) >= 0.0) return roots;

    // The second root lies beyond the minimizer, on the opposite side of 0.
    double near = *t_min;
    double step = std::max(1.0, std::abs(*t_min));
    const double dir = lambda1 > 0.0 ? 1.0 : -1.0;
    double far = near + dir * step;
    int guard = 0;
    while (psi(far) < 0.0 && ++guard < 80) {
        near = far;
        far += dir * (step *= 2.0);
    }
    if (psi(far) < 0.0) return roots;
    for (int it = 0; it < 200 && std::abs(far - near) > 1e-14 * (1.0 + std::abs(near)); ++it) {
        const double mid = 0.5 * (near + far);
        if (psi(mid) < 0.0) {
            near = mid;
        } else {
            far = mid;
        }
    }
    roots.push_back(0.5 * (near + far));
    return roots;
}

} // namespace

SystemSpec::SystemSpec(std::shared_ptr<const ScalarModel> m, double l1, double l2)
    : model(std::move(m)), lambda1(l1), lambda2(l2) {
    if (!model) throw input_error("SystemSpec: null model");
    if (!std::isfinite(lambda1) || !std::isfinite(lambda2)) {
        throw input_error("SystemSpec: lambda values must be finite");
    }
    if (std::abs(model->a(0.0)) > 1e-12 || std::abs(model->F(0.0)) > 1e-12) {
        throw input_error("SystemSpec: model must be normalized (a(0) = F(0) = 0)");
    }
}

double system_residual(const SystemSpec& spec, double s, double t) {
    const double a_t = spec.model->a(t);
    const double F_t = spec.model->F(t);
    const double r1 = s * a_t - spec.lambda1 * s - spec.lambda2 * a_t;
    const double scale1 =
        1.0 + std::max({std::abs(s * a_t), std::abs(spec.lambda1 * s), std::abs(spec.lambda2 * a_t)});
    const double r2 = 0.5 * s * s + F_t - spec.lambda1 * t - spec.lambda2 * s;
    const double scale2 = 1.0 + std::max({std::abs(0.5 * s * s), std::abs(F_t),
                                          std::abs(spec.lambda1 * t), std::abs(spec.lambda2 * s)});
    return std::max(std::abs(r1) / scale1, std::abs(r2) / scale2);
}

double reduce_u(const SystemSpec& spec, double v) {
    const double a_v = spec.model->a(v);
    const double denom = a_v - spec.lambda1;
    if (std::abs(denom) <= denom_margin(spec.lambda1)) {
        throw input_error("reduce_u: a(v) is at the singular level lambda1");
    }
    return spec.lambda2 * a_v / denom;
}

std::pair<double, double> pq_values(const SystemSpec& spec, double v) {
    const double a_v = spec.model->a(v);
    const double denom = a_v - spec.lambda1;
    if (std::abs(denom) <= denom_margin(spec.lambda1)) {
        throw input_error("pq_values: a(v) is at the singular level lambda1");
    }
    const double p = spec.model->F(v) - spec.lambda1 * v - 0.5 * spec.lambda2 * spec.lambda2;
    const double q = -spec.lambda1 * spec.lambda1 * spec.lambda2 * spec.lambda2 / (2.0 * denom * denom);
    return {p, q};
}

std::optional<double> singular_v(const SystemSpec& spec, double lo, double hi) {
    return find_level_increasing(*spec.model, spec.lambda1, lo, hi);
}

std::vector<Interval> default_brackets(const SystemSpec& spec, double lo, double hi) {
    if (!(lo < hi)) throw input_error("default_brackets: need lo < hi");
    auto star = singular_v(spec, lo, hi);
    std::vector<Interval> out;
    std::vector<std::pair<double, double>> pieces;
    if (star && *star > lo && *star < hi) {
        pieces.emplace_back(lo, *star - kSingularMarginV);
        pieces.emplace_back(*star + kSingularMarginV, hi);
    } else {
        pieces.emplace_back(lo, hi);
    }
    for (auto [plo, phi] : pieces) {
        if (plo < 0.0 && 0.0 < phi) {
            out.push_back({plo, 0.0});
            out.push_back({0.0, phi});
        } else if (plo < phi) {
            out.push_back({plo, phi});
        }
    }
    return out;
}

SolutionSet solve(const SystemSpec& spec, const std::vector<Interval>& brackets, int grid) {
    if (spec.degenerate()) {
        throw input_error("solve: lambda1 and lambda2 must be nonzero (use solve_degenerate)");
    }
    if (grid < 2) throw input_error("solve: grid must be at least 2");
    if (brackets.empty()) throw input_error("solve: need at least one bracket");

    // Carve the singular level out of any bracket that straddles it.
    auto star = singular_v(spec);
    std::vector<Interval> scan;
    bool contains_zero = false;
    for (const auto& b : brackets) {
        if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
            throw input_error("solve: malformed bracket");
        }
        if (b.lo <= 0.0 && 0.0 <= b.hi) contains_zero = true;
        if (star && b.lo < *star - kSingularMarginV && *star + kSingularMarginV < b.hi) {
            scan.push_back({b.lo, *star - kSingularMarginV});
            scan.push_back({*star + kSingularMarginV, b.hi});
        } else if (star && std::abs(b.lo - *star) < kSingularMarginV) {
            scan.push_back({*star + kSingularMarginV, b.hi});
        } else if (star && std::abs(b.hi - *star) < kSingularMarginV) {
            scan.push_back({b.lo, *star - kSingularMarginV});
        } else {
            scan.push_back(b);
        }
    }

    std::vector<std::vector<double>> roots_per_bracket(scan.size());
    std::vector<int> grid_per_bracket(scan.size(), grid);
    parallel_for(scan.size(), [&](std::size_t i) {
        auto [roots, used] = scan_verified(spec, scan[i], grid);
        roots_per_bracket[i] = std::move(roots);
        grid_per_bracket[i] = used;
    });

    std::vector<Solution> sols;
    for (const auto& roots : roots_per_bracket) {
        for (double v : roots) {
            if (star && std::abs(v - *star) <= kSingularMarginV) continue;
            if (std::abs(spec.model->a(v) - spec.lambda1) <= denom_margin(spec.lambda1)) continue;
            sols.push_back(classify(spec, reduce_u(spec, v), v));
        }
    }
    if (contains_zero) sols.push_back(classify(spec, 0.0, 0.0));

    dedup_and_sort(sols);
    std::erase_if(sols, [](const Solution& s) { return s.residual > kResidualBound; });

    SolutionSet out;
    out.solutions = std::move(sols);
    out.brackets = scan;
    out.grid_used = *std::max_element(grid_per_bracket.begin(), grid_per_bracket.end());
    return out;
}

SolutionSet solve_degenerate(const SystemSpec& spec) {
    if (!spec.degenerate()) {
        throw input_error("solve_degenerate: requires lambda1 = 0 or lambda2 = 0");
    }
    const ScalarModel& model = *spec.model;
    std::vector<Solution> candidates;
    auto push = [&](double s, double t) { candidates.push_back(classify(spec, s, t)); };

    if (spec.lambda1 == 0.0) {
        // a(t) != 0 forces s = lambda2, then F(t) = lambda2^2 / 2.
        for (double t : antiderivative_level_roots(model, 0.5 * spec.lambda2 * spec.lambda2)) {
            push(spec.lambda2, t);
        }
        // a(t) = 0 means t = 0, then s^2/2 = lambda2 s.
        push(0.0, 0.0);
        push(2.0 * spec.lambda2, 0.0);
    } else {
        // lambda2 = 0. s != 0 forces a(t) = lambda1 with unique root t0 (if
        // any), then s^2 = 2 (t0 a(t0) - F(t0)).
        if (auto t0 = find_level_increasing(model, spec.lambda1, -1e6, 1e6)) {
            const double gap = *t0 * model.a(*t0) - model.F(*t0);
            if (gap >= 0.0) {
                const double s = std::sqrt(2.0 * gap);
                push(s, *t0);
                push(-s, *t0);
            }
        }
        // s = 0 reduces to F(t) = lambda1 t.
        for (double t : linear_level_roots(model, spec.lambda1)) push(0.0, t);
    }

    std::erase_if(candidates, [](const Solution& s) { return s.residual > kResidualBound; });
    dedup_and_sort(candidates);
    if (candidates.size() > 4) {
        throw internal_error("solve_degenerate: more than 4 solutions survived verification");
    }

    SolutionSet out;
    out.solutions = std::move(candidates);
    out.grid_used = 0;
    return out;
}

QualitativeReport qualitative_check(const SystemSpec& spec, const SolutionSet& sols) {
    QualitativeReport report;
    report.count_bound_ok = true;
    report.sign_rule_ok = true;
    report.monotonicity_ok = true;

    for (const auto& sol : sols.solutions) {
        if (sol.below_lambda1) ++report.below_lambda1_count;
    }
    if (report.below_lambda1_count > 2) {
        report.count_bound_ok = false;
        std::ostringstream msg;
        msg << "count of solutions with a(t) < lambda1 is " << report.below_lambda1_count;
        report.violations.push_back(msg.str());
    }

    auto describe = [](const Solution& s) {
        std::ostringstream msg;
        msg << "(s=" << s.s << ", t=" << s.t << ")";
        return msg.str();
    };

    for (const auto& sol : sols.solutions) {
        if (sol.trivial || sol.indicator_sign == 0) continue;
        if (spec.lambda1 > 0.0 && sol.below_lambda1 && sol.indicator_sign <= 0) {
            report.sign_rule_ok = false;
            report.violations.push_back("sign rule (positive case) fails at " + describe(sol));
        }
        if (spec.lambda1 < 0.0 && !sol.below_lambda1 && sol.indicator_sign >= 0) {
            report.sign_rule_ok = false;
            report.violations.push_back("sign rule (negative case) fails at " + describe(sol));
        }
    }

    if (spec.lambda1 > 0.0) {
        std::vector<const Solution*> above;
        for (const auto& sol : sols.solutions) {
            if (sol.trivial) continue;
            if (spec.model->a(sol.t) > spec.lambda1) above.push_back(&sol);
        }
        std::sort(above.begin(), above.end(), [&](const Solution* x, const Solution* y) {
            return spec.model->a(x->t) < spec.model->a(y->t);
        });
        for (std::size_t i = 0; i + 1 < above.size(); ++i) {
            if (!(above[i]->indicator > above[i + 1]->indicator)) {
                report.monotonicity_ok = false;
                report.violations.push_back("indicator not decreasing between " +
                                            describe(*above[i]) + " and " + describe(*above[i + 1]));
            }
        }
    }
    return report;
}

} // namespace tnlab::entropy
