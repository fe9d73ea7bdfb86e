#pragma once

#include "tnlab/scalar_model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tnlab::entropy {

/// The two-unknown coupling system in (s, t):
///
///   s a(t)         = lambda1 s + lambda2 a(t)
///   s^2/2 + F(t)   = lambda1 t + lambda2 s
///
/// for a normalized scalar model (a(0) = F(0) = 0).
struct SystemSpec {
    std::shared_ptr<const ScalarModel> model;
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    /// Validates normalization of the model; throws input_error otherwise.
    SystemSpec(std::shared_ptr<const ScalarModel> m, double l1, double l2);

    bool degenerate() const { return lambda1 == 0.0 || lambda2 == 0.0; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Solution {
    double s = 0.0;
    double t = 0.0;
    double residual = 0.0;     // max relative residual of the two equations
    bool trivial = false;      // (s, t) == (0, 0) to dedup tolerance
    bool below_lambda1 = false; // a(t) < lambda1
    double indicator = 0.0;    // s^2 - t a(t)
    int indicator_sign = 0;    // -1 / 0 / +1 with a small relative tolerance
};

struct SolutionSet {
    std::vector<Solution> solutions; // sorted by (t, s)
    std::vector<Interval> brackets;  // the search intervals actually scanned
    int grid_used = 0;               // points per bracket after escalation
};

/// Margin (in v) kept clear around the singular level a(v) = lambda1.
inline constexpr double kSingularMarginV = 1e-9;

/// Relative residual of the two system equations at (s, t):
/// max of |lhs - rhs| / (1 + max |term|) over both equations.
double system_residual(const SystemSpec& spec, double s, double t);

/// The s eliminating the first equation: s = lambda2 a(v) / (a(v) - lambda1).
/// Requires lambda1, lambda2 != 0. Throws input_error when the denominator is
/// within 1e-12 * (1 + |lambda1|) of zero.
double reduce_u(const SystemSpec& spec, double v);

/// The two sides of the reduced scalar equation:
///   p(v) = F(v) - lambda1 v - lambda2^2 / 2
///   q(v) = -lambda1^2 lambda2^2 / (2 (a(v) - lambda1)^2)
/// Roots of p - q correspond to solutions of the system via reduce_u.
std::pair<double, double> pq_values(const SystemSpec& spec, double v);

/// Unique v with a(v) = lambda1, when lambda1 is in the range of a over
/// [lo, hi]; empty otherwise. Bisection on the strictly increasing a.
std::optional<double> singular_v(const SystemSpec& spec, double lo = -1e6, double hi = 1e6);

/// Default search brackets covering [lo, hi]: split at the singular level
/// (with kSingularMarginV clearance) and at v = 0.
std::vector<Interval> default_brackets(const SystemSpec& spec, double lo = -40.0, double hi = 1.0);

/// Root isolation for the nondegenerate system (lambda1, lambda2 != 0).
///
/// Scans p - q for sign changes on `grid` points per bracket (escalated x10,
/// up to 1e7 per bracket, while a phase-shifted rescan disagrees on the root
/// count), refines each root by bisection to |dv| <= 1e-13 (1 + |v|), then
/// polishes with a bracketed Newton step using p' = a(v) - lambda1 and
/// q' = lambda1^2 lambda2^2 a'(v) / (a(v) - lambda1)^3. Each root maps to
/// (s, t) = (reduce_u(v), v). The trivial solution (0, 0) is seeded whenever
/// a bracket contains 0. Results are deduplicated at 1e-9 in max-norm and
/// re-verified against the original system to residual <= 1e-9.
SolutionSet solve(const SystemSpec& spec, const std::vector<Interval>& brackets, int grid = 100000);

/// Case split for lambda1 = 0 or lambda2 = 0; at most 4 solutions exist.
/// Throws input_error when both lambdas are nonzero.
SolutionSet solve_degenerate(const SystemSpec& spec);

/// Qualitative structure report for a solved nondegenerate system:
///  (a) at most two solutions satisfy a(t) < lambda1;
///  (b) nontrivial solutions with nonzero indicator obey the sign rule:
///      lambda1 > 0 and a(t) < lambda1  =>  s^2 - t a(t) > 0,
///      lambda1 < 0 and a(t) > lambda1  =>  s^2 - t a(t) < 0;
///  (c) for lambda1 > 0, the indicator strictly decreases along nontrivial
///      solutions ordered by lambda1 < a(t1) < a(t2).
struct QualitativeReport {
    bool count_bound_ok = false;
    bool sign_rule_ok = false;
    bool monotonicity_ok = false;
    int below_lambda1_count = 0;
    std::vector<std::string> violations;
    bool ok() const { return count_bound_ok && sign_rule_ok && monotonicity_ok; }
};

QualitativeReport qualitative_check(const SystemSpec& spec, const SolutionSet& sols);

} // namespace tnlab::entropy
