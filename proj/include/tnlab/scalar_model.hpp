#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tnlab {

/// A strictly increasing, strictly convex C^2 function a together with its
/// first two derivatives and the antiderivative F (F' = a). Normalized
/// instances satisfy a(0) = 0 and F(0) = 0.
///
/// Implementations must be pure and re-entrant: evaluation from multiple
/// threads at once is required.
class ScalarModel {
  public:
    virtual ~ScalarModel() = default;

    virtual double a(double t) const = 0;
    virtual double a_prime(double t) const = 0;
    virtual double a_double_prime(double t) const = 0;
    virtual double F(double t) const = 0;

    /// Short kind identifier used by configs and reports ("exp", "appendix", "table").
    virtual std::string kind() const = 0;
};

/// a(t) = e^t - 1, F(t) = e^t - t - 1.
std::shared_ptr<const ScalarModel> make_exp_model();

/// Exponential branch below zero spliced with a cubic branch above:
///   a(t) = e^t - 1            for t <= 0
///   a(t) = (k/6)t^3 + t^2/2 + t   for t > 0
/// C^2 at the splice; k > 0 controls how fast the convexity stiffens for
/// t > 0. This is the model behind the CLI's "appendix" kind.
std::shared_ptr<const ScalarModel> make_exp_cubic_model(double k);

/// C^2 cubic-spline interpolant (not-a-knot) of user samples (t_i, a_i),
/// normalized so a(0) = 0, with F integrated exactly from 0. Evaluation
/// outside the knot range continues the end cubics. Construction rejects
/// tables whose interpolant fails the increasing/convex spot checks.
std::shared_ptr<const ScalarModel> make_table_model(const std::vector<double>& t,
                                                    const std::vector<double>& a_values);

struct ModelCheckReport {
    bool increasing_ok = false;     // a' > 0 at every sampled point
    bool convex_ok = false;         // a'' > 0 at every sampled point
    bool normalized = false;        // a(0) = 0 and F(0) = 0 to 1e-12
    // Worst ratio of the centered-difference defect |(F(t+h)-F(t-h))/2h - a(t)|
    // to the second-order bound (h^2/6) max a'' near t (plus a roundoff floor).
    // F' = a holds to second order iff this stays <= 1.
    double max_antiderivative_err = 0.0;
    bool ok() const { return increasing_ok && convex_ok && normalized; }
};

/// Spot-checks model validity on a seeded random grid of n points in [lo, hi]:
/// strict monotonicity and convexity of a, normalization, and that F' = a to
/// second order in the step h.
ModelCheckReport spot_check_model(const ScalarModel& model, double lo, double hi, int n,
                                  std::uint64_t seed, double h = 1e-4);

} // namespace tnlab
