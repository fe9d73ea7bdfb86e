#include "tnlab/scalar_model.hpp"

#include "tnlab/errors.hpp"
#include "tnlab/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace tnlab {

namespace {

class ExpModel final : public ScalarModel {
  public:
    double a(double t) const override { return std::expm1(t); }
    double a_prime(double t) const override { return std::exp(t); }
    double a_double_prime(double t) const override { return std::exp(t); }
    double F(double t) const override { return std::expm1(t) - t; }
    std::string kind() const override { return "exp"; }
};

class ExpCubicModel final : public ScalarModel {
  public:
    explicit ExpCubicModel(double k) : k_(k) {
        if (!(k > 0.0) || !std::isfinite(k)) throw input_error("exp-cubic model: k must be positive");
    }

    double a(double t) const override {
        if (t <= 0.0) return std::expm1(t);
        return ((k_ / 6.0) * t + 0.5) * t * t + t;
    }
    double a_prime(double t) const override {
        if (t <= 0.0) return std::exp(t);
        return (0.5 * k_ * t + 1.0) * t + 1.0;
    }
    double a_double_prime(double t) const override {
        if (t <= 0.0) return std::exp(t);
        return k_ * t + 1.0;
    }
    double F(double t) const override {
        if (t <= 0.0) return std::expm1(t) - t;
        return (((k_ / 24.0) * t + 1.0 / 6.0) * t + 0.5) * t * t;
    }
    std::string kind() const override { return "appendix"; }

    double k() const { return k_; }

  private:
    double k_;
};

// Natural parameterization: on segment [t_i, t_{i+1}], a(t) is the cubic
// c0 + c1*dt + c2*dt^2 + c3*dt^3 with dt = t - t_i.
class SplineTableModel final : public ScalarModel {
  public:
    SplineTableModel(std::vector<double> knots, std::vector<std::array<double, 4>> coeffs,
                     double a_shift)
        : knots_(std::move(knots)), coeffs_(std::move(coeffs)), a_shift_(a_shift) {
        // Segment antiderivatives, accumulated so that F(0) = 0.
        seg_F_.assign(coeffs_.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const double w = knots_[i + 1] - knots_[i];
            seg_F_[i + 1] = seg_F_[i] + segment_integral(i, w);
        }
        F_shift_ = F_raw(0.0);
    }

    double a(double t) const override {
        const auto [seg, dt] = locate(t);
        const auto& c = coeffs_[seg];
        return ((c[3] * dt + c[2]) * dt + c[1]) * dt + c[0] - a_shift_;
    }
    double a_prime(double t) const override {
        const auto [seg, dt] = locate(t);
        const auto& c = coeffs_[seg];
        return (3.0 * c[3] * dt + 2.0 * c[2]) * dt + c[1];
    }
    double a_double_prime(double t) const override {
        const auto [seg, dt] = locate(t);
        const auto& c = coeffs_[seg];
        return 6.0 * c[3] * dt + 2.0 * c[2];
    }
    double F(double t) const override { return F_raw(t) - F_shift_ - a_shift_ * t; }
    std::string kind() const override { return "table"; }

  private:
    std::pair<std::size_t, double> locate(double t) const {
        // Clamp to the end segments; their cubics extend beyond the knot range.
        std::size_t seg;
        if (t <= knots_.front()) {
            seg = 0;
        } else if (t >= knots_.back()) {
            seg = coeffs_.size() - 1;
        } else {
            seg = static_cast<std::size_t>(
                      std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin()) -
                  1;
        }
        return {seg, t - knots_[seg]};
    }

    double segment_integral(std::size_t seg, double dt) const {
        const auto& c = coeffs_[seg];
        return (((c[3] / 4.0 * dt + c[2] / 3.0) * dt + c[1] / 2.0) * dt + c[0]) * dt;
    }

    // Antiderivative of the raw (unshifted) spline with F_raw(first knot) = 0.
    double F_raw(double t) const {
        const auto [seg, dt] = locate(t);
        return seg_F_[seg] + segment_integral(seg, dt);
    }

    std::vector<double> knots_;
    std::vector<std::array<double, 4>> coeffs_;
    std::vector<double> seg_F_;
    double a_shift_ = 0.0;
    double F_shift_ = 0.0;
};

// Not-a-knot cubic spline through (t_i, y_i). Returns per-segment coefficients.
std::vector<std::array<double, 4>> spline_coefficients(const std::vector<double>& t,
                                                       const std::vector<double>& y) {
    const int n = static_cast<int>(t.size());
    const int m = n - 1; // segments
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    std::vector<double> w(m), slope(m);
    for (int i = 0; i < m; ++i) {
        w[i] = t[i + 1] - t[i];
        slope[i] = (y[i + 1] - y[i]) / w[i];
    }
    // Unknowns: second derivatives M_i at the knots.
    for (int i = 1; i < n - 1; ++i) {
        lhs(i, i - 1) = w[i - 1];
        lhs(i, i) = 2.0 * (w[i - 1] + w[i]);
        lhs(i, i + 1) = w[i];
        rhs(i) = 6.0 * (slope[i] - slope[i - 1]);
    }
    // Not-a-knot: third derivative continuous across the second and
    // second-to-last knots.
    lhs(0, 0) = w[1];
    lhs(0, 1) = -(w[0] + w[1]);
    lhs(0, 2) = w[0];
    lhs(n - 1, n - 3) = w[m - 1];
    lhs(n - 1, n - 2) = -(w[m - 2] + w[m - 1]);
    lhs(n - 1, n - 1) = w[m - 2];

    Eigen::VectorXd M = lhs.fullPivLu().solve(rhs);

    std::vector<std::array<double, 4>> coeffs(m);
    for (int i = 0; i < m; ++i) {
        coeffs[i][0] = y[i];
        coeffs[i][1] = slope[i] - w[i] * (2.0 * M(i) + M(i + 1)) / 6.0;
        coeffs[i][2] = M(i) / 2.0;
        coeffs[i][3] = (M(i + 1) - M(i)) / (6.0 * w[i]);
    }
    return coeffs;
}

} // namespace

std::shared_ptr<const ScalarModel> make_exp_model() {
    return std::make_shared<ExpModel>();
}

std::shared_ptr<const ScalarModel> make_exp_cubic_model(double k) {
    return std::make_shared<ExpCubicModel>(k);
}

std::shared_ptr<const ScalarModel> make_table_model(const std::vector<double>& t,
                                                    const std::vector<double>& a_values) {
    if (t.size() != a_values.size()) throw input_error("table model: t and a lists differ in length");
    if (t.size() < 4) throw input_error("table model: need at least 4 samples");
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        if (!(t[i] < t[i + 1])) throw input_error("table model: t samples must be strictly increasing");
    }
    for (double v : t)
        if (!std::isfinite(v)) throw input_error("table model: non-finite t sample");
    for (double v : a_values)
        if (!std::isfinite(v)) throw input_error("table model: non-finite a sample");

    auto coeffs = spline_coefficients(t, a_values);
    auto probe = SplineTableModel(t, coeffs, 0.0);
    auto model = std::make_shared<SplineTableModel>(t, coeffs, probe.a(0.0));

    auto check = spot_check_model(*model, t.front(), t.back(), 512, 0x7ab1e5eedULL);
    if (!check.increasing_ok || !check.convex_ok) {
        throw input_error("table model: interpolant is not strictly increasing and convex "
                          "over the sample range");
    }
    return model;
}

ModelCheckReport spot_check_model(const ScalarModel& model, double lo, double hi, int n,
                                  std::uint64_t seed, double h) {
    ModelCheckReport report;
    report.increasing_ok = true;
    report.convex_ok = true;

    SplitMix64 rng(seed);
    for (int i = 0; i < n; ++i) {
        const double t = rng.uniform(lo, hi);
        const double ap = model.a_prime(t);
        const double app = model.a_double_prime(t);
        if (!(std::isfinite(ap) && ap > 0.0)) report.increasing_ok = false;
        if (!(std::isfinite(app) && app > 0.0)) report.convex_ok = false;
        const double centered = (model.F(t + h) - model.F(t - h)) / (2.0 * h);
        const double curvature = std::max(
            {model.a_double_prime(t - h), model.a_double_prime(t), model.a_double_prime(t + h)});
        const double bound = (h * h / 6.0) * 4.0 * curvature +
                             1e-10 * (1.0 + std::abs(model.F(t)) / h + std::abs(model.a(t)));
        report.max_antiderivative_err =
            std::max(report.max_antiderivative_err, std::abs(centered - model.a(t)) / bound);
    }
    report.normalized = std::abs(model.a(0.0)) <= 1e-12 && std::abs(model.F(0.0)) <= 1e-12;
    return report;
}

} // namespace tnlab
