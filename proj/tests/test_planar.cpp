#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tnlab/errors.hpp"
#include "tnlab/entropy_system.hpp"
#include "tnlab/ka.hpp"
#include "tnlab/planar.hpp"
#include "tnlab/rng.hpp"
#include "tnlab/scalar_model.hpp"
#include "tnlab/tn.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace tnlab;
using namespace tnlab::planar;

namespace {

// Builds translated-set data lying exactly on the planar regime for chosen
// case-1 coefficients. The offset pairs (h, r) are sampled from the conic
//   alpha1 h^2 + alpha2 h r = beta1 h + beta2 r,
// which makes the product row h * a_of_r linear in (h, r) by construction.
// With gamma derived from the consistency relations, the span contains two
// rank-one directions and the coupling system holds with
// lambda = (gamma2, gamma1).
struct PlanarFixture {
    ka::TranslatedSet t;
    std::array<double, 2> alpha, beta, gamma, lambda;
};

PlanarFixture planar_fixture(std::array<double, 2> alpha, std::array<double, 2> beta,
                             const std::vector<double>& h_samples, bool consistent = true,
                             double gamma2_offset = 0.0) {
    PlanarFixture fx;
    fx.alpha = alpha;
    fx.beta = beta;
    const double gamma1 = beta[1] / alpha[1];
    double gamma2 = beta[0] - gamma1 * alpha[0];
    if (!consistent) gamma2 += gamma2_offset;
    fx.gamma = {gamma1, gamma2};
    fx.lambda = {gamma2, gamma1};

    fx.t.pivot = 0;
    fx.t.h.push_back(0.0);
    fx.t.r.push_back(0.0);
    fx.t.a_of_r.push_back(0.0);
    fx.t.F_of_r.push_back(0.0);
    for (double h : h_samples) {
        const double denom = alpha[1] * h - beta[1];
        const double r = (beta[0] * h - alpha[0] * h * h) / denom;
        fx.t.h.push_back(h);
        fx.t.r.push_back(r);
        fx.t.a_of_r.push_back(alpha[0] * h + alpha[1] * r);
        fx.t.F_of_r.push_back(fx.gamma[0] * h + fx.gamma[1] * r - 0.5 * h * h);
    }
    const int n = static_cast<int>(fx.t.h.size());
    fx.t.matrices.resize(n);
    for (int j = 0; j < n; ++j) {
        fx.t.matrices[j] << fx.t.h[j], fx.t.r[j],
            fx.t.a_of_r[j], fx.t.h[j],
            fx.t.h[j] * fx.t.a_of_r[j], 0.5 * fx.t.h[j] * fx.t.h[j] + fx.t.F_of_r[j];
    }
    return fx;
}

tn::MatrixSet fixture_matrix_set(const PlanarFixture& fx) {
    return tn::make_matrix_set(fx.t.matrices);
}

} // namespace

TEST_CASE("span dimension fixtures") {
    // All points equal: zero-dimensional difference span.
    tn::MatrixSet constant;
    constant.points = {Mat32::Ones(), Mat32::Ones(), Mat32::Ones()};
    CHECK(span_dimension(constant, 0) == 0);

    auto fx = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1});
    CHECK(span_dimension(fixture_matrix_set(fx), 0) == 2);

    CHECK_THROWS_AS(span_dimension(constant, 5), input_error);
}

TEST_CASE("generic lifted configurations sit outside the planar regime") {
    // Free parameter choices do not satisfy the coupling system, so the
    // differences fill out the full five-dimensional lifted surface span.
    auto model = make_exp_model();
    auto config = ka::make_config(
        model, {{0.3, -1.2}, {-0.7, 0.4}, {1.1, 0.9}, {0.2, 1.6}, {-1.4, -0.3}, {0.8, 0.1}});
    std::vector<Mat32> lifted;
    for (auto [u, v] : config.points) lifted.push_back(ka::lift(*model, u, v));
    auto set = tn::make_matrix_set(lifted);
    const int dim = span_dimension(set, 0);
    CHECK(dim == 5);

    CHECK_THROWS_WITH_AS(static_cast<void>(fit_planar(ka::translate(config, 0))),
                         doctest::Contains("dimension 5"), input_error);
}

TEST_CASE("solved configurations have difference span dimension 2 or 3") {
    auto model = make_exp_cubic_model(1e8);
    entropy::SystemSpec spec(model, -0.5, 0.1);
    const double split = std::log(0.5);
    auto sols = entropy::solve(spec, {{-40.0, split - 1e-9}, {split + 1e-9, 0.0}, {0.0, 1.0}});
    std::vector<Mat32> lifted;
    for (const auto& s : sols.solutions) lifted.push_back(ka::lift(*model, s.s, s.t));
    auto set = tn::make_matrix_set(lifted);
    for (int pivot = 0; pivot < set.size(); ++pivot) {
        const int dim = span_dimension(set, pivot);
        CHECK(dim >= 2);
        CHECK(dim <= 3);
    }
}

TEST_CASE("fit_planar recovers fixture coefficients and the derived lambda pair") {
    auto fx = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1});
    auto coeffs = fit_planar(fx.t);

    CHECK(coeffs.variant == Variant::Case1);
    CHECK(coeffs.alpha[0] == doctest::Approx(fx.alpha[0]).epsilon(1e-9));
    CHECK(coeffs.alpha[1] == doctest::Approx(fx.alpha[1]).epsilon(1e-9));
    CHECK(coeffs.beta[0] == doctest::Approx(fx.beta[0]).epsilon(1e-9));
    CHECK(coeffs.beta[1] == doctest::Approx(fx.beta[1]).epsilon(1e-9));
    CHECK(coeffs.gamma[0] == doctest::Approx(fx.gamma[0]).epsilon(1e-9));
    CHECK(coeffs.gamma[1] == doctest::Approx(fx.gamma[1]).epsilon(1e-9));
    CHECK(coeffs.fit_residual <= 1e-9);
    CHECK(coeffs.consistency_ok);
    REQUIRE(coeffs.lambda.has_value());
    CHECK((*coeffs.lambda)[0] == doctest::Approx(fx.lambda[0]).epsilon(1e-9));
    CHECK((*coeffs.lambda)[1] == doctest::Approx(fx.lambda[1]).epsilon(1e-9));
    CHECK(coeffs.lambda_residual <= 1e-9);

    // Row reconstruction from the fitted coefficients.
    for (std::size_t j = 0; j < fx.t.h.size(); ++j) {
        const double h = fx.t.h[j], r = fx.t.r[j];
        CHECK(coeffs.alpha[0] * h + coeffs.alpha[1] * r ==
              doctest::Approx(fx.t.a_of_r[j]).epsilon(1e-8));
        CHECK(coeffs.beta[0] * h + coeffs.beta[1] * r ==
              doctest::Approx(h * fx.t.a_of_r[j]).epsilon(1e-8));
        CHECK(coeffs.gamma[0] * h + coeffs.gamma[1] * r ==
              doctest::Approx(0.5 * h * h + fx.t.F_of_r[j]).epsilon(1e-8));
    }
}

TEST_CASE("fit_planar falls back to the second variant when r is parallel to h") {
    // r = 0.6 h exactly, a_of_r nonlinear in h: the (h, r) pair is dependent,
    // so the fit must run against the (h, a_of_r) basis. Samples sit on the
    // hyperbola a = beta1 h / (h - beta2), which keeps the product row linear
    // in the basis; gamma follows from the consistency relations.
    const double a1 = 0.6, b1 = 0.5, b2 = -0.8;
    const double g1 = b2 + b1 * a1; // consistency relations with alpha2 = 0
    ka::TranslatedSet t;
    t.pivot = 0;
    t.h = {0.0};
    t.r = {0.0};
    t.a_of_r = {0.0};
    t.F_of_r = {0.0};
    for (double h : {0.3, -0.4, 1.1, 0.7, -1.3}) {
        const double a = b1 * h / (h - b2);
        t.h.push_back(h);
        t.r.push_back(a1 * h);
        t.a_of_r.push_back(a);
        t.F_of_r.push_back(g1 * h - 0.5 * h * h);
    }
    const int n = static_cast<int>(t.h.size());
    t.matrices.resize(n);
    for (int j = 0; j < n; ++j) {
        t.matrices[j] << t.h[j], t.r[j], t.a_of_r[j], t.h[j], t.h[j] * t.a_of_r[j],
            0.5 * t.h[j] * t.h[j] + t.F_of_r[j];
    }

    auto coeffs = fit_planar(t);
    CHECK(coeffs.variant == Variant::Case2);
    CHECK(coeffs.alpha[0] == doctest::Approx(a1).epsilon(1e-9));
    CHECK(coeffs.alpha[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(coeffs.beta[0] == doctest::Approx(b1).epsilon(1e-9));
    CHECK(coeffs.beta[1] == doctest::Approx(b2).epsilon(1e-9));
    CHECK(coeffs.gamma[0] == doctest::Approx(g1).epsilon(1e-9));
    CHECK(std::abs(coeffs.gamma[1]) <= 1e-9);
    CHECK(coeffs.consistency_ok);
    REQUIRE(coeffs.lambda.has_value());
    CHECK((*coeffs.lambda)[0] == doctest::Approx(b1).epsilon(1e-9));
    CHECK((*coeffs.lambda)[1] == doctest::Approx(b2).epsilon(1e-9));
    CHECK(coeffs.lambda_residual <= 1e-9);

    auto [s1, s2] = span_basis(coeffs);
    auto directions = rank_one_directions(s1, s2);
    CHECK(directions.count == 2);
    CHECK(oracles::angular_direction_count(s1, s2) == 2);
}

TEST_CASE("consistency relations hold iff the derived coupling system holds") {
    auto good = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1});
    auto good_fit = fit_planar(good.t);
    CHECK(good_fit.consistency_ok);
    CHECK(good_fit.lambda_residual <= 1e-9);

    // Perturb one relation by 1e-3: the best-possible lambda residual blows
    // up well above 1e-5 and no lambda pair is reported.
    auto bad = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1},
                              /*consistent=*/false, /*gamma2_offset=*/1e-3);
    auto bad_fit = fit_planar(bad.t);
    CHECK_FALSE(bad_fit.consistency_ok);
    CHECK(bad_fit.consistency_residual > 1e-5);
    CHECK_FALSE(bad_fit.lambda.has_value());
    CHECK(bad_fit.lambda_residual > 1e-5);
}

TEST_CASE("rank-one directions: coordinate-axis fixture") {
    Mat32 b1 = Mat32::Zero(), b2 = Mat32::Zero();
    b1(0, 0) = 1.0;
    b2(1, 1) = 1.0;
    auto result = rank_one_directions(b1, b2);
    CHECK_FALSE(result.infinite);
    CHECK(result.count == 2);
    REQUIRE(result.directions.size() == 2);
    // Directions are the coordinate axes.
    bool axis_s = false, axis_t = false;
    for (const auto& d : result.directions) {
        if (std::abs(d(0)) > 0.999) axis_s = true;
        if (std::abs(d(1)) > 0.999) axis_t = true;
    }
    CHECK(axis_s);
    CHECK(axis_t);
    CHECK(oracles::angular_direction_count(b1, b2) == 2);
}

TEST_CASE("rank-one directions: random full-rank bases typically have none") {
    SplitMix64 rng(0x8badf00d);
    int zero_count_cases = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Mat32 b1, b2;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 2; ++c) {
                b1(r, c) = rng.uniform(-1, 1);
                b2(r, c) = rng.uniform(-1, 1);
            }
        }
        auto result = rank_one_directions(b1, b2);
        REQUIRE_FALSE(result.infinite);
        const int oracle = oracles::angular_direction_count(b1, b2);
        CHECK(result.count == oracle);
        if (result.count == 0) ++zero_count_cases;
    }
    CHECK(zero_count_cases > 25); // the generic case dominates
}

TEST_CASE("rank-one directions: planar fixture span has exactly two") {
    auto fx = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1});
    auto coeffs = fit_planar(fx.t);
    auto [b1, b2] = span_basis(coeffs);
    auto result = rank_one_directions(b1, b2);
    CHECK_FALSE(result.infinite);
    CHECK(result.count == 2);
    CHECK(oracles::angular_direction_count(b1, b2) == 2);

    // Every translated fixture matrix lies in the span.
    for (std::size_t j = 0; j < fx.t.h.size(); ++j) {
        const Mat32 reconstructed = fx.t.h[j] * b1 + fx.t.r[j] * b2;
        CHECK(linalg::max_abs(reconstructed - fx.t.matrices[j]) <= 1e-9);
    }
}

TEST_CASE("rank-one direction count is invariant under change of basis") {
    auto fx = planar_fixture({1.0, 1.0}, {0.4, 0.7}, {0.3, -0.5, 0.8, 1.2, -1.1});
    auto [b1, b2] = span_basis(fit_planar(fx.t));
    auto base = rank_one_directions(b1, b2);

    SplitMix64 rng(0x1234);
    for (int trial = 0; trial < 25; ++trial) {
        double m00, m01, m10, m11;
        do {
            m00 = rng.uniform(-2, 2);
            m01 = rng.uniform(-2, 2);
            m10 = rng.uniform(-2, 2);
            m11 = rng.uniform(-2, 2);
        } while (std::abs(m00 * m11 - m01 * m10) < 0.1);
        const Mat32 c1 = m00 * b1 + m01 * b2;
        const Mat32 c2 = m10 * b1 + m11 * b2;
        auto changed = rank_one_directions(c1, c2);
        CHECK(changed.count == base.count);
        // Same projective direction set after mapping through the basis
        // change: compare via minor values at the reported directions.
        for (const auto& d : changed.directions) {
            const Mat32 m = d(0) * c1 + d(1) * c2;
            for (const auto& z : {linalg::MinorSelector::rows(0, 1),
                                  linalg::MinorSelector::rows(0, 2),
                                  linalg::MinorSelector::rows(1, 2)}) {
                CHECK(std::abs(linalg::minor_det(m, z)) <= 1e-6);
            }
        }
    }
}

TEST_CASE("rank-one directions input guards and the degenerate plane") {
    Mat32 b1 = Mat32::Ones();
    CHECK_THROWS_AS(rank_one_directions(b1, 2.0 * b1), input_error);

    // Span of e1 x e1 and e1 x e2: every member has rank <= 1.
    Mat32 c1 = Mat32::Zero(), c2 = Mat32::Zero();
    c1(0, 0) = 1.0;
    c2(0, 1) = 1.0;
    auto result = rank_one_directions(c1, c2);
    CHECK(result.infinite);
    CHECK(oracles::angular_direction_count(c1, c2) == -1);
}
