#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tnlab/errors.hpp"
#include "tnlab/ka.hpp"
#include "tnlab/linalg.hpp"
#include "tnlab/rng.hpp"
#include "tnlab/scalar_model.hpp"

#include <cmath>

using namespace tnlab;
using linalg::MinorSelector;

namespace {

Mat32 random_mat(SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
    Mat32 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = rng.uniform(lo, hi);
    return m;
}

} // namespace

TEST_CASE("numeric_rank on simple fixtures") {
    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 2);
    auto report = linalg::numeric_rank(zero, 1e-8);
    CHECK(report.rank == 0);
    CHECK(report.tolerance_used == 0.0);

    Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(3, 2);
    embedded(0, 0) = 1.0;
    embedded(1, 1) = 1.0;
    CHECK(linalg::numeric_rank(embedded, 1e-8).rank == 2);
}

TEST_CASE("numeric_rank input validation") {
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(linalg::numeric_rank(bad, 1e-8), input_error);
    Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(linalg::numeric_rank(ok, 0.0), input_error);
    CHECK_THROWS_AS(linalg::numeric_rank(ok, -1e-8), input_error);
}

TEST_CASE("rank report invariants") {
    SplitMix64 rng(0x11aa22bb);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat32 m = random_mat(rng);
        auto report = linalg::numeric_rank(m);
        REQUIRE(report.singular_values.size() == 2);
        CHECK(report.singular_values[0] >= report.singular_values[1]);
        int above = 0;
        for (double s : report.singular_values)
            if (s > report.tolerance_used) ++above;
        CHECK(above == report.rank);
    }
}

TEST_CASE("seeded rank-one outer products over extreme scales") {
    SplitMix64 rng(0xabcde1);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::Vector3d y;
        Eigen::Vector2d x;
        do {
            y << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
        } while (y.norm() < 0.1);
        do {
            x << rng.uniform(-1, 1), rng.uniform(-1, 1);
        } while (x.norm() < 0.1);
        const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
        const Mat32 m = scale * (y * x.transpose());
        CHECK(linalg::is_rank_one(m));
    }
}

TEST_CASE("seeded full-rank matrices have rank two") {
    SplitMix64 rng(0xf00d5);
    for (int trial = 0; trial < 1000; ++trial) {
        CHECK(linalg::numeric_rank(random_mat(rng)).rank == 2);
    }
}

TEST_CASE("column equilibration leaves rank invariant") {
    SplitMix64 rng(0x5ca1ab1e);
    for (int trial = 0; trial < 200; ++trial) {
        // Rank-2 3x6 product with hugely rescaled columns.
        Eigen::MatrixXd left(3, 2), right(2, 6);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) left(r, c) = rng.uniform(-1, 1);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 6; ++c) right(r, c) = rng.uniform(-1, 1);
        Eigen::MatrixXd m = left * right;
        Eigen::MatrixXd scaled = m;
        for (int c = 0; c < 6; ++c) scaled.col(c) *= std::pow(10.0, rng.uniform(-8.0, 8.0));

        const int rank_plain = linalg::numeric_rank(m).rank;
        const int rank_scaled = linalg::numeric_rank(scaled).rank;
        CHECK(rank_plain == 2);
        CHECK(rank_scaled == 2);
    }
}

TEST_CASE("minor determinants") {
    const auto z12 = MinorSelector::rows(0, 1);

    CHECK(linalg::minor_det(Mat32::Zero(), z12) == 0.0);

    Mat32 m;
    m << 1, 0,
         0, 1,
         5, 7;
    CHECK(linalg::minor_det(m, z12) == doctest::Approx(1.0));

    // Lifted-difference fixture: explicit arithmetic gives
    // (u-u')^2 - (v-v')(a(v)-a(v')) = 1 - (e-1) = 2 - e.
    auto model = make_exp_model();
    const Mat32 diff = ka::lift(*model, 1.0, 1.0) - ka::lift(*model, 0.0, 0.0);
    CHECK(linalg::minor_det(diff, z12) == doctest::Approx(2.0 - std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("minor_det is antisymmetric under row swap") {
    SplitMix64 rng(0xdead01);
    for (int trial = 0; trial < 100; ++trial) {
        const Mat32 m = random_mat(rng);
        for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
            Mat32 swapped = m;
            swapped.row(a).swap(swapped.row(b));
            const auto z = MinorSelector::rows(a, b);
            CHECK(linalg::minor_det(swapped, z) == doctest::Approx(-linalg::minor_det(m, z)));
        }
    }
}

TEST_CASE("minor selector validation and labels") {
    CHECK_THROWS_AS(MinorSelector::rows(1, 1), input_error);
    CHECK_THROWS_AS(MinorSelector::rows(0, 3), input_error);
    CHECK(MinorSelector::rows(2, 0).label() == "13");
    CHECK(MinorSelector::rows(1, 2).label() == "23");
}

TEST_CASE("is_rank_one fixtures") {
    Eigen::Vector3d y(1, 2, 3);
    Eigen::Vector2d x(4, 5);
    CHECK(linalg::is_rank_one(y * x.transpose()));
    CHECK_FALSE(linalg::is_rank_one(Mat32::Zero()));

    // Lifted points are never rank-one connected for this model.
    auto model = make_exp_model();
    const Mat32 diff = ka::lift(*model, 1.0, 1.0) - ka::lift(*model, 0.0, 0.0);
    CHECK_FALSE(linalg::is_rank_one(diff));
    CHECK(linalg::numeric_rank(diff).rank == 2);
}
