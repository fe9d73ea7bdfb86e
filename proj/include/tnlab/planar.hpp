#pragma once

#include "tnlab/ka.hpp"
#include "tnlab/linalg.hpp"
#include "tnlab/tn.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace tnlab::planar {

/// Dimension of Span{X_j - X_i : j}: the numeric rank of the N x 6 matrix of
/// flattened differences.
int span_dimension(const tn::MatrixSet& set, int pivot, double rel_tol = linalg::kDefaultRankTol);

enum class Variant {
    Case1, // offset rows (h, r) independent; a_of_r, h*a_of_r, F-row fitted against them
    Case2, // offset rows (h, a_of_r) independent; r, h*a_of_r, F-row fitted against them
};

/// Row-fit coefficients of a translated set whose difference span is
/// two-dimensional. In Case1:
///   a_of_r = alpha1 h + alpha2 r
///   h a_of_r = beta1 h + beta2 r
///   h^2/2 + F_of_r = gamma1 h + gamma2 r
/// In Case2 the roles of r and a_of_r swap in the basis. When the two
/// consistency relations hold (Case1: gamma2 - beta1 = -gamma1 alpha1 and
/// beta2 = gamma1 alpha2; Case2: beta2 - gamma1 = -beta1 alpha1 and
/// gamma2 = beta1 alpha2), the span contains two rank-one directions and the
/// fits collapse to the translated coupling system with the derived lambda
/// pair (Case1: lambda = (gamma2, gamma1); Case2: lambda = (beta1, beta2)).
struct PlanarCoefficients {
    Variant variant = Variant::Case1;
    std::array<double, 2> alpha{};
    std::array<double, 2> beta{};
    std::array<double, 2> gamma{};
    double fit_residual = 0.0;         // max relative residual of the three row fits
    bool consistency_ok = false;
    double consistency_residual = 0.0; // max-abs of the two relation defects, relative
    std::optional<std::array<double, 2>> lambda;
    double lambda_residual = 0.0;      // residual of the coupling system under the
                                       // derived lambda (or the best LS lambda when
                                       // consistency fails)
};

/// Fits the planar coefficient rows. Requires the stacked 5 x N row matrix
/// (h, r, a_of_r, h a_of_r, F-row) to have numeric rank exactly 2; throws
/// input_error naming the computed rank otherwise. Case1 is preferred when
/// both candidate basis pairs are independent.
PlanarCoefficients fit_planar(const ka::TranslatedSet& t, double rel_tol = linalg::kDefaultRankTol);

/// Basis of the two-dimensional matrix span described by the coefficients:
/// the spanning matrices at parameters (1, 0) and (0, 1).
std::pair<Mat32, Mat32> span_basis(const PlanarCoefficients& c);

/// Rank-one directions in the plane spanned by b1 and b2: projective
/// solutions (s : t) where all three 2x2 minors of s b1 + t b2 vanish.
/// Each minor is a quadratic form in (s, t); its projective roots are found
/// per quadratic via discriminants in the chart t = 1 plus the point at
/// infinity, and the root sets are intersected with tolerance angle_tol on
/// the projective angle. The count is 0, 1 or 2 unless the whole plane is
/// rank-deficient (infinite = true).
struct RankOneDirections {
    int count = 0;
    bool infinite = false;
    std::vector<Eigen::Vector2d> directions; // unit vectors, first nonzero component > 0
};

/// Throws input_error when the basis matrices are linearly dependent.
RankOneDirections rank_one_directions(const Mat32& b1, const Mat32& b2, double angle_tol = 1e-7);

} // namespace tnlab::planar
