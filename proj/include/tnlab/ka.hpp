#pragma once

#include "tnlab/linalg.hpp"
#include "tnlab/scalar_model.hpp"

#include <Eigen/Dense>

#include <memory>
#include <utility>
#include <vector>

namespace tnlab::ka {

/// A finite configuration of points in the entropy set: parameter pairs
/// (u_i, v_i) together with the scalar model that lifts them to 3x2 matrices.
struct KaConfig {
    std::shared_ptr<const ScalarModel> model;
    std::vector<std::pair<double, double>> points; // (u_i, v_i)

    int size() const { return static_cast<int>(points.size()); }
};

/// Validating factory: requires a model, finite parameters, and pairwise
/// distinct lifted points (max-abs difference above dedup_tol).
KaConfig make_config(std::shared_ptr<const ScalarModel> model,
                     std::vector<std::pair<double, double>> points, double dedup_tol = 1e-12);

/// The lift of (u, v) into the entropy set: rows
///   (u, v), (a(v), u), (u a(v), u^2/2 + F(v)).
/// Throws model_error if the model evaluates to a non-finite value.
Mat32 lift(const ScalarModel& model, double u, double v);

/// The 3 x 2N configuration matrix: columns 1..N carry
/// (u_j, a(v_j), u_j a(v_j)) and columns N+1..2N carry
/// (v_j, u_j, u_j^2/2 + F(v_j)).
Eigen::MatrixXd build_A(const KaConfig& config);

/// The 3 x 2N matrix with Q's first column repeated N times followed by Q's
/// second column repeated N times.
Eigen::MatrixXd build_Pi(const Mat32& q, int n);

/// The configuration re-expressed relative to a pivot point: offsets
/// h_j = u_j - u_pivot and r_j = v_j - v_pivot, the translated function
/// values a_of_r[j] = a(v_j) - a(v_pivot) and
/// F_of_r[j] = F(v_j) - F(v_pivot) - a(v_pivot) r_j, and the translated
/// matrices with rows (h, r), (a_of_r, h), (h a_of_r, h^2/2 + F_of_r).
///
/// All pivot-indexed entries vanish, and the third-row product identities
///   h_j a_of_r[j]        = (u_j a_j - u_p a_p) - a_p h_j - u_p a_of_r[j]
///   h_j^2/2 + F_of_r[j]  = (u_j^2/2 + F_j - u_p^2/2 - F_p) - a_p r_j - u_p h_j
/// are verified on construction to 1e-10 relative; a violation indicates a
/// broken model and raises internal_error.
struct TranslatedSet {
    KaConfig config;
    int pivot = 0;
    std::vector<double> h;
    std::vector<double> r;
    std::vector<double> a_of_r;
    std::vector<double> F_of_r;
    std::vector<Mat32> matrices;
    double identity_residual = 0.0;
};

TranslatedSet translate(const KaConfig& config, int pivot);

/// The 3 x 2N matrix assembled from a translated set: columns 1..N carry
/// (h_j, a_of_r[j], h_j a_of_r[j]) and columns N+1..2N carry
/// (r_j, h_j, h_j^2/2 + F_of_r[j]). Equals build_A - build_Pi at the pivot
/// after the elementary row operation R3 -= a_p R1 + u_p R2.
Eigen::MatrixXd assemble_translated(const TranslatedSet& t);

/// Coefficients of the translated coupling system fitted by least squares:
///   h_j a_of_r[j]        = lambda1 h_j + lambda2 a_of_r[j]
///   h_j^2/2 + F_of_r[j]  = lambda1 r_j + lambda2 h_j
struct CoefficientPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    // Max-abs equation residual over the 2N equations, relative to the
    // system scale 1 + max |target|.
    double residual = 0.0;
};

/// Least-squares fit of the coefficient pair. Requires both block matrices
/// [h; a_of_r] and [r; h] to have numeric rank 2; otherwise throws
/// input_error naming the degenerate vector pair.
CoefficientPair fit_lambdas(const TranslatedSet& t);

/// Symmetric table of the projected-minor values
///   D(i, j) = (u_j - u_i)^2 - (v_j - v_i)(a(v_j) - a(v_i)),
/// indexed in ascending-v order with the permutation recorded. A row of
/// constant sign with no degenerate entries certifies that no ordering of
/// the configuration forms a T_N configuration.
struct SignTable {
    std::vector<int> order;                   // position -> original index (sorted by v)
    Eigen::MatrixXd values;                   // N x N in sorted order, zero diagonal
    std::vector<std::vector<int>> signs;      // -1 / 0 / +1; 0 on diagonal and degenerate entries
    std::vector<std::vector<bool>> degenerate;
    std::vector<int> constant_sign_rows;      // original indices
    double scale = 0.0;                       // max |D| over the table
    double tol_abs = 0.0;                     // rel_tol * scale

    bool ruled_out() const { return !constant_sign_rows.empty(); }
};

SignTable sign_table(const KaConfig& config, double rel_tol = 1e-12);
SignTable sign_table(const TranslatedSet& t, double rel_tol = 1e-12);

} // namespace tnlab::ka
