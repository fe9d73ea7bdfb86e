#pragma once

#include "tnlab/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tnlab::tn {

/// An ordered collection of pairwise-distinct 3x2 matrices.
struct MatrixSet {
    std::vector<Mat32> points;
    std::vector<std::string> labels; // empty, or one label per point

    int size() const { return static_cast<int>(points.size()); }
};

/// Validating factory: all entries finite, points pairwise distinct
/// (max-abs difference above dedup_tol), labels empty or matching in count.
MatrixSet make_matrix_set(std::vector<Mat32> points, std::vector<std::string> labels = {},
                          double dedup_tol = 1e-12);

/// Witness data for an N-point T_N configuration: a base point, rank-one
/// increments summing to zero, and multipliers strictly greater than 1.
/// Point i of the ordered set must equal
///   base + increments[0] + ... + increments[i-1] + multipliers[i] * increments[i].
struct TnCertificate {
    Mat32 base = Mat32::Zero();
    std::vector<Mat32> increments;
    std::vector<double> multipliers;
};

/// Numeric slack demanded above the strict bound multipliers > 1.
inline constexpr double kKappaMargin = 1e-9;

struct CertificateCheck {
    double max_telescoping_residual = 0.0; // max-abs over all N point equations
    double sum_residual = 0.0;             // max-abs entry of the increment sum
    bool increments_rank_one = false;
    bool multipliers_ok = false;           // all >= 1 + kKappaMargin
    bool no_rank_one_connections = false;  // pairwise rank(X_i - X_j) == 2
    bool telescoping_ok = false;
    bool sum_ok = false;
    bool ok() const {
        return telescoping_ok && sum_ok && increments_rank_one && multipliers_ok &&
               no_rank_one_connections;
    }
};

/// Full certificate diagnosis at tolerance tol (used for both the
/// telescoping residuals and the increment-sum residual).
/// Throws input_error on a length mismatch between set and certificate.
CertificateCheck check_certificate(const MatrixSet& set, const TnCertificate& cert, double tol);

/// True iff every clause of check_certificate passes.
bool verify_certificate(const MatrixSet& set, const TnCertificate& cert, double tol);

enum class IndexClass { AllPositive, AllNegative, Mixed, Degenerate };

/// Per-index classification of the determinant sets
/// { det(X_j^Z - X_i^Z) : j != i } for a fixed two-row minor selector Z.
///
/// Degenerate determinants (|det| <= rel_tol * max |det| over the table) are
/// rank-one connections in the projection; they invalidate the hypothesis of
/// the sign-change condition for that index, so the index is marked
/// Degenerate instead of receiving a verdict. An index classified
/// AllPositive or AllNegative rules out every ordering of the set as a T_N
/// configuration; the condition is order-independent.
struct SignChangeReport {
    linalg::MinorSelector selector;
    std::vector<std::vector<double>> dets;      // per index i: values for j != i, in j order
    std::vector<std::vector<bool>> degenerate;  // parallel to dets
    std::vector<IndexClass> classes;
    double scale = 0.0;
    double tol_abs = 0.0;
    bool ruled_out = false;   // some index has constant sign and no degenerate entries
    bool degenerate_any = false;
};

/// Throws input_error when the set has fewer than 4 points.
SignChangeReport sign_change_filter(const MatrixSet& set, const linalg::MinorSelector& z,
                                    double rel_tol = 1e-12);

/// Necessary-condition filter on the parameter vectors of a lifted
/// configuration: true iff [u; v] or [u; a] has numeric rank 2. A false
/// return means no ordering of the configuration can form a T_N
/// configuration. Requires N >= 6 and equal lengths.
bool independence_filter(const std::vector<double>& u, const std::vector<double>& v,
                         const std::vector<double>& a, double rel_tol = 1e-8);

struct SearchOptions {
    std::uint64_t seed = 0;
    bool exhaustive = true;   // enumerate all (N-1)! orderings with the first point fixed
    int max_orderings = 1000; // sample count in randomized mode
    int kappa_candidates = 3; // preset multiplier vectors tried per ordering
    int polish_multistarts = 1; // extra random multiplier starts per ordering
    double accept_tol = 1e-10;
};

struct SearchResult {
    std::vector<int> ordering; // indices into the input set
    TnCertificate certificate;
};

/// Best-effort certificate search over orderings of the set.
///
/// The first input point is fixed as the start of every ordering (cyclic
/// rotations of a valid ordering are themselves valid, so this loses no
/// generality). Per ordering: for a handful of multiplier vectors, solve the
/// linear system the telescoping relations plus the zero-sum constraint
/// impose on (base, increments), project each increment to its best rank-one
/// approximation, polish all unknowns by damped least-squares residual
/// minimization, and accept only candidates passing verify_certificate at
/// accept_tol.
///
/// An empty result is NOT a proof that no ordering works; it only reports
/// that the search found none. When several orderings admit certificates the
/// lexicographically smallest ordering is returned, independent of
/// evaluation order.
///
/// Throws input_error for N < 4, and for N > 8 in exhaustive mode (use the
/// randomized mode for larger sets).
std::optional<SearchResult> search_certificate(const MatrixSet& set, const SearchOptions& opts = {});

} // namespace tnlab::tn
