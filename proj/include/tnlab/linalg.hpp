#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace tnlab {

/// The ambient matrix space: 3x2 real matrices.
using Mat32 = Eigen::Matrix<double, 3, 2>;

namespace linalg {

/// Default relative rank threshold. Applied to the largest singular value
/// after column equilibration; see numeric_rank.
inline constexpr double kDefaultRankTol = 1e-8;

/// A choice of two distinct rows of a 3x2 matrix, identifying a 2x2 minor.
struct MinorSelector {
    int first = 0;  // 0-based row indices, first < second
    int second = 1;

    /// Validating factory; accepts 0-based rows in any order.
    static MinorSelector rows(int a, int b);

    /// 1-based label for reports, e.g. "12", "13", "23".
    std::string label() const;
};

struct RankReport {
    int rank = 0;
    // Singular values of the column-equilibrated matrix, descending.
    std::vector<double> singular_values;
    // Absolute threshold actually used: rel_tol * sigma_max.
    double tolerance_used = 0.0;
};

/// Numeric rank of a small dense matrix.
///
/// Columns are first equilibrated (each divided by its max-abs entry; zero
/// columns left alone), which does not change the rank but keeps the
/// threshold meaningful when column scales differ by many orders of
/// magnitude. The rank is the number of singular values of the equilibrated
/// matrix exceeding rel_tol * sigma_max; a zero matrix has rank 0.
///
/// Throws input_error on non-finite entries or rel_tol <= 0.
RankReport numeric_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

/// Determinant of the 2x2 submatrix of m formed from the two rows in z.
double minor_det(const Mat32& m, const MinorSelector& z);

/// True iff numeric_rank(m, rel_tol) is exactly 1.
bool is_rank_one(const Mat32& m, double rel_tol = kDefaultRankTol);

/// Largest absolute entry (0 for empty matrices).
double max_abs(const Eigen::MatrixXd& m);

/// Column-equilibrated copy: each column divided by its max-abs entry.
Eigen::MatrixXd equilibrate_columns(const Eigen::MatrixXd& m);

} // namespace linalg
} // namespace tnlab
