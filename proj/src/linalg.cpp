#include "tnlab/linalg.hpp"

#include "tnlab/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace tnlab::linalg {

MinorSelector MinorSelector::rows(int a, int b) {
    if (a == b) throw input_error("MinorSelector: row indices must be distinct");
    if (a > b) std::swap(a, b);
    if (a < 0 || b > 2) throw input_error("MinorSelector: row indices must lie in {0,1,2}");
    return MinorSelector{a, b};
}

std::string MinorSelector::label() const {
    return std::to_string(first + 1) + std::to_string(second + 1);
}

double max_abs(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd equilibrate_columns(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        double scale = out.col(j).cwiseAbs().maxCoeff();
        if (scale > 0.0) out.col(j) /= scale;
    }
    return out;
}

RankReport numeric_rank(const Eigen::MatrixXd& m, double rel_tol) {
    if (!(rel_tol > 0.0)) throw input_error("numeric_rank: rel_tol must be positive");
    if (!m.allFinite()) throw input_error("numeric_rank: matrix has non-finite entries");

    const Eigen::MatrixXd eq = equilibrate_columns(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq);

    RankReport report;
    report.singular_values.assign(svd.singularValues().data(),
                                  svd.singularValues().data() + svd.singularValues().size());
    const double sigma_max = report.singular_values.empty() ? 0.0 : report.singular_values.front();
    report.tolerance_used = rel_tol * sigma_max;
    report.rank = static_cast<int>(std::count_if(
        report.singular_values.begin(), report.singular_values.end(),
        [&](double s) { return s > report.tolerance_used; }));
    return report;
}

double minor_det(const Mat32& m, const MinorSelector& z) {
    return m(z.first, 0) * m(z.second, 1) - m(z.first, 1) * m(z.second, 0);
}

bool is_rank_one(const Mat32& m, double rel_tol) {
    return numeric_rank(m, rel_tol).rank == 1;
}

} // namespace tnlab::linalg
