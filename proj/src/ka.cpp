#include "tnlab/ka.hpp"

#include "tnlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tnlab::ka {

namespace {

// Identity defect relative to the size of the terms entering it; non-finite
// values count as infinitely bad.
double identity_defect(double actual, double expected, double term_scale) {
    if (!std::isfinite(actual) || !std::isfinite(expected)) {
        return std::numeric_limits<double>::infinity();
    }
    return std::abs(actual - expected) / (1.0 + term_scale);
}

} // namespace

KaConfig make_config(std::shared_ptr<const ScalarModel> model,
                     std::vector<std::pair<double, double>> points, double dedup_tol) {
    if (!model) throw input_error("make_config: null model");
    KaConfig config{std::move(model), std::move(points)};
    std::vector<Mat32> lifted;
    lifted.reserve(config.points.size());
    for (const auto& [u, v] : config.points) {
        if (!std::isfinite(u) || !std::isfinite(v)) {
            throw input_error("make_config: non-finite point parameters");
        }
        lifted.push_back(lift(*config.model, u, v));
    }
    for (std::size_t i = 0; i < lifted.size(); ++i) {
        for (std::size_t j = i + 1; j < lifted.size(); ++j) {
            if (linalg::max_abs(lifted[i] - lifted[j]) <= dedup_tol) {
                std::ostringstream msg;
                msg << "make_config: lifted points " << i << " and " << j << " coincide";
                throw input_error(msg.str());
            }
        }
    }
    return config;
}

Mat32 lift(const ScalarModel& model, double u, double v) {
    const double a_v = model.a(v);
    const double F_v = model.F(v);
    if (!std::isfinite(a_v) || !std::isfinite(F_v)) {
        throw model_error("lift: model evaluated to a non-finite value");
    }
    Mat32 m;
    m << u, v,
         a_v, u,
         u * a_v, 0.5 * u * u + F_v;
    return m;
}

Eigen::MatrixXd build_A(const KaConfig& config) {
    const int n = config.size();
    if (n < 1) throw input_error("build_A: empty configuration");
    Eigen::MatrixXd a_mat(3, 2 * n);
    for (int j = 0; j < n; ++j) {
        const Mat32 x = lift(*config.model, config.points[j].first, config.points[j].second);
        a_mat.col(j) = x.col(0);
        a_mat.col(n + j) = x.col(1);
    }
    return a_mat;
}

Eigen::MatrixXd build_Pi(const Mat32& q, int n) {
    if (n < 1) throw input_error("build_Pi: N must be positive");
    Eigen::MatrixXd pi(3, 2 * n);
    for (int j = 0; j < n; ++j) {
        pi.col(j) = q.col(0);
        pi.col(n + j) = q.col(1);
    }
    return pi;
}

TranslatedSet translate(const KaConfig& config, int pivot) {
    const int n = config.size();
    if (pivot < 0 || pivot >= n) throw input_error("translate: pivot index out of range");

    TranslatedSet t;
    t.config = config;
    t.pivot = pivot;
    t.h.resize(n);
    t.r.resize(n);
    t.a_of_r.resize(n);
    t.F_of_r.resize(n);
    t.matrices.resize(n);

    const auto [u_p, v_p] = config.points[pivot];
    const double a_p = config.model->a(v_p);
    const double F_p = config.model->F(v_p);

    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto [u_j, v_j] = config.points[j];
        const double a_j = config.model->a(v_j);
        const double F_j = config.model->F(v_j);

        t.h[j] = u_j - u_p;
        t.r[j] = v_j - v_p;
        t.a_of_r[j] = a_j - a_p;
        t.F_of_r[j] = F_j - F_p - a_p * t.r[j];

        Mat32& m = t.matrices[j];
        m << t.h[j], t.r[j],
             t.a_of_r[j], t.h[j],
             t.h[j] * t.a_of_r[j], 0.5 * t.h[j] * t.h[j] + t.F_of_r[j];

        // Product identities tying the translated third row to raw
        // third-row differences of the lifted points.
        const double row3_first = (u_j * a_j - u_p * a_p) - a_p * t.h[j] - u_p * t.a_of_r[j];
        const double row3_second =
            (0.5 * u_j * u_j + F_j - 0.5 * u_p * u_p - F_p) - a_p * t.r[j] - u_p * t.h[j];
        const double scale_first =
            std::max({std::abs(u_j * a_j), std::abs(u_p * a_p), std::abs(a_p * t.h[j]),
                      std::abs(u_p * t.a_of_r[j])});
        const double scale_second =
            std::max({std::abs(0.5 * u_j * u_j) + std::abs(F_j), std::abs(a_p * t.r[j]),
                      std::abs(u_p * t.h[j])});
        worst = std::max(worst, identity_defect(m(2, 0), row3_first, scale_first));
        worst = std::max(worst, identity_defect(m(2, 1), row3_second, scale_second));
    }
    t.identity_residual = worst;
    if (worst > 1e-10) {
        throw internal_error("translate: third-row product identities violated; "
                             "the scalar model is inconsistent");
    }
    return t;
}

Eigen::MatrixXd assemble_translated(const TranslatedSet& t) {
    const int n = static_cast<int>(t.matrices.size());
    Eigen::MatrixXd out(3, 2 * n);
    for (int j = 0; j < n; ++j) {
        out.col(j) = t.matrices[j].col(0);
        out.col(n + j) = t.matrices[j].col(1);
    }
    return out;
}

CoefficientPair fit_lambdas(const TranslatedSet& t) {
    const int n = static_cast<int>(t.h.size());
    Eigen::MatrixXd block1(2, n), block2(2, n);
    for (int j = 0; j < n; ++j) {
        block1(0, j) = t.h[j];
        block1(1, j) = t.a_of_r[j];
        block2(0, j) = t.r[j];
        block2(1, j) = t.h[j];
    }
    const bool block1_ok = linalg::numeric_rank(block1).rank == 2;
    const bool block2_ok = linalg::numeric_rank(block2).rank == 2;
    if (!block1_ok || !block2_ok) {
        std::ostringstream msg;
        msg << "fit_lambdas: rank-deficient system;";
        if (!block1_ok) msg << " offsets h and translated a-values are linearly dependent;";
        if (!block2_ok) msg << " offsets r and h are linearly dependent;";
        msg << " the configuration fails the independence filters";
        throw input_error(msg.str());
    }

    Eigen::MatrixXd design(2 * n, 2);
    Eigen::VectorXd target(2 * n);
    for (int j = 0; j < n; ++j) {
        design(j, 0) = t.h[j];
        design(j, 1) = t.a_of_r[j];
        target(j) = t.h[j] * t.a_of_r[j];
        design(n + j, 0) = t.r[j];
        design(n + j, 1) = t.h[j];
        target(n + j) = 0.5 * t.h[j] * t.h[j] + t.F_of_r[j];
    }
    const Eigen::Vector2d coeffs = design.colPivHouseholderQr().solve(target);

    CoefficientPair pair;
    pair.lambda1 = coeffs(0);
    pair.lambda2 = coeffs(1);
    const double scale = 1.0 + target.cwiseAbs().maxCoeff();
    pair.residual = (design * coeffs - target).cwiseAbs().maxCoeff() / scale;
    return pair;
}

SignTable sign_table(const KaConfig& config, double rel_tol) {
    const int n = config.size();
    if (n < 1) throw input_error("sign_table: empty configuration");

    SignTable table;
    table.order.resize(n);
    std::iota(table.order.begin(), table.order.end(), 0);
    std::stable_sort(table.order.begin(), table.order.end(), [&](int a, int b) {
        return config.points[a].second < config.points[b].second;
    });

    std::vector<double> a_values(n);
    for (int i = 0; i < n; ++i) a_values[i] = config.model->a(config.points[i].second);

    table.values = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto [u_i, v_i] = config.points[table.order[i]];
            const auto [u_j, v_j] = config.points[table.order[j]];
            const double h = u_j - u_i;
            const double r = v_j - v_i;
            const double da = a_values[table.order[j]] - a_values[table.order[i]];
            const double d = h * h - r * da;
            table.values(i, j) = d;
            table.values(j, i) = d;
        }
    }

    table.scale = table.values.cwiseAbs().maxCoeff();
    table.tol_abs = rel_tol * table.scale;
    table.signs.assign(n, std::vector<int>(n, 0));
    table.degenerate.assign(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i) {
        bool row_degenerate = false;
        int positives = 0, negatives = 0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = table.values(i, j);
            if (std::abs(d) <= table.tol_abs) {
                table.degenerate[i][j] = true;
                row_degenerate = true;
            } else {
                table.signs[i][j] = d > 0.0 ? 1 : -1;
                (d > 0.0 ? positives : negatives)++;
            }
        }
        if (!row_degenerate && n > 1 && (positives == 0 || negatives == 0)) {
            table.constant_sign_rows.push_back(table.order[i]);
        }
    }
    return table;
}

SignTable sign_table(const TranslatedSet& t, double rel_tol) {
    return sign_table(t.config, rel_tol);
}

} // namespace tnlab::ka
