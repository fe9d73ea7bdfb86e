#include "tnlab/tn.hpp"

#include "tnlab/errors.hpp"
#include "tnlab/parallel.hpp"
#include "tnlab/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

namespace tnlab::tn {

namespace {

// ---------------------------------------------------------------------------
// Certificate assembly helpers

Mat32 partial_point(const TnCertificate& cert, int i) {
    Mat32 x = cert.base;
    for (int m = 0; m < i; ++m) x += cert.increments[m];
    x += cert.multipliers[i] * cert.increments[i];
    return x;
}

// Candidate certificate parameterized with explicitly rank-one increments
// y_i x_i^T, which is the shape the polisher works in.
struct RankOneParams {
    Mat32 base;
    std::vector<Eigen::Vector3d> left;   // y_i
    std::vector<Eigen::Vector2d> right;  // x_i
    std::vector<double> kappa;

    TnCertificate to_certificate() const {
        TnCertificate cert;
        cert.base = base;
        cert.multipliers = kappa;
        cert.increments.resize(left.size());
        for (std::size_t i = 0; i < left.size(); ++i) {
            cert.increments[i] = left[i] * right[i].transpose();
        }
        return cert;
    }
};

int param_count(int n) { return 6 + 5 * n + n; }

void pack(const RankOneParams& p, Eigen::VectorXd& x) {
    const int n = static_cast<int>(p.left.size());
    x.resize(param_count(n));
    int at = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) x(at++) = p.base(r, c);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < 3; ++r) x(at++) = p.left[i](r);
        for (int c = 0; c < 2; ++c) x(at++) = p.right[i](c);
    }
    for (int i = 0; i < n; ++i) x(at++) = p.kappa[i];
}

RankOneParams unpack(const Eigen::VectorXd& x, int n) {
    RankOneParams p;
    int at = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) p.base(r, c) = x(at++);
    p.left.resize(n);
    p.right.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < 3; ++r) p.left[i](r) = x(at++);
        for (int c = 0; c < 2; ++c) p.right[i](c) = x(at++);
    }
    p.kappa.assign(x.data() + at, x.data() + at + n);
    return p;
}

// Residual vector of the certificate equations for the ordered points:
// telescoping blocks, the zero-sum block, and a one-sided multiplier barrier.
void certificate_residual(const std::vector<Mat32>& ordered, const Eigen::VectorXd& x,
                          Eigen::VectorXd& out) {
    const int n = static_cast<int>(ordered.size());
    const RankOneParams p = unpack(x, n);
    out.resize(6 * n + 6 + n);
    int at = 0;
    Mat32 acc = p.base;
    for (int i = 0; i < n; ++i) {
        const Mat32 c_i = p.left[i] * p.right[i].transpose();
        const Mat32 res = acc + p.kappa[i] * c_i - ordered[i];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) out(at++) = res(r, c);
        acc += c_i;
    }
    const Mat32 sum_res = acc - p.base; // sum of increments
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) out(at++) = sum_res(r, c);
    for (int i = 0; i < n; ++i) {
        out(at++) = std::max(0.0, (1.0 + kKappaMargin) - p.kappa[i]);
    }
}

// Damped least squares (Levenberg-Marquardt with a forward-difference
// Jacobian). Small problem sizes only.
void polish(const std::vector<Mat32>& ordered, Eigen::VectorXd& x, int max_iter) {
    Eigen::VectorXd r, r_trial, r_probe;
    certificate_residual(ordered, x, r);
    double cost = 0.5 * r.squaredNorm();
    double mu = 1e-3;

    const int np = static_cast<int>(x.size());
    Eigen::MatrixXd jac(r.size(), np);

    for (int iter = 0; iter < max_iter; ++iter) {
        for (int j = 0; j < np; ++j) {
            const double step = 1e-7 * (1.0 + std::abs(x(j)));
            Eigen::VectorXd x_probe = x;
            x_probe(j) += step;
            certificate_residual(ordered, x_probe, r_probe);
            jac.col(j) = (r_probe - r) / step;
        }
        const Eigen::MatrixXd h = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        if (g.cwiseAbs().maxCoeff() < 1e-15) return;

        bool stepped = false;
        for (int tries = 0; tries < 8; ++tries) {
            Eigen::MatrixXd damped = h;
            damped.diagonal() += mu * (h.diagonal().array() + 1e-12).matrix();
            const Eigen::VectorXd delta = damped.ldlt().solve(-g);
            const Eigen::VectorXd x_trial = x + delta;
            certificate_residual(ordered, x_trial, r_trial);
            const double trial_cost = 0.5 * r_trial.squaredNorm();
            if (trial_cost < cost) {
                x = x_trial;
                r = r_trial;
                const double gain = cost - trial_cost;
                cost = trial_cost;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                if (cost < 1e-28 || gain < 1e-18 * (1.0 + cost)) return;
                break;
            }
            mu *= 4.0;
        }
        if (!stepped) return;
    }
}

// Linear solve for (base, increments) given fixed multipliers: one
// (N+1) x (N+1) system shared by all six matrix entries.
bool solve_linear_stage(const std::vector<Mat32>& ordered, const std::vector<double>& kappa,
                        Mat32& base, std::vector<Mat32>& increments) {
    const int n = static_cast<int>(ordered.size());
    Eigen::MatrixXd k_mat = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        k_mat(i, 0) = 1.0;
        for (int m = 0; m < i; ++m) k_mat(i, 1 + m) = 1.0;
        k_mat(i, 1 + i) = kappa[i];
    }
    for (int m = 0; m < n; ++m) k_mat(n, 1 + m) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(k_mat);
    if (!lu.isInvertible()) return false;

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 1, 6);
    for (int i = 0; i < n; ++i) {
        int at = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) rhs(i, at++) = ordered[i](r, c);
    }
    const Eigen::MatrixXd sol = lu.solve(rhs);

    auto row_to_mat = [](const Eigen::MatrixXd& m, int row) {
        Mat32 out;
        int at = 0;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c) out(r, c) = m(row, at++);
        return out;
    };
    base = row_to_mat(sol, 0);
    increments.resize(n);
    for (int i = 0; i < n; ++i) increments[i] = row_to_mat(sol, 1 + i);
    return true;
}

RankOneParams project_rank_one(const Mat32& base, const std::vector<Mat32>& increments,
                               const std::vector<double>& kappa) {
    RankOneParams p;
    p.base = base;
    p.kappa = kappa;
    p.left.resize(increments.size());
    p.right.resize(increments.size());
    for (std::size_t i = 0; i < increments.size(); ++i) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(increments[i],
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        p.left[i] = svd.matrixU().col(0) * svd.singularValues()(0);
        p.right[i] = svd.matrixV().col(0);
    }
    return p;
}

double max_abs_residual(const std::vector<Mat32>& ordered, const Eigen::VectorXd& x) {
    Eigen::VectorXd r;
    certificate_residual(ordered, x, r);
    return r.cwiseAbs().maxCoeff();
}

// One search attempt for a fixed ordering. Returns a verified certificate or
// nothing.
std::optional<TnCertificate> attempt_ordering(const MatrixSet& set, const std::vector<int>& order,
                                              const SearchOptions& opts, std::uint64_t salt) {
    const int n = set.size();
    std::vector<Mat32> ordered(n);
    for (int i = 0; i < n; ++i) ordered[i] = set.points[order[i]];

    double scale = 0.0;
    for (const auto& m : ordered) scale = std::max(scale, linalg::max_abs(m));
    if (scale == 0.0) scale = 1.0;

    // Preset multiplier vectors, then seeded random ones.
    std::vector<std::vector<double>> kappa_candidates;
    const double presets[] = {2.0, 1.5, 3.0, 1.25, 4.0};
    for (int c = 0; c < std::min<int>(opts.kappa_candidates, 5); ++c) {
        kappa_candidates.emplace_back(n, presets[c]);
    }
    SplitMix64 rng(opts.seed ^ (0x5eedULL + salt));
    for (int c = 0; c < opts.polish_multistarts; ++c) {
        std::vector<double> kappa(n);
        for (auto& k : kappa) k = rng.uniform(1.1, 3.5);
        kappa_candidates.push_back(std::move(kappa));
    }

    Eigen::VectorXd best_x;
    double best_res = std::numeric_limits<double>::infinity();
    for (const auto& kappa : kappa_candidates) {
        Mat32 base;
        std::vector<Mat32> increments;
        if (!solve_linear_stage(ordered, kappa, base, increments)) continue;
        RankOneParams p = project_rank_one(base, increments, kappa);
        Eigen::VectorXd x;
        pack(p, x);
        const double res = max_abs_residual(ordered, x);
        if (res < best_res) {
            best_res = res;
            best_x = x;
        }
        // Projection residual already below tolerance: no polish needed.
        if (res <= opts.accept_tol) break;
    }
    if (!best_x.size()) return std::nullopt;

    if (best_res > opts.accept_tol && best_res < 0.5 * scale) {
        polish(ordered, best_x, 150);
        best_res = max_abs_residual(ordered, best_x);
    }
    if (best_res > opts.accept_tol) return std::nullopt;

    const TnCertificate cert = unpack(best_x, n).to_certificate();
    MatrixSet ordered_set;
    ordered_set.points = ordered;
    if (verify_certificate(ordered_set, cert, opts.accept_tol)) return cert;
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------

MatrixSet make_matrix_set(std::vector<Mat32> points, std::vector<std::string> labels,
                          double dedup_tol) {
    if (!labels.empty() && labels.size() != points.size()) {
        throw input_error("make_matrix_set: label count does not match point count");
    }
    for (const auto& m : points) {
        if (!m.allFinite()) throw input_error("make_matrix_set: non-finite matrix entries");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            if (linalg::max_abs(points[i] - points[j]) <= dedup_tol) {
                std::ostringstream msg;
                msg << "make_matrix_set: points " << i << " and " << j << " coincide";
                throw input_error(msg.str());
            }
        }
    }
    return MatrixSet{std::move(points), std::move(labels)};
}

CertificateCheck check_certificate(const MatrixSet& set, const TnCertificate& cert, double tol) {
    const int n = set.size();
    if (static_cast<int>(cert.increments.size()) != n ||
        static_cast<int>(cert.multipliers.size()) != n) {
        throw input_error("check_certificate: certificate size does not match the set");
    }

    CertificateCheck check;
    for (int i = 0; i < n; ++i) {
        check.max_telescoping_residual = std::max(
            check.max_telescoping_residual, linalg::max_abs(partial_point(cert, i) - set.points[i]));
    }
    check.telescoping_ok = check.max_telescoping_residual <= tol;

    Mat32 sum = Mat32::Zero();
    for (const auto& c : cert.increments) sum += c;
    check.sum_residual = linalg::max_abs(sum);
    check.sum_ok = check.sum_residual <= tol;

    check.increments_rank_one = true;
    for (const auto& c : cert.increments) {
        if (linalg::numeric_rank(c).rank != 1) {
            check.increments_rank_one = false;
            break;
        }
    }

    check.multipliers_ok = std::all_of(cert.multipliers.begin(), cert.multipliers.end(),
                                       [](double k) { return k >= 1.0 + kKappaMargin; });

    check.no_rank_one_connections = true;
    for (int i = 0; i < n && check.no_rank_one_connections; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (linalg::numeric_rank(set.points[i] - set.points[j]).rank != 2) {
                check.no_rank_one_connections = false;
                break;
            }
        }
    }
    return check;
}

bool verify_certificate(const MatrixSet& set, const TnCertificate& cert, double tol) {
    return check_certificate(set, cert, tol).ok();
}

SignChangeReport sign_change_filter(const MatrixSet& set, const linalg::MinorSelector& z,
                                    double rel_tol) {
    const int n = set.size();
    if (n < 4) throw input_error("sign_change_filter: need at least 4 points");

    SignChangeReport report;
    report.selector = z;
    report.dets.assign(n, {});
    report.degenerate.assign(n, {});
    report.classes.assign(n, IndexClass::Mixed);

    for (int i = 0; i < n; ++i) {
        report.dets[i].reserve(n - 1);
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            report.dets[i].push_back(linalg::minor_det(set.points[j] - set.points[i], z));
        }
    }
    for (const auto& row : report.dets) {
        for (double d : row) report.scale = std::max(report.scale, std::abs(d));
    }
    report.tol_abs = rel_tol * report.scale;

    for (int i = 0; i < n; ++i) {
        int positives = 0, negatives = 0;
        bool any_degenerate = false;
        report.degenerate[i].resize(report.dets[i].size());
        for (std::size_t k = 0; k < report.dets[i].size(); ++k) {
            const double d = report.dets[i][k];
            const bool deg = std::abs(d) <= report.tol_abs;
            report.degenerate[i][k] = deg;
            if (deg) {
                any_degenerate = true;
            } else {
                (d > 0.0 ? positives : negatives)++;
            }
        }
        if (any_degenerate) {
            report.classes[i] = IndexClass::Degenerate;
            report.degenerate_any = true;
        } else if (negatives == 0) {
            report.classes[i] = IndexClass::AllPositive;
        } else if (positives == 0) {
            report.classes[i] = IndexClass::AllNegative;
        } else {
            report.classes[i] = IndexClass::Mixed;
        }
    }
    report.ruled_out = std::any_of(report.classes.begin(), report.classes.end(), [](IndexClass c) {
        return c == IndexClass::AllPositive || c == IndexClass::AllNegative;
    });
    return report;
}

bool independence_filter(const std::vector<double>& u, const std::vector<double>& v,
                         const std::vector<double>& a, double rel_tol) {
    if (u.size() != v.size() || u.size() != a.size()) {
        throw input_error("independence_filter: vectors must have equal length");
    }
    if (u.size() < 6) throw input_error("independence_filter: need at least 6 points");
    const int n = static_cast<int>(u.size());
    Eigen::MatrixXd uv(2, n), ua(2, n);
    for (int j = 0; j < n; ++j) {
        uv(0, j) = u[j];
        uv(1, j) = v[j];
        ua(0, j) = u[j];
        ua(1, j) = a[j];
    }
    return linalg::numeric_rank(uv, rel_tol).rank == 2 ||
           linalg::numeric_rank(ua, rel_tol).rank == 2;
}

std::optional<SearchResult> search_certificate(const MatrixSet& set, const SearchOptions& opts) {
    const int n = set.size();
    if (n < 4) throw input_error("search_certificate: need at least 4 points");
    if (opts.exhaustive && n > 8) {
        throw input_error("search_certificate: exhaustive mode supports at most 8 points; "
                          "use randomized sampling");
    }

    // Build the ordering list up front so work can be distributed while the
    // winner stays the lexicographically smallest successful ordering.
    std::vector<std::vector<int>> orderings;
    if (opts.exhaustive) {
        std::vector<int> tail(n - 1);
        std::iota(tail.begin(), tail.end(), 1);
        do {
            std::vector<int> order{0};
            order.insert(order.end(), tail.begin(), tail.end());
            orderings.push_back(std::move(order));
        } while (std::next_permutation(tail.begin(), tail.end()));
    } else {
        SplitMix64 rng(opts.seed);
        const int count = std::max(1, opts.max_orderings);
        for (int c = 0; c < count; ++c) {
            std::vector<int> tail(n - 1);
            std::iota(tail.begin(), tail.end(), 1);
            for (int i = n - 2; i > 0; --i) {
                std::swap(tail[i], tail[rng.below(static_cast<std::uint64_t>(i + 1))]);
            }
            std::vector<int> order{0};
            order.insert(order.end(), tail.begin(), tail.end());
            orderings.push_back(std::move(order));
        }
        std::sort(orderings.begin(), orderings.end());
        orderings.erase(std::unique(orderings.begin(), orderings.end()), orderings.end());
    }

    std::mutex found_mutex;
    std::optional<SearchResult> best;
    parallel_for(orderings.size(), [&](std::size_t idx) {
        {
            // Skip work that cannot improve on an already-found ordering.
            std::lock_guard<std::mutex> lock(found_mutex);
            if (best && best->ordering <= orderings[idx]) return;
        }
        auto cert = attempt_ordering(set, orderings[idx], opts, static_cast<std::uint64_t>(idx));
        if (cert) {
            std::lock_guard<std::mutex> lock(found_mutex);
            if (!best || orderings[idx] < best->ordering) {
                best = SearchResult{orderings[idx], std::move(*cert)};
            }
        }
    });
    return best;
}

} // namespace tnlab::tn
