#include "tnlab/json_io.hpp"

#include "tnlab/errors.hpp"

#include <fstream>
#include <sstream>

namespace tnlab::io {

json mat_to_json(const Mat32& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1)});
    return rows;
}

Mat32 mat_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw input_error("matrix JSON: expected 3 rows");
    Mat32 m;
    for (int r = 0; r < 3; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != 2) {
            throw input_error("matrix JSON: each row needs 2 entries");
        }
        m(r, 0) = row[0].get<double>();
        m(r, 1) = row[1].get<double>();
    }
    return m;
}

json matrix_set_to_json(const tn::MatrixSet& set) {
    json out;
    json mats = json::array();
    for (const auto& m : set.points) mats.push_back(mat_to_json(m));
    out["matrices"] = std::move(mats);
    if (!set.labels.empty()) out["labels"] = set.labels;
    return out;
}

tn::MatrixSet matrix_set_from_json(const json& j) {
    if (!j.contains("matrices")) throw input_error("matrix set JSON: missing 'matrices'");
    std::vector<Mat32> points;
    for (const auto& m : j.at("matrices")) points.push_back(mat_from_json(m));
    std::vector<std::string> labels;
    if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
    return tn::make_matrix_set(std::move(points), std::move(labels));
}

json certificate_to_json(const tn::TnCertificate& cert) {
    json out;
    out["base"] = mat_to_json(cert.base);
    json incs = json::array();
    for (const auto& c : cert.increments) incs.push_back(mat_to_json(c));
    out["increments"] = std::move(incs);
    out["multipliers"] = cert.multipliers;
    return out;
}

tn::TnCertificate certificate_from_json(const json& j) {
    tn::TnCertificate cert;
    cert.base = mat_from_json(j.at("base"));
    for (const auto& m : j.at("increments")) cert.increments.push_back(mat_from_json(m));
    cert.multipliers = j.at("multipliers").get<std::vector<double>>();
    return cert;
}

json rank_report_to_json(const linalg::RankReport& report) {
    json out;
    out["rank"] = report.rank;
    out["singular_values"] = report.singular_values;
    out["tolerance_used"] = report.tolerance_used;
    return out;
}

json solution_set_to_json(const entropy::SolutionSet& sols) {
    json out;
    json list = json::array();
    for (const auto& s : sols.solutions) {
        json item;
        item["s"] = s.s;
        item["t"] = s.t;
        item["residual"] = s.residual;
        item["trivial"] = s.trivial;
        item["below_lambda1"] = s.below_lambda1;
        item["indicator"] = s.indicator;
        item["indicator_sign"] = s.indicator_sign;
        list.push_back(std::move(item));
    }
    out["solutions"] = std::move(list);
    out["count"] = sols.solutions.size();
    json brackets = json::array();
    for (const auto& b : sols.brackets) brackets.push_back({b.lo, b.hi});
    out["brackets"] = std::move(brackets);
    out["grid_used"] = sols.grid_used;
    return out;
}

json qualitative_to_json(const entropy::QualitativeReport& report) {
    json out;
    out["count_bound_ok"] = report.count_bound_ok;
    out["sign_rule_ok"] = report.sign_rule_ok;
    out["monotonicity_ok"] = report.monotonicity_ok;
    out["below_lambda1_count"] = report.below_lambda1_count;
    out["violations"] = report.violations;
    out["ok"] = report.ok();
    return out;
}

namespace {

const char* sign_symbol(int sign, bool degenerate, bool diagonal) {
    if (diagonal) return "0";
    if (degenerate) return "!";
    return sign > 0 ? "+" : (sign < 0 ? "-" : "0");
}

} // namespace

json sign_table_to_json(const ka::SignTable& table) {
    const int n = static_cast<int>(table.order.size());
    json out;
    out["order"] = table.order;
    json values = json::array();
    json signs = json::array();
    json degenerate = json::array();
    for (int i = 0; i < n; ++i) {
        json vrow = json::array();
        json srow = json::array();
        json drow = json::array();
        for (int j = 0; j < n; ++j) {
            vrow.push_back(table.values(i, j));
            srow.push_back(sign_symbol(table.signs[i][j], table.degenerate[i][j], i == j));
            drow.push_back(static_cast<bool>(table.degenerate[i][j]));
        }
        values.push_back(std::move(vrow));
        signs.push_back(std::move(srow));
        degenerate.push_back(std::move(drow));
    }
    out["values"] = std::move(values);
    out["signs"] = std::move(signs);
    out["degenerate"] = std::move(degenerate);
    out["constant_sign_rows"] = table.constant_sign_rows;
    out["scale"] = table.scale;
    out["tol_abs"] = table.tol_abs;
    out["ruled_out"] = table.ruled_out();
    return out;
}

json sign_change_report_to_json(const tn::SignChangeReport& report) {
    json out;
    out["selector"] = report.selector.label();
    out["dets"] = report.dets;
    json degenerate = json::array();
    for (const auto& row : report.degenerate) degenerate.push_back(row);
    out["degenerate"] = std::move(degenerate);
    json classes = json::array();
    for (auto c : report.classes) {
        switch (c) {
            case tn::IndexClass::AllPositive: classes.push_back("all-positive"); break;
            case tn::IndexClass::AllNegative: classes.push_back("all-negative"); break;
            case tn::IndexClass::Mixed: classes.push_back("mixed"); break;
            case tn::IndexClass::Degenerate: classes.push_back("degenerate"); break;
        }
    }
    out["classes"] = std::move(classes);
    out["scale"] = report.scale;
    out["tol_abs"] = report.tol_abs;
    out["ruled_out"] = report.ruled_out;
    out["degenerate_any"] = report.degenerate_any;
    return out;
}

json planar_coefficients_to_json(const planar::PlanarCoefficients& coeffs) {
    json out;
    out["variant"] = coeffs.variant == planar::Variant::Case1 ? "case1" : "case2";
    out["alpha"] = coeffs.alpha;
    out["beta"] = coeffs.beta;
    out["gamma"] = coeffs.gamma;
    out["fit_residual"] = coeffs.fit_residual;
    out["consistency_ok"] = coeffs.consistency_ok;
    out["consistency_residual"] = coeffs.consistency_residual;
    if (coeffs.lambda) {
        out["lambda"] = *coeffs.lambda;
    } else {
        out["lambda"] = nullptr;
    }
    out["lambda_residual"] = coeffs.lambda_residual;
    return out;
}

std::string sign_table_markdown(const ka::SignTable& table) {
    const int n = static_cast<int>(table.order.size());
    std::ostringstream out;
    out << "| D |";
    for (int j = 0; j < n; ++j) out << " j=" << table.order[j] + 1 << " |";
    out << "\n|---|";
    for (int j = 0; j < n; ++j) out << "---|";
    out << "\n";
    for (int i = 0; i < n; ++i) {
        out << "| i=" << table.order[i] + 1 << " |";
        for (int j = 0; j < n; ++j) {
            out << ' ' << sign_symbol(table.signs[i][j], table.degenerate[i][j], i == j) << " |";
        }
        out << "\n";
    }
    return out.str();
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open JSON file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw input_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open output file: " + path);
    out << content;
}

} // namespace tnlab::io
