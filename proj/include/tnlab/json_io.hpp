#pragma once

#include "tnlab/entropy_system.hpp"
#include "tnlab/ka.hpp"
#include "tnlab/linalg.hpp"
#include "tnlab/planar.hpp"
#include "tnlab/tn.hpp"

#include <json.hpp>

#include <string>

namespace tnlab::io {

using json = nlohmann::json;

// 3x2 matrices travel as three rows of two numbers: [[a,b],[c,d],[e,f]].
json mat_to_json(const Mat32& m);
Mat32 mat_from_json(const json& j);

// { "matrices": [...], "labels": [...]? }
json matrix_set_to_json(const tn::MatrixSet& set);
tn::MatrixSet matrix_set_from_json(const json& j);

// { "base": ..., "increments": [...], "multipliers": [...] }
json certificate_to_json(const tn::TnCertificate& cert);
tn::TnCertificate certificate_from_json(const json& j);

json rank_report_to_json(const linalg::RankReport& report);
json solution_set_to_json(const entropy::SolutionSet& sols);
json qualitative_to_json(const entropy::QualitativeReport& report);
json sign_table_to_json(const ka::SignTable& table);
json sign_change_report_to_json(const tn::SignChangeReport& report);
json planar_coefficients_to_json(const planar::PlanarCoefficients& coeffs);

/// Markdown rendering of a sign table: rows and columns in ascending-v
/// order labeled with original 1-based indices, entries +, -, 0 on the
/// diagonal, and ! for degenerate entries.
std::string sign_table_markdown(const ka::SignTable& table);

json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace tnlab::io
