// tnlab: reproducible experiments on T_N configurations in the entropy set
// of the p-system.
//
// Subcommands:
//   solve-system   solve the two-unknown coupling system for a model
//   check-ka       rank condition, coefficient fits and sign table for a
//                  point configuration
//   tn verify      check a certificate against a matrix set
//   tn filter      order-independent sign-change necessary condition
//   tn search      best-effort certificate search over orderings
//   appendix       one-shot end-to-end run of the built-in example model
//
// Exit codes: 0 success, 2 input error, 3 internal-consistency or model error.

#include "tnlab/config.hpp"
#include "tnlab/entropy_system.hpp"
#include "tnlab/errors.hpp"
#include "tnlab/json_io.hpp"
#include "tnlab/ka.hpp"
#include "tnlab/linalg.hpp"
#include "tnlab/planar.hpp"
#include "tnlab/scalar_model.hpp"
#include "tnlab/tn.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace tnlab;
using io::json;

constexpr const char* kVersion = "0.1.0";

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Effective configuration: file values overridden by explicit flags.

struct ModelArgs {
    std::string kind; // exp | appendix | table
    double k = 1e8;
    bool k_set = false;
};

std::shared_ptr<const ScalarModel> build_model(const ConfigFile& config, const ModelArgs& args,
                                               ConfigFile& effective) {
    std::string kind = args.kind;
    if (kind.empty()) kind = config.get("model", "kind").value_or("");
    if (kind.empty()) throw input_error("no model selected (use --model or [model] kind)");

    effective.set("model", "kind", kind);
    if (kind == "exp") return make_exp_model();
    if (kind == "appendix") {
        double k = args.k;
        if (!args.k_set) {
            if (auto from_file = config.get("model", "k")) k = parse_double(*from_file, "model k");
        }
        std::ostringstream repr;
        repr.precision(17);
        repr << k;
        effective.set("model", "k", repr.str());
        return make_exp_cubic_model(k);
    }
    if (kind == "table") {
        std::vector<double> t, a;
        for (const auto& line : config.get_all("model", "sample")) {
            std::istringstream in(line);
            double tv, av;
            if (!(in >> tv >> av)) throw input_error("[model] sample lines need two numbers");
            t.push_back(tv);
            a.push_back(av);
        }
        std::ostringstream repr;
        repr.precision(17);
        for (std::size_t i = 0; i < t.size(); ++i) repr << t[i] << ':' << a[i] << ';';
        effective.set("model", "samples", repr.str());
        return make_table_model(t, a);
    }
    throw input_error("unknown model kind '" + kind + "' (expected exp, appendix or table)");
}

std::vector<entropy::Interval> parse_brackets(const std::string& text) {
    std::vector<entropy::Interval> out;
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        const auto colon = piece.find(':');
        if (colon == std::string::npos) {
            throw input_error("bracket '" + piece + "' must look like lo:hi");
        }
        out.push_back({parse_double(piece.substr(0, colon), "bracket lo"),
                       parse_double(piece.substr(colon + 1), "bracket hi")});
    }
    if (out.empty()) throw input_error("empty bracket list");
    return out;
}

// ---------------------------------------------------------------------------
// Report envelope. Only "results" is required to be byte-stable, so timing
// lives outside it.

int emit_report(const std::string& command, const ConfigFile& effective, std::uint64_t seed,
                json results, double elapsed_ms, const std::string& out_path) {
    json report;
    report["command"] = command;
    std::ostringstream hash;
    hash << "0x" << std::hex << fnv1a64(effective.canonical());
    report["config_hash"] = hash.str();
    report["seed"] = seed;
    report["tool_version"] = kVersion;
    report["timing_ms"] = elapsed_ms;
    report["results"] = std::move(results);

    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        io::write_text_file(out_path, text);
    }
    return 0;
}

class Stopwatch {
  public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(clock::now() - start_).count();
    }

  private:
    using clock = std::chrono::steady_clock;
    clock::time_point start_ = clock::now();
};

// ---------------------------------------------------------------------------
// solve-system

struct SolveArgs {
    ModelArgs model;
    double lambda1 = 0.0, lambda2 = 0.0;
    bool l1_set = false, l2_set = false;
    std::string brackets_text;
    int grid = 100000;
    bool grid_set = false;
    std::string pq_csv;
    int pq_samples = 512;
};

entropy::SystemSpec build_spec(const ConfigFile& config, const SolveArgs& args,
                               ConfigFile& effective) {
    auto model = build_model(config, args.model, effective);
    double l1 = args.lambda1, l2 = args.lambda2;
    if (!args.l1_set) {
        auto v = config.get("system", "lambda1");
        if (!v) throw input_error("lambda1 missing (use --l1 or [system] lambda1)");
        l1 = parse_double(*v, "lambda1");
    }
    if (!args.l2_set) {
        auto v = config.get("system", "lambda2");
        if (!v) throw input_error("lambda2 missing (use --l2 or [system] lambda2)");
        l2 = parse_double(*v, "lambda2");
    }
    std::ostringstream l1_repr, l2_repr;
    l1_repr.precision(17);
    l2_repr.precision(17);
    l1_repr << l1;
    l2_repr << l2;
    effective.set("system", "lambda1", l1_repr.str());
    effective.set("system", "lambda2", l2_repr.str());
    return entropy::SystemSpec(model, l1, l2);
}

std::vector<entropy::Interval> resolve_brackets(const ConfigFile& config, const SolveArgs& args,
                                                const entropy::SystemSpec& spec,
                                                ConfigFile& effective) {
    std::string text = args.brackets_text;
    if (text.empty()) text = config.get("solve", "brackets").value_or("");
    std::vector<entropy::Interval> brackets;
    if (text.empty()) {
        brackets = entropy::default_brackets(spec);
        std::ostringstream repr;
        repr.precision(17);
        for (const auto& b : brackets) repr << b.lo << ':' << b.hi << ',';
        effective.set("solve", "brackets", repr.str());
    } else {
        brackets = parse_brackets(text);
        effective.set("solve", "brackets", text);
    }
    return brackets;
}

void emit_pq_csv(const entropy::SystemSpec& spec, const std::vector<entropy::Interval>& brackets,
                 const std::string& path, int samples_per_bracket) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot open CSV output: " + path);
    out << "v,p,q\n";
    char line[128];
    for (const auto& bracket : brackets) {
        for (int i = 0; i <= samples_per_bracket; ++i) {
            const double v =
                bracket.lo + (bracket.hi - bracket.lo) * i / static_cast<double>(samples_per_bracket);
            try {
                auto [p, q] = entropy::pq_values(spec, v);
                std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", v, p, q);
                out << line;
            } catch (const input_error&) {
                // singular level; skip the sample
            }
        }
    }
}

json solve_results(const entropy::SystemSpec& spec, const std::vector<entropy::Interval>& brackets,
                   int grid) {
    json results;
    results["model"] = spec.model->kind();
    results["lambda1"] = spec.lambda1;
    results["lambda2"] = spec.lambda2;
    entropy::SolutionSet sols;
    if (spec.degenerate()) {
        sols = entropy::solve_degenerate(spec);
        results["route"] = "degenerate";
    } else {
        sols = entropy::solve(spec, brackets, grid);
        results["route"] = "reduced-scan";
        results["qualitative"] = io::qualitative_to_json(entropy::qualitative_check(spec, sols));
    }
    results["solution_set"] = io::solution_set_to_json(sols);
    return results;
}

int run_solve_system(const CommonArgs& common, const SolveArgs& args) {
    Stopwatch watch;
    ConfigFile config;
    if (!common.config_path.empty()) config = ConfigFile::parse_file(common.config_path);
    ConfigFile effective = config;

    auto spec = build_spec(config, args, effective);
    std::vector<entropy::Interval> brackets;
    int grid = args.grid;
    if (!args.grid_set) {
        if (auto v = config.get("solve", "grid")) {
            grid = static_cast<int>(parse_double(*v, "grid"));
        }
    }
    effective.set("solve", "grid", std::to_string(grid));
    if (!spec.degenerate()) brackets = resolve_brackets(config, args, spec, effective);

    json results = solve_results(spec, brackets, grid);
    if (!args.pq_csv.empty() && !spec.degenerate()) {
        emit_pq_csv(spec, brackets, args.pq_csv, args.pq_samples);
    }
    return emit_report("solve-system", effective, common.seed, std::move(results), watch.ms(),
                       common.out_path);
}

// ---------------------------------------------------------------------------
// check-ka

struct CheckKaArgs {
    ModelArgs model;
    bool from_solver = false;
    double rel_tol = linalg::kDefaultRankTol;
    std::string report_md;
};

json check_ka_results(const ka::KaConfig& config, double rel_tol, const Mat32& q_matrix,
                      bool& tn_analysis_possible) {
    json results;
    const int n = config.size();
    results["points"] = json::array();
    for (auto [u, v] : config.points) results["points"].push_back({u, v});

    const Eigen::MatrixXd diff = ka::build_A(config) - ka::build_Pi(q_matrix, n);
    auto rank_report = linalg::numeric_rank(diff, rel_tol);
    results["rank"] = io::rank_report_to_json(rank_report);
    results["rank_condition_met"] = rank_report.rank == 2;
    // Rank one is impossible for distinct lifted points; flag it loudly.
    results["rank_one_inconsistency"] = rank_report.rank == 1 && n >= 3;

    tn_analysis_possible = n >= 4;
    if (!tn_analysis_possible) {
        results["note"] = "configuration has fewer than 4 points; no T_N analysis";
        return results;
    }

    json pivots = json::array();
    for (int i = 0; i < n; ++i) {
        json entry;
        entry["pivot"] = i;
        try {
            const auto t = ka::translate(config, i);
            const auto pair = ka::fit_lambdas(t);
            entry["lambda1"] = pair.lambda1;
            entry["lambda2"] = pair.lambda2;
            entry["residual"] = pair.residual;
            entry["identity_residual"] = t.identity_residual;
        } catch (const input_error& e) {
            entry["error"] = e.what();
        }
        pivots.push_back(std::move(entry));
    }
    results["pivots"] = std::move(pivots);

    const auto table = ka::sign_table(config);
    results["sign_table"] = io::sign_table_to_json(table);

    if (n >= 6) {
        std::vector<double> u, v, a;
        for (auto [pu, pv] : config.points) {
            u.push_back(pu);
            v.push_back(pv);
            a.push_back(config.model->a(pv));
        }
        results["independence_filter"] = tn::independence_filter(u, v, a);
    }

    results["verdict"] = table.ruled_out() ? "no-tn-ordering" : "inconclusive";
    return results;
}

int run_check_ka(const CommonArgs& common, const CheckKaArgs& args, const SolveArgs& solve_args) {
    Stopwatch watch;
    ConfigFile config;
    if (!common.config_path.empty()) config = ConfigFile::parse_file(common.config_path);
    ConfigFile effective = config;

    auto model = build_model(config, args.model, effective);

    std::vector<std::pair<double, double>> points;
    const bool from_solver =
        args.from_solver || config.get("ka", "from-solver").value_or("") == "true";
    if (from_solver) {
        auto spec = build_spec(config, solve_args, effective);
        int grid = solve_args.grid;
        if (!solve_args.grid_set) {
            if (auto v = config.get("solve", "grid")) grid = static_cast<int>(parse_double(*v, "grid"));
        }
        json solver_side = solve_results(
            spec, spec.degenerate() ? std::vector<entropy::Interval>{} :
                                      resolve_brackets(config, solve_args, spec, effective),
            grid);
        for (const auto& item : solver_side["solution_set"]["solutions"]) {
            points.emplace_back(item["s"].get<double>(), item["t"].get<double>());
        }
    } else {
        for (const auto& line : config.get_all("points", "point")) {
            std::istringstream in(line);
            double u, v;
            if (!(in >> u >> v)) throw input_error("[points] point lines need two numbers");
            points.emplace_back(u, v);
        }
    }
    if (points.empty()) throw input_error("no points given ([points] section or --from-solver)");

    // Collapse duplicates with a warning instead of failing.
    std::vector<std::pair<double, double>> unique;
    int dropped = 0;
    for (auto [u, v] : points) {
        bool dup = false;
        for (auto [u2, v2] : unique) {
            if (std::abs(u - u2) <= 1e-12 && std::abs(v - v2) <= 1e-12) dup = true;
        }
        if (dup) {
            ++dropped;
        } else {
            unique.emplace_back(u, v);
        }
    }
    if (dropped > 0) {
        std::cerr << "warning: collapsed " << dropped << " duplicate point(s)\n";
    }

    Mat32 q_matrix = Mat32::Zero();
    if (auto q_text = config.get("ka", "Q")) {
        std::istringstream in(*q_text);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 2; ++c)
                if (!(in >> q_matrix(r, c))) throw input_error("[ka] Q needs six numbers");
    }

    auto ka_config = ka::make_config(model, unique);
    bool tn_analysis_possible = false;
    json results = check_ka_results(ka_config, args.rel_tol, q_matrix, tn_analysis_possible);
    if (!args.report_md.empty() && tn_analysis_possible) {
        io::write_text_file(args.report_md,
                            io::sign_table_markdown(ka::sign_table(ka_config)));
    }
    emit_report("check-ka", effective, common.seed, std::move(results), watch.ms(),
                common.out_path);
    return tn_analysis_possible ? 0 : 2;
}

// ---------------------------------------------------------------------------
// tn verify | filter | search

int run_tn_verify(const CommonArgs& common, const std::string& input_path,
                  const std::string& cert_path, double tol) {
    Stopwatch watch;
    auto set = io::matrix_set_from_json(io::load_json_file(input_path));
    auto cert = io::certificate_from_json(io::load_json_file(cert_path));
    auto check = tn::check_certificate(set, cert, tol);

    ConfigFile effective;
    effective.set("tn", "input", input_path);
    effective.set("tn", "certificate", cert_path);

    json results;
    results["action"] = "verify";
    results["ok"] = check.ok();
    results["telescoping_ok"] = check.telescoping_ok;
    results["max_telescoping_residual"] = check.max_telescoping_residual;
    results["sum_ok"] = check.sum_ok;
    results["sum_residual"] = check.sum_residual;
    results["increments_rank_one"] = check.increments_rank_one;
    results["multipliers_ok"] = check.multipliers_ok;
    results["no_rank_one_connections"] = check.no_rank_one_connections;
    return emit_report("tn-verify", effective, common.seed, std::move(results), watch.ms(),
                       common.out_path);
}

int run_tn_filter(const CommonArgs& common, const std::string& input_path, const std::string& z) {
    Stopwatch watch;
    auto set = io::matrix_set_from_json(io::load_json_file(input_path));
    if (z.size() != 2) throw input_error("--Z must be two row digits, e.g. 12");
    const auto selector = linalg::MinorSelector::rows(z[0] - '1', z[1] - '1');
    auto report = tn::sign_change_filter(set, selector);

    ConfigFile effective;
    effective.set("tn", "input", input_path);
    effective.set("tn", "Z", z);

    json results;
    results["action"] = "filter";
    results["report"] = io::sign_change_report_to_json(report);
    results["verdict"] = report.ruled_out ? "no-tn-ordering" : "inconclusive";
    return emit_report("tn-filter", effective, common.seed, std::move(results), watch.ms(),
                       common.out_path);
}

int run_tn_search(const CommonArgs& common, const std::string& input_path,
                  const tn::SearchOptions& opts) {
    Stopwatch watch;
    auto set = io::matrix_set_from_json(io::load_json_file(input_path));
    auto result = tn::search_certificate(set, opts);

    ConfigFile effective;
    effective.set("tn", "input", input_path);
    effective.set("tn", "exhaustive", opts.exhaustive ? "true" : "false");
    effective.set("tn", "max-orderings", std::to_string(opts.max_orderings));

    json results;
    results["action"] = "search";
    results["found"] = result.has_value();
    if (result) {
        results["ordering"] = result->ordering;
        results["certificate"] = io::certificate_to_json(result->certificate);
    } else {
        results["note"] = "no certificate found; not a proof of nonexistence";
    }
    return emit_report("tn-search", effective, common.seed, std::move(results), watch.ms(),
                       common.out_path);
}

// ---------------------------------------------------------------------------
// appendix: one-shot reproduction of the built-in example

int run_appendix(const CommonArgs& common, double k, const std::string& pq_csv,
                 const std::string& report_md, bool skip_search) {
    Stopwatch watch;
    ConfigFile effective;
    effective.set("model", "kind", "appendix");
    {
        std::ostringstream repr;
        repr.precision(17);
        repr << k;
        effective.set("model", "k", repr.str());
    }
    effective.set("system", "lambda1", "-0.5");
    effective.set("system", "lambda2", "0.1");

    auto model = make_exp_cubic_model(k);
    entropy::SystemSpec spec(model, -0.5, 0.1);
    const auto brackets = entropy::default_brackets(spec, -40.0, 1.0);

    json results;
    results["model_check"] = [&] {
        auto check = spot_check_model(*model, -3.0, 1.0, 256, 7);
        json j;
        j["increasing_ok"] = check.increasing_ok;
        j["convex_ok"] = check.convex_ok;
        j["normalized"] = check.normalized;
        return j;
    }();

    // Solve the coupling system over the three default brackets.
    auto sols = entropy::solve(spec, brackets);
    results["solution_set"] = io::solution_set_to_json(sols);
    results["qualitative"] = io::qualitative_to_json(entropy::qualitative_check(spec, sols));

    const double split = std::log(0.5);
    int low = 0, mid = 0, high = 0, tight = 0, upper = 0;
    bool trivial_found = false;
    for (const auto& s : sols.solutions) {
        if (s.t < split) ++low;
        if (s.t > split && s.t <= 0.0) ++mid;
        if (s.t > 0.0) ++high;
        if (s.t > 0.0 && s.t < 0.003) ++tight;
        if (s.t >= 0.003) ++upper;
        trivial_found |= s.trivial;
    }
    json structure;
    structure["total"] = sols.solutions.size();
    structure["below_split"] = low;
    structure["split_to_zero"] = mid;
    structure["above_zero"] = high;
    structure["in_sharp_window"] = tight;
    structure["above_sharp_window"] = upper;
    structure["includes_trivial"] = trivial_found;
    structure["structure_ok"] = sols.solutions.size() >= 6 && low >= 2 && mid >= 2 && high >= 2 &&
                                tight >= 1 && upper >= 1 && trivial_found;
    results["structure"] = std::move(structure);

    // Spot inequality checks on p and q.
    json pq_checks;
    auto record_pq = [&](const std::string& name, double v) {
        auto [p, q] = entropy::pq_values(spec, v);
        json j;
        j["v"] = v;
        j["p"] = p;
        j["q"] = q;
        pq_checks[name] = j;
        return std::pair{p, q};
    };
    {
        auto [p, q] = record_pq("at_minus_1", -1.0);
        pq_checks["at_minus_1"]["p_below_q"] = p < q;
    }
    {
        auto [p, q] = record_pq("at_minus_0.3", -0.3);
        pq_checks["at_minus_0.3"]["p_below_q"] = p < q;
    }
    {
        auto [p, q] = record_pq("at_0.003", 0.003);
        pq_checks["at_0.003"]["p_below_q"] = p < q;
    }
    {
        auto [p, q] = record_pq("at_0", 0.0);
        pq_checks["at_0"]["p_equals_q"] = std::abs(p - q) <= 1e-12;
    }
    {
        auto [p, q] = record_pq("at_minus_40", -40.0);
        (void)p;
        pq_checks["at_minus_40"]["q_near_limit"] = std::abs(q - (-0.005)) <= 1e-6;
    }
    results["pq_checks"] = std::move(pq_checks);

    // Lift the solutions and run the configuration analysis.
    std::vector<std::pair<double, double>> points;
    for (const auto& s : sols.solutions) points.emplace_back(s.s, s.t);
    auto config = ka::make_config(model, points);
    bool tn_possible = false;
    results["ka"] = check_ka_results(config, linalg::kDefaultRankTol, Mat32::Zero(), tn_possible);

    // Span dimensions per pivot (2 or 3 in the rank-two regime).
    {
        std::vector<Mat32> lifted;
        for (auto [u, v] : config.points) lifted.push_back(ka::lift(*model, u, v));
        auto set = tn::make_matrix_set(lifted);
        json dims = json::array();
        for (int i = 0; i < set.size(); ++i) dims.push_back(planar::span_dimension(set, i));
        results["span_dimensions"] = std::move(dims);

        if (!skip_search) {
            tn::SearchOptions opts;
            opts.seed = common.seed;
            auto found = tn::search_certificate(set, opts);
            json search;
            search["exhaustive"] = true;
            search["found"] = found.has_value();
            if (found) {
                search["ordering"] = found->ordering;
                search["certificate"] = io::certificate_to_json(found->certificate);
            }
            results["search"] = std::move(search);
        }
    }

    const bool ruled_out = results["ka"]["verdict"] == "no-tn-ordering";
    const bool search_clean = skip_search || !results["search"]["found"].get<bool>();
    results["verdict"] = (ruled_out && search_clean) ? "no-tn-ordering" : "inconclusive";
    results["checks_agree"] = ruled_out == search_clean;

    if (!pq_csv.empty()) emit_pq_csv(spec, brackets, pq_csv, 512);
    if (!report_md.empty()) {
        io::write_text_file(report_md, io::sign_table_markdown(ka::sign_table(config)));
    }
    return emit_report("appendix", effective, common.seed, std::move(results), watch.ms(),
                       common.out_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tnlab: numerical analysis of T_N configurations in the entropy set "
                 "of the p-system"};
    app.require_subcommand(1);

    CommonArgs common;
    SolveArgs solve_args;
    CheckKaArgs ka_args;

    // --- solve-system ---
    auto* solve_cmd = app.add_subcommand("solve-system", "solve the coupling system");
    solve_cmd->add_option("--config", common.config_path, "config file (key-value text)");
    solve_cmd->add_option("--model", solve_args.model.kind, "model kind: exp | appendix | table");
    solve_cmd->add_option("--k", solve_args.model.k, "stiffness parameter for the appendix model")
        ->each([&](const std::string&) { solve_args.model.k_set = true; });
    solve_cmd->add_option("--l1", solve_args.lambda1, "lambda1")
        ->each([&](const std::string&) { solve_args.l1_set = true; });
    solve_cmd->add_option("--l2", solve_args.lambda2, "lambda2")
        ->each([&](const std::string&) { solve_args.l2_set = true; });
    solve_cmd->add_option("--brackets", solve_args.brackets_text,
                          "comma list of lo:hi search intervals");
    solve_cmd->add_option("--grid", solve_args.grid, "scan points per bracket")
        ->each([&](const std::string&) { solve_args.grid_set = true; });
    solve_cmd->add_option("--emit-pq", solve_args.pq_csv, "write (v, p, q) samples as CSV");
    solve_cmd->add_option("--pq-samples", solve_args.pq_samples, "CSV samples per bracket");
    solve_cmd->add_option("--out", common.out_path, "write the JSON report here");
    solve_cmd->add_option("--seed", common.seed, "report seed (echoed; solver is deterministic)");

    // --- check-ka ---
    auto* ka_cmd = app.add_subcommand("check-ka", "analyze a point configuration");
    ka_cmd->add_option("--config", common.config_path, "config file (key-value text)")->required();
    ka_cmd->add_flag("--from-solver", ka_args.from_solver,
                     "take points from solving the configured system");
    ka_cmd->add_option("--model", solve_args.model.kind, "model kind override");
    ka_cmd->add_option("--k", solve_args.model.k, "appendix-model stiffness override")
        ->each([&](const std::string&) { solve_args.model.k_set = true; });
    ka_cmd->add_option("--rel-tol", ka_args.rel_tol, "rank tolerance");
    ka_cmd->add_option("--report-md", ka_args.report_md, "write the sign table as markdown");
    ka_cmd->add_option("--out", common.out_path, "write the JSON report here");
    ka_cmd->add_option("--seed", common.seed, "report seed");

    // --- tn ---
    auto* tn_cmd = app.add_subcommand("tn", "certificate operations on matrix sets");
    tn_cmd->require_subcommand(1);
    std::string tn_input, tn_cert, tn_z = "12";
    double tn_tol = 1e-10;
    tn::SearchOptions search_opts;

    auto* verify_cmd = tn_cmd->add_subcommand("verify", "check a certificate");
    verify_cmd->add_option("--input", tn_input, "matrix set JSON")->required();
    verify_cmd->add_option("--certificate", tn_cert, "certificate JSON")->required();
    verify_cmd->add_option("--tol", tn_tol, "residual tolerance");
    verify_cmd->add_option("--out", common.out_path, "write the JSON report here");

    auto* filter_cmd = tn_cmd->add_subcommand("filter", "sign-change necessary condition");
    filter_cmd->add_option("--input", tn_input, "matrix set JSON")->required();
    filter_cmd->add_option("--Z", tn_z, "two projected rows, e.g. 12, 13, 23");
    filter_cmd->add_option("--out", common.out_path, "write the JSON report here");

    auto* search_cmd = tn_cmd->add_subcommand("search", "best-effort certificate search");
    search_cmd->add_option("--input", tn_input, "matrix set JSON")->required();
    search_cmd->add_option("--seed", search_opts.seed, "randomized-mode seed");
    bool exhaustive_flag = false;
    search_cmd->add_flag("--exhaustive", exhaustive_flag,
                         "enumerate all orderings with the first point fixed");
    search_cmd->add_option("--max-orderings", search_opts.max_orderings,
                           "orderings to sample in randomized mode");
    search_cmd->add_option("--out", common.out_path, "write the JSON report here");

    // --- appendix ---
    auto* appendix_cmd =
        app.add_subcommand("appendix", "end-to-end run of the built-in example model");
    double appendix_k = 1e8;
    std::string appendix_pq, appendix_md;
    bool skip_search = false;
    appendix_cmd->add_option("--k", appendix_k, "stiffness parameter");
    appendix_cmd->add_option("--emit-pq", appendix_pq, "write (v, p, q) samples as CSV");
    appendix_cmd->add_option("--report-md", appendix_md, "write the sign table as markdown");
    appendix_cmd->add_flag("--skip-search", skip_search, "skip the exhaustive ordering search");
    appendix_cmd->add_option("--out", common.out_path, "write the JSON report here");
    appendix_cmd->add_option("--seed", common.seed, "search seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return run_solve_system(common, solve_args);
        if (ka_cmd->parsed()) return run_check_ka(common, ka_args, solve_args);
        if (tn_cmd->parsed()) {
            if (verify_cmd->parsed()) return run_tn_verify(common, tn_input, tn_cert, tn_tol);
            if (filter_cmd->parsed()) return run_tn_filter(common, tn_input, tn_z);
            if (search_cmd->parsed()) {
                search_opts.exhaustive = exhaustive_flag;
                return run_tn_search(common, tn_input, search_opts);
            }
        }
        if (appendix_cmd->parsed()) {
            return run_appendix(common, appendix_k, appendix_pq, appendix_md, skip_search);
        }
    } catch (const input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const internal_error& e) {
        std::cerr << "internal consistency error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
