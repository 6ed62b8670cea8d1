// Benchmark and validation front end for the two-frames-group filter library.
//
// Subcommands:
//   validate  - classify a configured system (commutation, frame naturalness,
//               group-affineness) and report residuals
//   bench     - Monte-Carlo filter comparison on the inertial scenario, CSV out
//   selftest  - run the numerical oracle suites
//
// Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tfg/filter.hpp"
#include "tfg/oracles.hpp"
#include "tfg/scenarios.hpp"

namespace fs = std::filesystem;
using namespace tfg;

namespace {

constexpr const char* kToolVersion = "1.0.0";

cli::ConfigMap load_or_empty(const std::string& path) {
    if (path.empty()) return {};
    return cli::load_config_file(path);
}

scenarios::ScenarioConfig resolve_config(const std::string& config_path, long long seed,
                                         int runs, const std::string& filters) {
    cli::ConfigMap map = load_or_empty(config_path);
    if (seed >= 0) map["seed"] = std::to_string(seed);
    if (runs > 0) map["runs"] = std::to_string(runs);
    if (!filters.empty()) map["filters"] = filters;
    return scenarios::ScenarioConfig::from_map(map);
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct CustomSystem {
    TwoFramesSystem system;
    bool claim_natural = false;
};

Mat parse_matrix(const cli::ConfigMap& map, const std::string& key, int rows, int cols) {
    const auto values = cli::get_doubles(map, key, {});
    if (values.empty()) return Mat::Zero(rows, cols);
    if (static_cast<int>(values.size()) != rows * cols) {
        throw ConfigError(key + ": expected " + std::to_string(rows * cols) + " numbers");
    }
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
    }
    return m;
}

CustomSystem build_custom_system(const cli::ConfigMap& map) {
    const int d = cli::get_int(map, "custom_d", 3);
    const int n1 = cli::get_int(map, "custom_n1", -1);
    const int n2 = cli::get_int(map, "custom_n2", -1);
    if ((d != 2 && d != 3) || n1 < 0 || n2 < 0 || n1 + n2 == 0) {
        throw ConfigError("custom system needs custom_d in {2,3} and custom_n1/custom_n2 >= 0");
    }
    const TfgShape shape{d, n1, n2};
    const int q = shape.q(), r = shape.r();

    CustomSystem cs;
    cs.system.shape = shape;
    VectorDynamics vd;
    vd.F = parse_matrix(map, "custom_F", q, q);
    vd.C = parse_matrix(map, "custom_C", q, r);
    vd.Phi = parse_matrix(map, "custom_Phi", r, r);
    vd.Gamma = parse_matrix(map, "custom_Gamma", r, q);
    vd.d_fixed = parse_matrix(map, "custom_d_fixed", q, 1);
    vd.u_body = parse_matrix(map, "custom_u_body", q, 1);
    vd.d_body = parse_matrix(map, "custom_d_body", r, 1);
    vd.u_fixed = parse_matrix(map, "custom_u_fixed", r, 1);

    const int dp = shape.algebra_dim();
    NaturalFrame nf{lie::Rotation::identity(d), lie::Rotation::identity(d)};
    const Mat o_vec = parse_matrix(map, "custom_O_rotvec", dp, 1);
    const Mat w_vec = parse_matrix(map, "custom_Omega_rotvec", dp, 1);
    nf.O = lie::exp_rot(Vec(o_vec));
    nf.Omega = lie::exp_rot(Vec(w_vec));
    cs.system.step_model = [vd, nf](int) { return StepModel{vd, nf}; };

    const int m_rows = cli::get_int(map, "custom_output_blocks", 0) * d;
    if (m_rows > 0) {
        OutputModel om;
        om.frame = cli::get_string(map, "custom_output_frame", "fixed") == "body" ? Frame::Body
                                                                                  : Frame::Fixed;
        om.Hx = parse_matrix(map, "custom_Hx", m_rows, q);
        om.HX = parse_matrix(map, "custom_HX", m_rows, r);
        om.offset = parse_matrix(map, "custom_offset", m_rows, 1);
        cs.system.outputs.push_back(std::move(om));
    }
    cs.claim_natural = cli::get_bool(map, "custom_claim_natural", false);
    return cs;
}

int cmd_validate(const std::string& config_path) {
    const cli::ConfigMap map = load_or_empty(config_path);
    const std::string scenario = cli::get_string(map, "scenario", "inertial_nav");

    TwoFramesSystem system;
    bool claim_natural = false;
    if (scenario == "custom") {
        CustomSystem cs = build_custom_system(map);
        system = std::move(cs.system);
        claim_natural = cs.claim_natural;
    } else {
        const auto cfg = scenarios::ScenarioConfig::from_map(map);
        system = scenarios::build_for_validation(cfg).system;
        claim_natural = scenario != "inertial_nav";
    }

    std::mt19937 rng(7);
    const StepModel sm = system.step_model(0);
    std::cout << "system: " << scenario << "\n";

    bool vector_ok = true;
    const auto report = [&](const char* name, const Mat& m) {
        if (m.size() == 0) return;
        const auto rep = check_commutation(m, system.shape.d, 50, rng);
        vector_ok = vector_ok && rep.commutes;
        std::cout << "  commutation " << name << ": "
                  << (rep.commutes ? "OK" : "FAIL") << " (residual "
                  << rep.max_residual
                  << (rep.block_structured ? ", block-structured" : ", numerical only") << ")\n";
    };
    report("F", sm.vec.F);
    report("C", sm.vec.C);
    report("Phi", sm.vec.Phi);
    report("Gamma", sm.vec.Gamma);
    for (const auto& om : system.outputs) {
        report("H^x", om.Hx);
        report("H^X", om.HX);
    }

    const FrameClass fc = check_natural_frame(sm.frame, system.shape, 50, rng);
    std::cout << "  frame dynamics: " << to_string(fc);
    if (std::holds_alternative<GenericFrame>(sm.frame)) {
        std::cout << " (generic frame dynamics: state element inside Omega)";
    }
    std::cout << "\n";

    const auto phi = [&sm](const TfgElement& chi) { return apply_step(sm, chi); };
    const double residual = check_group_affine(phi, system.shape, 100, rng);
    std::cout << "  group-affine residual: " << residual << "\n";

    const bool natural = vector_ok && fc != FrameClass::NotNatural && residual < 1e-10;
    std::cout << "  verdict: " << (natural ? "natural two-frames system" : "not natural")
              << "\n";
    if (claim_natural && !natural) {
        std::cout << "validation FAILED: system was declared natural\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const std::string& config_path, long long seed, int runs,
              const std::string& filters, const std::string& out_dir) {
    const auto cfg = resolve_config(config_path, seed, runs, filters);
    fs::create_directories(out_dir);

    // Manifest first: rerunning `bench --config <manifest>` reproduces the CSVs.
    cli::ConfigMap manifest = cfg.to_map();
    manifest["meta_tool_version"] = kToolVersion;
    manifest["meta_config_path"] = config_path.empty() ? "(defaults)" : config_path;
    manifest["meta_out_dir"] = out_dir;
    for (const auto& name : cfg.filters) {
        manifest["meta_csv_" + name] = (fs::path(out_dir) / ("rmse_" + name + ".csv")).string();
    }
    manifest["meta_csv_summary"] = (fs::path(out_dir) / "summary.csv").string();
    {
        std::ofstream mf(fs::path(out_dir) / "manifest.txt", std::ios::binary);
        if (!mf) throw ConfigError("cannot write manifest in " + out_dir);
        mf << cli::dump_config(manifest);
    }

    const auto result = scenarios::run_monte_carlo(cfg);

    const std::vector<std::string> header{"time_s",       "rmse_att_deg", "rmse_vel",
                                          "rmse_pos",     "rmse_bw_degps", "rmse_ba"};
    for (const auto& name : cfg.filters) {
        const Mat& rmse = result.rmse.at(name);
        std::vector<std::vector<double>> rows;
        rows.reserve(result.t.size());
        for (size_t i = 0; i < result.t.size(); ++i) {
            rows.push_back({result.t[i], rmse(i, 0), rmse(i, 1), rmse(i, 2), rmse(i, 3),
                            rmse(i, 4)});
        }
        cli::write_csv(manifest["meta_csv_" + name], header, rows);
    }

    std::ofstream summary(manifest["meta_csv_summary"], std::ios::binary);
    summary << "filter,final_time_s,rmse_att_deg,rmse_vel,rmse_pos,rmse_bw_degps,rmse_ba\r\n";
    for (const auto& name : cfg.filters) {
        const Mat& rmse = result.rmse.at(name);
        const auto last = rmse.rows() - 1;
        summary << name << "," << cli::format_double(result.t.back());
        for (int jcol = 0; jcol < 5; ++jcol) {
            summary << "," << cli::format_double(rmse(last, jcol));
        }
        summary << "\r\n";
    }
    summary.close();

    for (const auto& name : cfg.filters) {
        const Mat& rmse = result.rmse.at(name);
        std::cout << name << ": final attitude RMSE " << rmse(rmse.rows() - 1, 0)
                  << " deg, gyro-bias RMSE " << rmse(rmse.rows() - 1, 3) << " deg/s\n";
    }
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

struct SuiteResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return max_residual < tolerance; }
};

SuiteResult suite_embedding_exponential(double tol_scale) {
    SuiteResult s{"embedding-exponential", 0.0, 1e-9 * tol_scale};
    std::mt19937 rng(11);
    for (const TfgShape shape : {TfgShape{3, 2, 2}, TfgShape{2, 1, 1}}) {
        for (int t = 0; t < 200; ++t) {
            const TfgTangent xi = random_tangent(shape, rng, 2.0);
            s.max_residual = std::max(
                s.max_residual, distance(exp_tfg(xi), oracles::exp_tfg_embedding(xi)));
            const TfgElement a = random_element(shape, rng);
            const TfgElement b = random_element(shape, rng);
            s.max_residual = std::max(
                s.max_residual, distance(compose(a, b), oracles::compose_embedding(a, b)));
            s.max_residual = std::max(
                s.max_residual, distance(inverse(a), oracles::inverse_embedding(a)));
        }
    }
    return s;
}

SuiteResult suite_error_recursions(double tol_scale) {
    SuiteResult s{"two-path-error-recursions", 0.0, 1e-11 * tol_scale};
    std::mt19937 rng(12);
    for (const TfgShape shape : {TfgShape{3, 2, 2}, TfgShape{2, 2, 1}, TfgShape{3, 3, 0}}) {
        for (int t = 0; t < 100; ++t) {
            const StepModel sm = random_natural_step(shape, rng);
            const auto phi = [&sm](const TfgElement& chi) { return apply_step(sm, chi); };
            const TfgElement err = random_element(shape, rng);
            for (const ErrorSide side : {ErrorSide::Left, ErrorSide::Right}) {
                const TfgElement direct = error_propagate(err, sm, side);
                const TfgElement abstract_path =
                    side == ErrorSide::Left
                        ? compose(inverse(phi(TfgElement::identity(shape))), phi(err))
                        : compose(phi(err), inverse(phi(TfgElement::identity(shape))));
                s.max_residual = std::max(s.max_residual, distance(direct, abstract_path));
            }
            const TfgElement corr = exp_tfg(random_tangent(shape, rng, 0.5));
            const TfgElement left_upd = error_update(err, corr, ErrorSide::Left);
            s.max_residual =
                std::max(s.max_residual, distance(left_upd, compose(inverse(corr), err)));
            const TfgElement right_upd = error_update(err, corr, ErrorSide::Right);
            s.max_residual =
                std::max(s.max_residual, distance(right_upd, compose(err, inverse(corr))));
        }
    }
    return s;
}

SuiteResult suite_fd_jacobians(double tol_scale) {
    SuiteResult s{"finite-difference-jacobians", 0.0, 1e-5 * tol_scale};
    std::mt19937 rng(13);
    for (const TfgShape shape : {TfgShape{3, 2, 2}, TfgShape{2, 1, 1}}) {
        for (int t = 0; t < 20; ++t) {
            const StepModel sm = random_natural_step(shape, rng);
            for (const ErrorSide side : {ErrorSide::Left, ErrorSide::Right}) {
                const TfgElement id = TfgElement::identity(shape);
                const auto [a_s, a_v] = propagation_jacobians(sm, shape, side, id, id);
                const Mat analytic = a_s * a_v;
                const auto f = [&](const Vec& v) {
                    const TfgElement err = exp_tfg(TfgTangent::from_stacked(shape, v));
                    return log_tfg(error_propagate(err, sm, side)).stacked();
                };
                const Mat fd =
                    oracles::central_difference(f, Vec::Zero(shape.tangent_dim()));
                s.max_residual =
                    std::max(s.max_residual, (fd - analytic).norm() / analytic.norm());
            }
        }
    }
    return s;
}

int cmd_selftest(double tol_scale) {
    const std::vector<SuiteResult> suites = {
        suite_embedding_exponential(tol_scale),
        suite_error_recursions(tol_scale),
        suite_fd_jacobians(tol_scale),
    };
    bool all_pass = true;
    for (const auto& s : suites) {
        std::cout << s.name << ": " << (s.pass() ? "PASS" : "FAIL") << " (max residual "
                  << s.max_residual << ", tolerance " << s.tolerance << ")\n";
        all_pass = all_pass && s.pass();
    }
    return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-frames-group filter benchmark"};
    app.require_subcommand(0, 1);

    std::string config_path;
    long long seed = -1;
    int runs = 0;
    std::string filters;
    std::string out_dir = "out";
    bool print_config = false;
    double tol_scale = 1.0;

    app.add_flag("--print-config", print_config, "dump the resolved configuration and exit");
    app.add_option("--config", config_path, "configuration file (key = value lines)");

    auto* validate = app.add_subcommand("validate", "run the naturalness validators");
    validate->add_option("--config", config_path, "configuration file");

    auto* bench = app.add_subcommand("bench", "Monte-Carlo benchmark, CSV output");
    bench->add_option("--config", config_path, "configuration file");
    bench->add_option("--seed", seed, "override the master seed");
    bench->add_option("--runs", runs, "override the run count");
    bench->add_option("--filters", filters, "comma list among tfg,imperfect,mekf");
    bench->add_option("--out", out_dir, "output directory");

    auto* selftest = app.add_subcommand("selftest", "run the oracle suites");
    selftest->add_option("--tolerance-scale", tol_scale,
                         "multiply every suite tolerance by this factor");

    CLI11_PARSE(app, argc, argv);

    try {
        if (print_config) {
            const auto cfg = resolve_config(config_path, seed, runs, filters);
            std::cout << cli::dump_config(cfg.to_map());
            return 0;
        }
        if (validate->parsed()) return cmd_validate(config_path);
        if (bench->parsed()) return cmd_bench(config_path, seed, runs, filters, out_dir);
        if (selftest->parsed()) return cmd_selftest(tol_scale);
        std::cout << app.help();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
