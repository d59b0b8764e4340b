// mlc: certification, quantification, and simulated measurement of multilevel
// coherence for finite-dimensional density matrices.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlc/criteria.hpp"
#include "mlc/experiment.hpp"
#include "mlc/io.hpp"
#include "mlc/phase.hpp"
#include "mlc/robustness.hpp"
#include "mlc/states.hpp"
#include "mlc/version.hpp"
#include "mlc/witness.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
    std::uint64_t seed = 0;
    bool quiet = false;
    std::string out;
};

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json make_manifest(const std::string& command, const json& config, std::uint64_t seed) {
    return json{{"command", command},
                {"config", config},
                {"seed", seed},
                {"tool_version", mlc::kVersion},
                {"timestamp", iso_timestamp()}};
}

void emit(const GlobalOpts& g, const json& result) {
    if (g.out.empty()) {
        std::cout << result.dump(2) << "\n";
    } else {
        mlc::save_json(g.out, result);
        if (!g.quiet) std::cout << json{{"written", g.out}}.dump() << "\n";
    }
}

/// State mini-language: mcs:d=4 | nmcs:d=4,p=0.5 | mixed:d=4 | file path.
mlc::DensityMatrix parse_state(const std::string& spec) {
    auto parse_kv = [&](const std::string& body) {
        std::map<std::string, double> kv;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw mlc::ValidationError("state spec: expected key=value in '" + item + "'");
            }
            kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        }
        return kv;
    };
    if (spec.rfind("mcs:", 0) == 0) {
        const auto kv = parse_kv(spec.substr(4));
        return mlc::max_coherent(static_cast<int>(kv.at("d"))).projector();
    }
    if (spec.rfind("nmcs:", 0) == 0) {
        const auto kv = parse_kv(spec.substr(5));
        return mlc::noisy_max_coherent({static_cast<int>(kv.at("d")), kv.at("p")});
    }
    if (spec.rfind("mixed:", 0) == 0) {
        const auto kv = parse_kv(spec.substr(6));
        const int d = static_cast<int>(kv.at("d"));
        return mlc::DensityMatrix(mlc::Matrix::Identity(d, d) / d);
    }
    return mlc::DensityMatrix(mlc::load_matrix(spec));
}

mlc::PhaseTask parse_task(const std::string& spec) {
    if (spec.rfind("uniform:", 0) == 0) {
        const auto eq = spec.find("d=");
        if (eq == std::string::npos) throw mlc::ValidationError("task spec: expected uniform:d=N");
        return mlc::uniform_task(std::stoi(spec.substr(eq + 2)));
    }
    const json j = mlc::load_json(spec);
    std::vector<mlc::PhaseEntry> entries;
    for (const auto& e : j.at("entries")) {
        entries.push_back(mlc::PhaseEntry{e.at(0).get<double>(), e.at(1).get<double>()});
    }
    return mlc::PhaseTask(std::move(entries), j.at("dim").get<int>());
}

json verdict_to_json(const mlc::CertificateVerdict& v, double tol) {
    return json{{"criterion", v.criterion},
                {"verdict", mlc::to_string(v.verdict)},
                {"margin", v.margin},
                {"tolerance", tol}};
}

int run_certify(const GlobalOpts& g, const std::string& criterion, const std::string& state_spec,
                int k, double tol) {
    const mlc::DensityMatrix rho = parse_state(state_spec);
    mlc::CertificateVerdict v;
    if (criterion == "comparison") {
        v = mlc::certify_c2_comparison(rho, tol);
    } else if (criterion == "purity") {
        v = mlc::purity_ball_check(rho);
    } else if (criterion == "sufficient") {
        v = mlc::sufficient_ck_check(rho, k, tol);
    } else {
        throw mlc::ValidationError("unknown criterion '" + criterion + "'");
    }
    json result = verdict_to_json(v, tol);
    result["schema_version"] = mlc::kSchemaVersion;
    result["dim"] = rho.dim();
    if (criterion == "sufficient") result["k"] = k;
    result["manifest"] = make_manifest(
        "certify", json{{"criterion", criterion}, {"state", state_spec}, {"k", k}, {"tol", tol}},
        g.seed);
    emit(g, result);
    return 0;
}

int run_classify(const GlobalOpts& g, const std::string& state_spec, double tol) {
    const mlc::DensityMatrix rho = parse_state(state_spec);
    int n_c = 0;
    std::string method;
    if (rho.dim() == 3) {
        n_c = mlc::classify_qutrit(rho, tol);
        method = "qutrit-comparison";
    } else {
        n_c = mlc::coherence_number(rho, mlc::kMembershipTol);
        method = "rmc-scan";
    }
    json result{{"schema_version", mlc::kSchemaVersion},
                {"n_C", n_c},
                {"method", method},
                {"tolerance", rho.dim() == 3 ? tol : mlc::kMembershipTol},
                {"dim", rho.dim()}};
    result["manifest"] =
        make_manifest("classify", json{{"state", state_spec}, {"tol", tol}}, g.seed);
    emit(g, result);
    return 0;
}

int run_rmc(const GlobalOpts& g, const std::string& state_spec, int k, bool primal,
            const mlc::sdp::SdpOptions& opts, const std::string& witness_out) {
    const mlc::DensityMatrix rho = parse_state(state_spec);
    const mlc::RmcResult r =
        primal ? mlc::rmc_primal(rho, k, opts) : mlc::rmc_dual(rho, k, opts);
    json result{{"schema_version", mlc::kSchemaVersion},
                {"k", k},
                {"value", r.value},
                {"gap", r.gap},
                {"route", primal ? "primal" : "dual"},
                {"tolerance", json{{"gap_tol", opts.gap_tol}, {"feas_tol", opts.feas_tol}}}};
    if (r.witness) {
        result["witness"] = mlc::witness_to_json(*r.witness);
        if (!witness_out.empty()) mlc::save_json(witness_out, mlc::witness_to_json(*r.witness));
    }
    result["manifest"] = make_manifest(
        "rmc", json{{"state", state_spec}, {"k", k}, {"route", primal ? "primal" : "dual"}},
        g.seed);
    emit(g, result);
    return 0;
}

int run_rmc_bound(const GlobalOpts& g, const std::string& obs_file, int k, int dim) {
    const auto obs = mlc::observations_from_json(mlc::load_json(obs_file));
    if (dim == 0) {
        if (obs.empty()) throw mlc::ValidationError("rmc-bound: empty observation set needs --dim");
        dim = static_cast<int>(obs.front().observable.dim());
    }
    const mlc::ObservationBound bound = mlc::rmc_from_observations_retry(obs, k, dim);
    json result{{"schema_version", mlc::kSchemaVersion},
                {"k", k},
                {"dim", dim},
                {"value", bound.value},
                {"n_observations", obs.size()},
                {"widened", bound.widened},
                {"widening_factor", bound.widened ? 1.5 : 1.0},
                {"tolerance", json{{"gap_tol", 1e-7}, {"feas_tol", 1e-7}}}};
    result["manifest"] = make_manifest(
        "rmc-bound", json{{"observations", obs_file}, {"k", k}, {"dim", dim}}, g.seed);
    emit(g, result);
    return 0;
}

int run_phase_disc(const GlobalOpts& g, const std::string& state_spec, const std::string& task_spec,
                   double process_fidelity, int k_filter) {
    const mlc::DensityMatrix rho = parse_state(state_spec);
    const mlc::PhaseTask task = parse_task(task_spec);
    if (task.dim() != rho.dim()) throw mlc::ValidationError("phase-disc: task/state dim mismatch");

    std::vector<std::pair<double, mlc::DensityMatrix>> ensemble;
    for (const auto& e : task.entries()) {
        ensemble.emplace_back(e.prior, mlc::apply_phase(rho, e.phase));
    }
    const double p_succ = mlc::optimal_guess_probability(ensemble);
    const double p_max = task.p_max();
    const double corrected =
        mlc::imperfection_corrected_pmax(p_max, static_cast<int>(rho.dim()), process_fidelity);

    json bounds = json::array();
    for (int k = 1; k < rho.dim(); ++k) {
        if (k_filter > 0 && k != k_filter) continue;
        bounds.push_back(json{{"k", k},
                              {"bound", mlc::sdi_rmc_bound(p_succ, p_max, k)},
                              {"corrected_bound", mlc::sdi_rmc_bound(p_succ, corrected, k)}});
    }
    json result{{"schema_version", mlc::kSchemaVersion},
                {"p_succ", p_succ},
                {"p_max", p_max},
                {"corrected_p_max", corrected},
                {"process_fidelity", process_fidelity},
                {"bounds", bounds},
                {"tolerance", json{{"gap_tol", 1e-7}, {"feas_tol", 1e-7}}}};
    result["manifest"] = make_manifest("phase-disc",
                                       json{{"state", state_spec},
                                            {"task", task_spec},
                                            {"fidelity", process_fidelity},
                                            {"k", k_filter}},
                                       g.seed);
    emit(g, result);
    return 0;
}

int run_simulate(const GlobalOpts& g, const std::string& figure, const mlc::FigureConfig& cfg,
                 const std::string& out_csv) {
    const auto rows = mlc::reproduce_figure(mlc::figure_from_name(figure), cfg, g.seed);
    std::ofstream out(out_csv);
    if (!out) throw mlc::ValidationError("cannot write " + out_csv);
    mlc::write_csv(out, rows);

    json config{{"figure", figure},
                {"dim", cfg.dim},
                {"shots", cfg.shots},
                {"mc_runs", cfg.mc_runs},
                {"sigma_level", cfg.sigma_level},
                {"n_observables", cfg.n_observables},
                {"exact_observations", cfg.exact_observations},
                {"prep_fidelity", cfg.prep_fidelity},
                {"prep_purity", cfg.prep_purity},
                {"block_phase_jitter", cfg.block_phase_jitter},
                {"process_fidelity", cfg.process_fidelity},
                {"p_grid", cfg.p_grid},
                {"out", out_csv}};
    const json manifest = make_manifest("simulate", config, g.seed);
    mlc::save_json(out_csv + ".manifest.json", manifest);
    if (!g.quiet) {
        std::cout << json{{"written", out_csv}, {"rows", rows.size()}}.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilevel coherence toolbox"};
    app.require_subcommand(1);

    GlobalOpts g;
    if (const char* env = std::getenv("MLC_SEED")) g.seed = std::strtoull(env, nullptr, 10);
    app.add_option("--seed", g.seed, "master seed (default from MLC_SEED)");
    app.add_flag("--quiet", g.quiet, "suppress progress output (results are always emitted)");
    app.add_option("--out", g.out, "write the JSON result to a file instead of stdout");

    // certify
    auto* certify = app.add_subcommand("certify", "analytic membership certificates");
    std::string criterion, state_spec;
    int k = 2;
    double tol = mlc::kMarginTol;
    certify->add_option("--criterion", criterion, "comparison|purity|sufficient")->required();
    certify->add_option("--state", state_spec, "state spec or matrix JSON file")->required();
    certify->add_option("--k", k, "coherence level for the sufficient criterion");
    certify->add_option("--tol", tol, "eigenvalue margin tolerance");

    // classify
    auto* classify = app.add_subcommand("classify", "coherence number of a state");
    std::string cl_state;
    double cl_tol = mlc::kMarginTol;
    classify->add_option("--state", cl_state, "state spec or matrix JSON file")->required();
    classify->add_option("--tol", cl_tol, "classifier tolerance");

    // rmc
    auto* rmc = app.add_subcommand("rmc", "robustness of multilevel coherence");
    std::string rmc_state, witness_out;
    int rmc_k = 1;
    bool use_primal = false, use_dual = false;
    mlc::sdp::SdpOptions sdp_opts;
    rmc->add_option("--state", rmc_state, "state spec or matrix JSON file")->required();
    rmc->add_option("--k", rmc_k, "coherence level k")->required();
    rmc->add_flag("--primal", use_primal, "solve the covering decomposition program");
    rmc->add_flag("--dual", use_dual, "solve the witness program (default)");
    rmc->add_option("--gap-tol", sdp_opts.gap_tol, "duality gap tolerance");
    rmc->add_option("--feas-tol", sdp_opts.feas_tol, "feasibility tolerance");
    rmc->add_option("--max-iter", sdp_opts.max_iter, "interior-point iteration cap");
    rmc->add_option("--witness-out", witness_out, "also save the witness JSON here");

    // rmc-bound
    auto* bound = app.add_subcommand("rmc-bound", "robustness lower bound from measured data");
    std::string obs_file;
    int bound_k = 1, bound_dim = 0;
    bound->add_option("--observations", obs_file, "observations JSON file")->required();
    bound->add_option("--k", bound_k, "coherence level k")->required();
    bound->add_option("--dim", bound_dim, "state dimension (default: from the first observable)");

    // witness build|validate|expect
    auto* witness = app.add_subcommand("witness", "construct, check, and evaluate witnesses");
    witness->require_subcommand(1);
    auto* wbuild = witness->add_subcommand("build", "witness from a pure state");
    std::string wb_state, wb_out;
    int wb_k = 1;
    wbuild->add_option("--state", wb_state, "pure-state spec or matrix JSON file")->required();
    wbuild->add_option("--k", wb_k, "witnessed level (detects (k+1)-level coherence)")->required();
    wbuild->add_option("--out", wb_out, "witness JSON output file");
    auto* wvalidate = witness->add_subcommand("validate", "dual-cone membership check");
    std::string wv_file;
    int wv_k = 0;
    double wv_tol = mlc::kPsdTol;
    wvalidate->add_option("--witness", wv_file, "witness JSON file")->required();
    wvalidate->add_option("--k", wv_k, "level to validate at (default: the file's k)");
    wvalidate->add_option("--tol", wv_tol, "PSD tolerance");
    auto* wexpect = witness->add_subcommand("expect", "expectation value on a state");
    std::string we_file, we_state;
    wexpect->add_option("--witness", we_file, "witness JSON file")->required();
    wexpect->add_option("--state", we_state, "state spec or matrix JSON file")->required();

    // phase-disc
    auto* pd = app.add_subcommand("phase-disc", "phase-discrimination game and sdi bounds");
    std::string pd_state, pd_task = "uniform:d=4";
    double pd_fidelity = 1.0;
    int pd_k = 0;
    pd->add_option("--state", pd_state, "state spec or matrix JSON file")->required();
    pd->add_option("--task", pd_task, "uniform:d=N or a task JSON file");
    pd->add_option("--fidelity", pd_fidelity, "process fidelity for the corrected bound");
    pd->add_option("--k", pd_k, "restrict the report to one level");

    // simulate
    auto* sim = app.add_subcommand("simulate", "figure reproduction pipeline (CSV output)");
    std::string figure, sim_out;
    mlc::FigureConfig cfg;
    std::string grid_spec;
    sim->add_option("--figure", figure, "fig3|fig4|fig5|fig6")->required();
    sim->add_option("--out", sim_out, "CSV output file")->required();
    sim->add_option("--dim", cfg.dim, "system dimension");
    sim->add_option("--shots", cfg.shots, "shots per measurement setting");
    sim->add_option("--mc-runs", cfg.mc_runs, "Monte-Carlo resampling runs");
    sim->add_option("--sigma", cfg.sigma_level, "confidence level in sigmas");
    sim->add_option("--n-observables", cfg.n_observables, "fig5: number of random projectors");
    sim->add_flag("--exact-observations", cfg.exact_observations,
                  "fig5: use exact expectation values");
    sim->add_option("--prep-fidelity", cfg.prep_fidelity, "preparation fidelity");
    sim->add_option("--prep-purity", cfg.prep_purity, "preparation purity");
    sim->add_option("--jitter", cfg.block_phase_jitter, "block phase jitter (radians stddev)");
    sim->add_option("--process-fidelity", cfg.process_fidelity,
                    "fig6: process fidelity for the corrected series");
    sim->add_option("--p-grid", grid_spec, "comma-separated list of p values");

    CLI11_PARSE(app, argc, argv);

    try {
        if (certify->parsed()) return run_certify(g, criterion, state_spec, k, tol);
        if (classify->parsed()) return run_classify(g, cl_state, cl_tol);
        if (rmc->parsed()) {
            if (use_primal && use_dual) {
                throw mlc::ValidationError("rmc: choose one of --primal / --dual");
            }
            return run_rmc(g, rmc_state, rmc_k, use_primal, sdp_opts, witness_out);
        }
        if (bound->parsed()) return run_rmc_bound(g, obs_file, bound_k, bound_dim);
        if (witness->parsed()) {
            if (wbuild->parsed()) {
                const mlc::DensityMatrix rho = parse_state(wb_state);
                Eigen::SelfAdjointEigenSolver<mlc::Matrix> es(rho.mat());
                const int d = static_cast<int>(rho.dim());
                if (es.eigenvalues()(d - 1) < 1.0 - 1e-8) {
                    throw mlc::ValidationError("witness build: state is not pure");
                }
                const mlc::PureState psi(es.eigenvectors().col(d - 1));
                const mlc::Witness w = mlc::witness_from_pure(psi, wb_k);
                json result = mlc::witness_to_json(w);
                result["schema_version"] = mlc::kSchemaVersion;
                result["manifest"] = make_manifest(
                    "witness build", json{{"state", wb_state}, {"k", wb_k}}, g.seed);
                if (!wb_out.empty()) mlc::save_json(wb_out, mlc::witness_to_json(w));
                emit(g, result);
                return 0;
            }
            if (wvalidate->parsed()) {
                const mlc::Witness w = mlc::witness_from_json(mlc::load_json(wv_file));
                const int level = wv_k > 0 ? wv_k : w.level_k;
                const bool ok = mlc::validate_witness(w.matrix, level, wv_tol);
                json result{{"schema_version", mlc::kSchemaVersion},
                            {"k", level},
                            {"valid", ok},
                            {"tolerance", wv_tol}};
                result["manifest"] = make_manifest(
                    "witness validate", json{{"witness", wv_file}, {"k", level}}, g.seed);
                emit(g, result);
                return 0;
            }
            // expect
            const mlc::Witness w = mlc::witness_from_json(mlc::load_json(we_file));
            const mlc::DensityMatrix rho = parse_state(we_state);
            if (rho.dim() != w.matrix.dim()) {
                throw mlc::ValidationError("witness expect: dimension mismatch");
            }
            const double expectation = (w.matrix.mat() * rho.mat()).trace().real();
            const double lam_max = mlc::max_eigenvalue(w.matrix.mat());
            json result{{"schema_version", mlc::kSchemaVersion},
                        {"k", w.level_k},
                        {"expectation", expectation},
                        {"normalized", lam_max <= 1.0 + 1e-9},
                        {"rmc_lower_bound",
                         lam_max <= 1.0 + 1e-9 ? std::max(0.0, -expectation) : 0.0},
                        {"tolerance", 1e-9}};
            result["manifest"] = make_manifest(
                "witness expect", json{{"witness", we_file}, {"state", we_state}}, g.seed);
            emit(g, result);
            return 0;
        }
        if (pd->parsed()) return run_phase_disc(g, pd_state, pd_task, pd_fidelity, pd_k);
        if (sim->parsed()) {
            if (!grid_spec.empty()) {
                cfg.p_grid.clear();
                std::stringstream ss(grid_spec);
                std::string item;
                while (std::getline(ss, item, ',')) cfg.p_grid.push_back(std::stod(item));
            }
            return run_simulate(g, figure, cfg, sim_out);
        }
    } catch (const mlc::ValidationError& e) {
        std::cerr << json{{"error", e.what()}, {"type", "validation"}}.dump() << "\n";
        return 2;
    } catch (const mlc::SolverError& e) {
        std::cerr << json{{"error", e.what()}, {"type", "solver"}}.dump() << "\n";
        return 3;
    } catch (const mlc::NumericalError& e) {
        std::cerr << json{{"error", e.what()}, {"type", "numerical"}}.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"type", "internal"}}.dump() << "\n";
        return 3;
    }
    return 2;
}
