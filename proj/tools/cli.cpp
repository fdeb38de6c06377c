#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "koopman/csv.hpp"
#include "koopman/diagnostics.hpp"
#include "koopman/errors.hpp"
#include "koopman/pipeline.hpp"
#include "koopman/serialization.hpp"

namespace koopman::cli {

namespace {

using json = nlohmann::json;
using namespace json_io;

std::shared_ptr<spdlog::logger> logger() {
    if (auto existing = spdlog::get("koopman")) return existing;
    auto log = spdlog::stderr_logger_st("koopman");
    log->set_pattern("[%l] %v");
    const char* env = std::getenv("KOOPMAN_LOG");
    const std::string level = env ? env : "info";
    if (level == "quiet") {
        log->set_level(spdlog::level::off);
    } else if (level == "debug") {
        log->set_level(spdlog::level::debug);
    } else {
        log->set_level(spdlog::level::info);
    }
    return log;
}

json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw JsonSchemaError("cannot open '" + file + "'", "");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw JsonSchemaError("invalid JSON in '" + file + "': " + e.what(), "");
    }
}

Eigen::VectorXd parse_vector_flag(const std::string& text, const char* flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigurationError(std::string(flag) + ": invalid number '" + item + "'");
        }
    }
    if (values.empty()) throw ConfigurationError(std::string(flag) + ": expected comma-separated numbers");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string format_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ",";
        out += cells[i];
    }
    return out;
}

// ---- simulate -------------------------------------------------------------

OutputMap output_map_from_json(const json& j, const std::string& path) {
    const json& kind_j = field(j, path, "kind");
    if (!kind_j.is_string()) throw JsonSchemaError("expected a string", child(path, "kind"));
    const auto kind = kind_j.get<std::string>();
    if (kind == "full_state") return output::FullState{};
    if (kind == "linear") return output::LinearMap{read_matrix(field(j, path, "C"), child(path, "C"))};
    if (kind == "component_powers") {
        const auto tp = child(path, "terms");
        const json& terms = read_array(field(j, path, "terms"), tp);
        output::ComponentPowers out;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto ip = child(tp, i);
            if (!terms[i].is_array() || terms[i].size() != 2) throw JsonSchemaError("expected [index, power]", ip);
            out.terms.emplace_back(read_index(terms[i][0], child(ip, 0)),
                                   static_cast<unsigned>(read_index(terms[i][1], child(ip, 1))));
        }
        return out;
    }
    throw JsonSchemaError("unknown output map '" + kind + "'", child(path, "kind"));
}

SystemKind system_kind_from_json(const json& j, const std::string& path) {
    const json& kind_j = field(j, path, "kind");
    if (!kind_j.is_string()) throw JsonSchemaError("expected a string", child(path, "kind"));
    const auto kind = kind_j.get<std::string>();
    auto number = [&](const char* key, double fallback) {
        const json* v = optional_field(j, path, key);
        return v ? read_finite(*v, child(path, key)) : fallback;
    };
    if (kind == "linear") return system::Linear{read_matrix(field(j, path, "A"), child(path, "A"))};
    if (kind == "scalar_poly") {
        const Eigen::VectorXd c = read_vector(field(j, path, "coefficients"), child(path, "coefficients"));
        return system::ScalarPoly{std::vector<double>(c.data(), c.data() + c.size())};
    }
    if (kind == "van_der_pol") return system::VanDerPol{number("mu", 1.0), number("dt", 0.01)};
    if (kind == "duffing") {
        const system::Duffing d;
        return system::Duffing{number("alpha", d.alpha), number("beta", d.beta), number("delta", d.delta),
                               number("dt", d.dt)};
    }
    if (kind == "rotation") return system::Rotation{number("rho", 1.0), number("theta", 0.0)};
    throw JsonSchemaError("unknown system kind '" + kind + "'", child(path, "kind"));
}

struct SimulateFlags {
    std::string config;
    std::string system;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::string x0;
    std::string lower, upper;
    std::optional<std::size_t> trajectories;
    std::string output;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
    json cfg = f.config.empty() ? json::object() : read_json_file(f.config);
    if (!cfg.is_object()) throw JsonSchemaError("expected an object", "");
    if (!f.system.empty()) cfg["system"] = json{{"kind", f.system}};
    if (f.steps) cfg["steps"] = *f.steps;
    if (f.seed) cfg["seed"] = *f.seed;
    if (!f.x0.empty()) {
        const Eigen::VectorXd x0 = parse_vector_flag(f.x0, "--x0");
        cfg["initial_states"] = json::array({std::vector<double>(x0.data(), x0.data() + x0.size())});
        cfg.erase("random_initial");
    }
    if (f.trajectories || !f.lower.empty() || !f.upper.empty()) {
        json box = cfg.value("random_initial", json::object());
        if (f.trajectories) box["count"] = *f.trajectories;
        auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
        if (!f.lower.empty()) box["lower"] = vec(parse_vector_flag(f.lower, "--lower"));
        if (!f.upper.empty()) box["upper"] = vec(parse_vector_flag(f.upper, "--upper"));
        cfg["random_initial"] = box;
        cfg.erase("initial_states");
    }

    ReferenceSystem sys = system_from_json(cfg, "");
    const std::size_t steps = read_index(field(cfg, "", "steps"), "/steps");
    std::uint64_t seed = 0;
    if (const json* v = optional_field(cfg, "", "seed")) seed = read_index(*v, "/seed");

    InitialStates initial;
    if (const json* v = optional_field(cfg, "", "initial_states")) {
        read_array(*v, "/initial_states");
        std::vector<Eigen::VectorXd> starts;
        for (std::size_t i = 0; i < v->size(); ++i) starts.push_back(read_vector((*v)[i], child("/initial_states", i)));
        initial = std::move(starts);
    } else if (const json* b = optional_field(cfg, "", "random_initial")) {
        RandomInitialStates box;
        box.lower = read_vector(field(*b, "/random_initial", "lower"), "/random_initial/lower");
        box.upper = read_vector(field(*b, "/random_initial", "upper"), "/random_initial/upper");
        box.count = read_index(field(*b, "/random_initial", "count"), "/random_initial/count");
        initial = box;
    } else {
        throw JsonSchemaError("missing 'initial_states' or 'random_initial'", "");
    }

    const SimulationResult result = generate_snapshots(sys, initial, steps, seed);
    for (const auto& w : result.warnings) logger()->warn("{}", w);
    logger()->info("generated {} snapshot pairs", result.snapshots.samples());
    if (f.output.empty()) {
        write_snapshot_csv(out, result.snapshots);
    } else {
        std::ofstream file(f.output);
        if (!file) throw ConfigurationError("cannot write '" + f.output + "'");
        write_snapshot_csv(file, result.snapshots);
    }
    return kExitOk;
}

// ---- fit --------------------------------------------------------------------

struct FitFlags {
    std::string config;
    std::string input;
    std::string model;
    std::optional<unsigned> degree;
    bool include_state = false;
    std::string mode;
    std::optional<double> beta;
    std::optional<double> svd_rtol;
    bool no_modes = false;
    bool diagnostics = false;
};

Dictionary dictionary_from_config(const json& cfg, const SnapshotSet& data) {
    json d = cfg.value("dictionary", json{{"include_state", true}});
    if (!d.is_object()) throw JsonSchemaError("expected an object", "/dictionary");
    if (d.contains("basis")) return dictionary_from_json(d, "/dictionary");
    if (!d.contains("state_dim")) d["state_dim"] = data.state_dim();
    DictionarySpec spec = dictionary_spec_from_json(d, "/dictionary");
    if (const json* s = optional_field(d, "/dictionary", "rbf_sample")) {
        const std::size_t count = read_index(field(*s, "/dictionary/rbf_sample", "count"), "/dictionary/rbf_sample/count");
        std::uint64_t seed = 0;
        if (const json* v = optional_field(*s, "/dictionary/rbf_sample", "seed"))
            seed = read_index(*v, "/dictionary/rbf_sample/seed");
        for (auto& c : sample_rbf_centers(data.X(), count, seed)) spec.rbf_centers.push_back(std::move(c));
    }
    return make_standard_dictionary(spec);
}

void print_spectrum_table(std::ostream& out, const KoopmanModel& model) {
    out << std::right << std::setw(6) << "index" << std::setw(24) << "re" << std::setw(24) << "im" << std::setw(24)
        << "modulus" << std::setw(24) << "angle" << "\n";
    for (Eigen::Index i = 0; i < model.eigenvalues().size(); ++i) {
        const auto z = model.eigenvalues()[i];
        out << std::setw(6) << i << std::setw(24) << format_double(z.real()) << std::setw(24) << format_double(z.imag())
            << std::setw(24) << format_double(std::abs(z)) << std::setw(24) << format_double(std::arg(z)) << "\n";
    }
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
    json cfg = f.config.empty() ? json::object() : read_json_file(f.config);
    if (!cfg.is_object()) throw JsonSchemaError("expected an object", "");
    if (!f.input.empty()) cfg["input"] = f.input;
    if (!f.model.empty()) cfg["model"] = f.model;
    if (f.degree || f.include_state) {
        json d = cfg.value("dictionary", json::object());
        if (d.contains("basis")) throw ConfigurationError("--degree/--include-state conflict with an explicit basis");
        if (f.degree) d["monomial_degree"] = *f.degree;
        if (f.include_state) d["include_state"] = true;
        cfg["dictionary"] = d;
    }
    if (!f.mode.empty() || f.beta || f.svd_rtol) {
        json r = cfg.value("regularizer", json{{"mode", "pseudoinverse"}});
        if (!f.mode.empty() && r.value("mode", "") != f.mode) r = json{{"mode", f.mode}};
        const std::string mode = r.value("mode", "");
        if (f.beta) {
            if (mode == "tikhonov") {
                r["Q"] = json{{"scalar", *f.beta}};
            } else {
                r["beta"] = *f.beta;
            }
        }
        if (f.svd_rtol) r["svd_rtol"] = *f.svd_rtol;
        cfg["regularizer"] = r;
    }
    if (f.no_modes) cfg["compute_modes"] = false;
    if (f.diagnostics) cfg["diagnostics"] = true;

    const json& input_j = field(cfg, "", "input");
    const json& model_j = field(cfg, "", "model");
    if (!input_j.is_string() || input_j.get<std::string>().empty())
        throw JsonSchemaError("expected a non-empty path", "/input");
    if (!model_j.is_string() || model_j.get<std::string>().empty())
        throw JsonSchemaError("expected a non-empty path", "/model");

    const SnapshotSet data = read_snapshot_csv_file(input_j.get<std::string>());
    logger()->info("read {} snapshot pairs from {}", data.samples(), input_j.get<std::string>());
    const Dictionary dict = dictionary_from_config(cfg, data);

    FitOptions options;
    if (const json* r = optional_field(cfg, "", "regularizer")) options.regularizer = regularizer_from_json(*r, "/regularizer");
    if (const json* r = optional_field(cfg, "", "operator_regularizer"))
        options.operator_regularizer = regularizer_from_json(*r, "/operator_regularizer");
    if (const json* v = optional_field(cfg, "", "compute_modes")) {
        if (!v->is_boolean()) throw JsonSchemaError("expected a boolean", "/compute_modes");
        options.compute_modes = v->get<bool>();
    }
    bool diagnostics = false;
    if (const json* v = optional_field(cfg, "", "diagnostics")) {
        if (!v->is_boolean()) throw JsonSchemaError("expected a boolean", "/diagnostics");
        diagnostics = v->get<bool>();
    }

    const KoopmanModel model = fit(dict, data, options);
    for (const auto& w : model.meta().warnings) logger()->warn("{}", w);
    save_model(model, model_j.get<std::string>());
    logger()->info("wrote model to {}", model_j.get<std::string>());

    out << "n_L " << model.basis_size() << "\n";
    out << "m " << model.meta().samples << "\n";
    out << "p " << model.output_dim() << "\n";
    out << "regularizer " << mode_name(options.regularizer) << "\n";
    out << "gram_condition " << format_double(model.meta().gram_condition) << "\n";
    out << "system_condition " << format_double(model.meta().system_condition) << "\n";
    out << "eig_condition " << format_double(model.meta().eig_condition) << "\n\n";
    print_spectrum_table(out, model);
    if (diagnostics) {
        out << "\n" << render_text(full_report(dict, with_default_outputs(data), model));
    }
    return kExitOk;
}

// ---- predict / eig / diagnose ------------------------------------------------

int cmd_predict(const std::string& model_path, const std::string& x0_text, std::size_t steps, std::ostream& out) {
    const KoopmanModel model = load_model(model_path);
    const Eigen::VectorXd x0 = parse_vector_flag(x0_text, "--x0");
    const Trajectory traj = predict_trajectory(model, x0, steps);
    logger()->debug("max discarded imaginary part {}", traj.max_imag);
    std::vector<std::string> header{"k"};
    for (Eigen::Index j = 0; j < traj.values.cols(); ++j) header.push_back("y" + std::to_string(j + 1));
    out << format_row(header) << "\n";
    for (Eigen::Index k = 0; k < traj.values.rows(); ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (Eigen::Index j = 0; j < traj.values.cols(); ++j) row.push_back(format_double(traj.values(k, j)));
        out << format_row(row) << "\n";
    }
    return kExitOk;
}

int cmd_eig(const std::string& model_path, bool modes, bool as_json, std::ostream& out) {
    const KoopmanModel model = load_model(model_path);
    if (modes && !model.has_modes()) throw ConfigurationError("model was fit without Koopman modes");
    const auto& lam = model.eigenvalues();
    if (as_json) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            json row{{"index", i},
                     {"re", lam[i].real()},
                     {"im", lam[i].imag()},
                     {"modulus", std::abs(lam[i])},
                     {"angle", std::arg(lam[i])}};
            if (modes) {
                json mags = json::array();
                for (Eigen::Index p = 0; p < model.modes().rows(); ++p) mags.push_back(std::abs(model.modes()(p, i)));
                row["mode_magnitudes"] = std::move(mags);
            }
            rows.push_back(std::move(row));
        }
        out << rows.dump(1) << "\n";
        return kExitOk;
    }
    std::vector<std::string> header{"index", "re", "im", "modulus", "angle"};
    if (modes)
        for (Eigen::Index p = 0; p < model.modes().rows(); ++p) header.push_back("mode_y" + std::to_string(p + 1));
    out << format_row(header) << "\n";
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), format_double(lam[i].real()), format_double(lam[i].imag()),
                                     format_double(std::abs(lam[i])), format_double(std::arg(lam[i]))};
        if (modes)
            for (Eigen::Index p = 0; p < model.modes().rows(); ++p) row.push_back(format_double(std::abs(model.modes()(p, i))));
        out << format_row(row) << "\n";
    }
    return kExitOk;
}

int cmd_diagnose(const std::string& model_path, const std::string& data_path, bool as_json, std::ostream& out) {
    const KoopmanModel model = load_model(model_path);
    const SnapshotSet data = read_snapshot_csv_file(data_path);
    const DiagnosticsReport report = full_report(model.dictionary(), data, model);
    for (const auto& w : report.warnings) logger()->warn("{}", w);
    if (as_json) {
        out << to_json(report).dump(1) << "\n";
    } else {
        out << render_text(report);
    }
    return kExitOk;
}

}  // namespace

ReferenceSystem system_from_json(const json& j, const std::string& path) {
    ReferenceSystem sys{system_kind_from_json(field(j, path, "system"), child(path, "system"))};
    if (const json* o = optional_field(j, path, "output_map")) sys.output = output_map_from_json(*o, child(path, "output_map"));
    try {
        validate(sys);
    } catch (const ConfigurationError& e) {
        throw JsonSchemaError(e.what(), child(path, "system"));
    }
    return sys;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Koopman operator identification by extended dynamic mode decomposition", "koopman"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Generate snapshot CSV from a reference system");
    simulate->add_option("--config", sim.config, "Simulation config (JSON)");
    simulate->add_option("--system", sim.system, "linear|scalar_poly|van_der_pol|duffing|rotation");
    simulate->add_option("--steps", sim.steps, "Steps per trajectory");
    simulate->add_option("--seed", sim.seed, "Seed for random initial states");
    simulate->add_option("--x0", sim.x0, "Single initial state a,b,...");
    simulate->add_option("--trajectories", sim.trajectories, "Number of random initial states");
    simulate->add_option("--lower", sim.lower, "Lower corner of the initial-state box");
    simulate->add_option("--upper", sim.upper, "Upper corner of the initial-state box");
    simulate->add_option("--output", sim.output, "Write CSV here instead of standard output");

    FitFlags fitf;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a Koopman model from snapshot CSV");
    fit_cmd->add_option("--config", fitf.config, "Fit config (JSON)");
    fit_cmd->add_option("--input", fitf.input, "Snapshot CSV");
    fit_cmd->add_option("--model", fitf.model, "Output model JSON");
    fit_cmd->add_option("--degree", fitf.degree, "Monomial degree of the dictionary");
    fit_cmd->add_flag("--include-state", fitf.include_state, "Include state coordinates in the dictionary");
    fit_cmd->add_option("--mode", fitf.mode, "pseudoinverse|ridge|tikhonov");
    fit_cmd->add_option("--beta", fitf.beta, "Ridge weight (or tikhonov scalar Q)");
    fit_cmd->add_option("--svd-rtol", fitf.svd_rtol, "Relative SVD truncation threshold");
    fit_cmd->add_flag("--no-modes", fitf.no_modes, "Skip Koopman mode computation");
    fit_cmd->add_flag("--diagnostics", fitf.diagnostics, "Print the diagnostics report after fitting");

    std::string model_path, x0_text, data_path;
    std::size_t steps = 0;
    bool modes = false, as_json = false;
    auto* predict_cmd = app.add_subcommand("predict", "Spectral k-step prediction as CSV");
    predict_cmd->add_option("--model", model_path, "Model JSON")->required();
    predict_cmd->add_option("--x0", x0_text, "Initial state a,b,...")->required();
    predict_cmd->add_option("--steps", steps, "Largest step k");

    auto* eig_cmd = app.add_subcommand("eig", "Eigenvalue table as CSV");
    eig_cmd->add_option("--model", model_path, "Model JSON")->required();
    eig_cmd->add_flag("--modes", modes, "Append mode magnitudes per output");
    eig_cmd->add_flag("--json", as_json, "Emit JSON instead of CSV");

    auto* diagnose_cmd = app.add_subcommand("diagnose", "Projection and invariance diagnostics");
    diagnose_cmd->add_option("--model", model_path, "Model JSON")->required();
    diagnose_cmd->add_option("--input", data_path, "Snapshot CSV")->required();
    diagnose_cmd->add_flag("--json", as_json, "Emit JSON instead of a text table");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*simulate) return cmd_simulate(sim, out);
        if (*fit_cmd) return cmd_fit(fitf, out);
        if (*predict_cmd) return cmd_predict(model_path, x0_text, steps, out);
        if (*eig_cmd) return cmd_eig(model_path, modes, as_json, out);
        if (*diagnose_cmd) return cmd_diagnose(model_path, data_path, as_json, out);
    } catch (const SingularSystemError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace koopman::cli
