#include "cli.hpp"

#include "bilap/reference.hpp"
#include "bilap/transplant.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace bilap::cli {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size()) throw ParameterError("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw ParameterError("config: " + key + " expects an integer, got '" + v + "'");
    return static_cast<int>(x);
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json record_json(const std::vector<TruncationStep>& record) {
    json out = json::array();
    for (const auto& s : record) out.push_back({{"T", s.T}, {"elements", s.elements}, {"lambda", opt(s.lambda)}});
    return out;
}

json report_json(const GroundStateReport& r) {
    json modes = json::array();
    for (const auto& m : r.modes) {
        json j = {{"mode", m.mode}};
        if (m.result) {
            const EigenResult& e = *m.result;
            j["lambda"] = e.lambda;
            j["T_final"] = e.final_truncation();
            j["N_final"] = e.final_elements();
            j["residual"] = e.residual;
            j["richardson"] = opt(e.richardson);
            j["converged"] = e.converged;
            j["truncation_record"] = record_json(e.record);
        } else {
            j["lambda"] = nullptr;
        }
        modes.push_back(std::move(j));
    }
    return {{"tau", r.tau},
            {"gamma", r.gamma},
            {"radius", r.radius},
            {"classification", to_string(r.classification)},
            {"argmin_mode", r.argmin_mode ? json(*r.argmin_mode) : json(nullptr)},
            {"lambda_min", opt(r.lowest())},
            {"tolerance", r.tolerance},
            {"modes", std::move(modes)}};
}

json margins_json(const ConstraintMargins& m) {
    return {{"curvature_margin", m.curvature_margin},
            {"perimeter_excess", m.perimeter_excess},
            {"congruent_to_disk", m.congruent_to_disk},
            {"hypothesis_satisfied", m.hypothesis_satisfied}};
}

json transplant_json(const TransplantReport& r) {
    json j = {{"tau", r.tau},
              {"gamma", r.gamma},
              {"radius", r.radius},
              {"quotient", opt(r.quotient)},
              {"disk_lambda", opt(r.disk_lambda)},
              {"margin", opt(r.margin)},
              {"radial", r.radial},
              {"constraints", margins_json(r.margins)},
              {"verdict", to_string(r.verdict)},
              {"tolerance", r.tolerance}};
    j["ground_state"] = r.ground_state ? report_json(*r.ground_state) : json(nullptr);
    return j;
}

std::vector<double> geometric_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw ParameterError("alpha grid needs 0 < min <= max and count >= 1");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) {
        g[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
    }
    return g;
}

} // namespace

void apply_config(std::istream& in, Settings& s) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParameterError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "rtol") {
            s.ctrl.rtol = to_double(key, value);
        } else if (key == "T0") {
            s.ctrl.T0 = to_double(key, value);
        } else if (key == "N0") {
            s.ctrl.N0 = to_double(key, value);
        } else if (key == "n_max") {
            s.ctrl.n_max = to_int(key, value);
        } else if (key == "samples") {
            const int v = to_int(key, value);
            if (v < 0) throw ParameterError("config: samples must be positive");
            s.samples = static_cast<std::size_t>(v);
        } else if (key == "max_doublings") {
            s.ctrl.max_doublings = to_int(key, value);
        } else if (key == "growth") {
            s.ctrl.growth = to_double(key, value);
        } else if (key == "max_refinements") {
            s.ctrl.max_refinements = to_int(key, value);
        } else if (key == "threads") {
            const int v = to_int(key, value);
            if (v < 0) throw ParameterError("config: threads must be non-negative");
            s.threads = static_cast<unsigned>(v);
        } else {
            throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lowest eigenvalue of the perturbed Robin bi-Laplacian outside a disk"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    app.add_option("--config", config_path, "key = value settings file (default: $BILAP_CONFIG)");
    app.add_option("--out", out_path, "write results here instead of stdout");

    double rtol = 0.0, T0 = 0.0, N0 = 0.0;
    int n_max = 0, max_doublings = 0, samples = 0;
    unsigned threads = 0;
    std::vector<CLI::Option*> solver_opts;
    auto add_solver_flags = [&](CLI::App* sub) {
        solver_opts.push_back(sub->add_option("--rtol", rtol, "relative stability of lambda"));
        solver_opts.push_back(sub->add_option("--T0", T0, "initial truncation length"));
        solver_opts.push_back(sub->add_option("--N0", N0, "elements per unit length at the boundary"));
        solver_opts.push_back(sub->add_option("--n-max", n_max, "highest Fourier mode scanned"));
        solver_opts.push_back(sub->add_option("--max-doublings", max_doublings, "truncation doublings"));
    };

    double tau = 0.0, gamma = 0.0, radius = 1.0;
    auto add_physics = [&](CLI::App* sub) {
        sub->add_option("--tau", tau, "tension tau >= 0")->required();
        sub->add_option("--gamma", gamma, "boundary parameter")->required();
        sub->add_option("--radius", radius, "disk radius R > 0")->required();
    };

    auto* solve = app.add_subcommand("solve-disk", "mode scan and ground-state classification (JSON)");
    add_physics(solve);
    add_solver_flags(solve);

    auto* sweep_cmd = app.add_subcommand("sweep", "ground states over a tau x gamma x radius grid (CSV)");
    std::vector<double> taus, gammas, radii;
    sweep_cmd->add_option("--tau", taus, "tau values")->required()->delimiter(',');
    sweep_cmd->add_option("--gamma", gammas, "gamma values")->required()->delimiter(',');
    sweep_cmd->add_option("--radius", radii, "radius values")->required()->delimiter(',');
    auto* threads_opt = sweep_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    add_solver_flags(sweep_cmd);

    auto* verify = app.add_subcommand("verify", "transplanted quotient versus the disk eigenvalue (JSON)");
    std::string domain_path;
    verify->add_option("--domain", domain_path, "support-function domain file")->required();
    add_physics(verify);
    add_solver_flags(verify);
    auto* samples_opt = verify->add_option("--samples", samples, "boundary samples (>= 1024)");

    auto* ualpha = app.add_subcommand("ualpha", "energy of exp(-r^alpha/2) over an alpha grid (CSV)");
    add_physics(ualpha);
    double alpha_min = 1e-3, alpha_max = 10.0;
    int alpha_count = 41;
    std::vector<double> alphas;
    bool want_threshold = false;
    ualpha->add_option("--alpha", alphas, "explicit alpha values")->delimiter(',');
    ualpha->add_option("--alpha-min", alpha_min, "smallest alpha of the geometric grid");
    ualpha->add_option("--alpha-max", alpha_max, "largest alpha of the geometric grid");
    ualpha->add_option("--count", alpha_count, "number of grid points");
    ualpha->add_flag("--threshold", want_threshold, "print alpha* (first sign change of the energy) as JSON");

    auto* oracle = app.add_subcommand("oracle", "finite elements versus the Bessel and finite-difference oracles (JSON)");
    add_physics(oracle);
    add_solver_flags(oracle);
    double fd_step = 0.02;
    oracle->add_option("--step", fd_step, "finite-difference step");

    auto* profile = app.add_subcommand("profile", "converged radial ground-state profile as t,f,fprime (CSV)");
    add_physics(profile);
    add_solver_flags(profile);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    std::ofstream file;
    std::ostream* sink = &out;
    try {
        Settings s;
        if (config_path.empty()) {
            if (const char* env = std::getenv("BILAP_CONFIG"); env != nullptr) config_path = env;
        }
        if (!config_path.empty()) {
            std::ifstream cfg(config_path);
            if (!cfg) throw ParameterError("cannot open config file " + config_path);
            apply_config(cfg, s);
        }
        for (auto* o : solver_opts) {
            if (o->count() == 0) continue;
            const std::string name = o->get_name();
            if (name == "--rtol") s.ctrl.rtol = rtol;
            if (name == "--T0") s.ctrl.T0 = T0;
            if (name == "--N0") s.ctrl.N0 = N0;
            if (name == "--n-max") s.ctrl.n_max = n_max;
            if (name == "--max-doublings") s.ctrl.max_doublings = max_doublings;
        }
        if (threads_opt->count() > 0) s.threads = threads;
        if (samples_opt->count() > 0) {
            if (samples < 0) throw ParameterError("--samples must be positive");
            s.samples = static_cast<std::size_t>(samples);
        }
        s.ctrl.validate();

        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) throw ParameterError("cannot write " + out_path);
            sink = &file;
        }
        std::ostream& os = *sink;

        auto no_bound_state_message = [&](double g) {
            if (g >= 0.0) return std::string("no negative bound state (gamma ≥ 0)");
            return std::string("no negative bound state resolved at the largest truncation");
        };

        if (*solve) {
            FiberParams{tau, gamma, radius, 0}.validate();
            const GroundStateReport r = ground_state(tau, gamma, radius, s.ctrl);
            os << report_json(r).dump(2) << "\n";
            if (r.classification == Classification::no_bound_state) {
                err << no_bound_state_message(gamma) << "\n";
                return no_bound_state;
            }
            return ok;
        }

        if (*sweep_cmd) {
            const auto rows = bilap::sweep(taus, gammas, radii, s.ctrl, s.threads);
            os << "tau,gamma,radius,mode,lambda,classification,T_final,N_final,residual\n";
            for (const auto& row : rows) {
                os << num(row.tau) << ',' << num(row.gamma) << ',' << num(row.radius) << ',';
                if (!row.report) {
                    os << ",,error,,,\n";
                    err << "row tau=" << num(row.tau) << " gamma=" << num(row.gamma) << " radius=" << num(row.radius)
                        << ": " << row.error << "\n";
                    continue;
                }
                const GroundStateReport& r = *row.report;
                const EigenResult* e = r.argmin_mode ? r.mode_result(*r.argmin_mode) : nullptr;
                if (e != nullptr) {
                    os << *r.argmin_mode << ',' << num(e->lambda) << ',' << to_string(r.classification) << ','
                       << num(e->final_truncation()) << ',' << e->final_elements() << ',' << num(e->residual) << "\n";
                } else {
                    os << ",," << to_string(r.classification) << ",,,\n";
                }
            }
            return ok;
        }

        if (*verify) {
            const ConvexDomain d = load_domain(domain_path, s.samples);
            FiberParams{tau, gamma, radius, 0}.validate();
            const TransplantReport r = verify_isoperimetric(d, tau, gamma, radius, s.ctrl);
            os << transplant_json(r).dump(2) << "\n";
            if (r.ground_state && r.ground_state->classification == Classification::no_bound_state) {
                err << no_bound_state_message(gamma) << "\n";
                return no_bound_state;
            }
            return ok;
        }

        if (*ualpha) {
            FiberParams{tau, gamma, radius, 0}.validate();
            if (want_threshold) {
                const auto a = ualpha_threshold(tau, gamma, radius);
                os << json{{"tau", tau}, {"gamma", gamma}, {"radius", radius}, {"alpha_star", opt(a)}}.dump(2)
                   << "\n";
                return ok;
            }
            const std::vector<double> grid = alphas.empty() ? geometric_grid(alpha_min, alpha_max, alpha_count) : alphas;
            os << "alpha,energy,norm2,rayleigh\n";
            for (double a : grid) {
                const double e = ualpha_energy(a, tau, gamma, radius);
                const double n = ualpha_norm2(a, radius);
                os << num(a) << ',' << num(e) << ',' << num(n) << ',';
                if (std::isfinite(n)) os << num(e / n);
                os << "\n";
            }
            return ok;
        }

        if (*oracle) {
            const FiberParams p{tau, gamma, radius, 0};
            p.validate();
            const auto fem = solve_fiber(p, s.ctrl);
            json j = {{"tau", tau}, {"gamma", gamma}, {"radius", radius}};
            j["fem_lambda"] = fem ? json(fem->lambda) : json(nullptr);
            try {
                const auto sec = secular_lambda(tau, gamma, radius);
                j["secular_lambda"] = opt(sec);
                if (sec && fem) j["secular_rel_diff"] = std::abs(*sec - fem->lambda) / std::abs(fem->lambda);
                if (!sec) j["secular_note"] = "no root with real wavenumbers";
            } catch (const UnsupportedRegimeError& e) {
                j["secular_lambda"] = nullptr;
                j["secular_note"] = e.what();
            }
            const double T = fem ? fem->final_truncation() : s.ctrl.initial_truncation(radius);
            const auto fd = fd_lambda(p, fd_step, T);
            j["fd_h"] = fd_step;
            j["fd_T"] = T;
            j["fd_lambda"] = opt(fd);
            if (fd && fem) j["fd_rel_diff"] = std::abs(*fd - fem->lambda) / std::abs(fem->lambda);
            os << j.dump(2) << "\n";
            if (!fem) {
                err << no_bound_state_message(gamma) << "\n";
                return no_bound_state;
            }
            return ok;
        }

        if (*profile) {
            const FiberParams p{tau, gamma, radius, 0};
            const auto fem = solve_fiber(p, s.ctrl);
            if (!fem) {
                err << no_bound_state_message(gamma) << "\n";
                return no_bound_state;
            }
            const HermiteProfile& f = fem->profile;
            os << "t,f,fprime\n";
            const auto c = f.coefficients();
            for (std::size_t i = 0; i < f.mesh().node_count(); ++i) {
                os << num(f.mesh().node(i) - radius) << ',' << num(c[2 * i]) << ',' << num(c[2 * i + 1]) << "\n";
            }
            return ok;
        }
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return convergence_failure;
    } catch (const DiagnosticsError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return convergence_failure;
    } catch (const FactorizationError& e) {
        err << "convergence failure: " << e.what() << "\n";
        return convergence_failure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return input_error;
    }
    return input_error;
}

} // namespace bilap::cli
