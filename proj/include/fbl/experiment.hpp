#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "fbl/json_io.hpp"
#include "fbl/verify.hpp"

namespace fbl {

/// One batch experiment: a task tag plus its payload, a space, an exponent,
/// budgets and a seed. The seed fully determines every stochastic choice.
struct ExperimentConfig {
    SpacePtr space;  // absent for gap/diverge/verify, which build their own
    double p = 1.0;
    std::string task;
    json payload = json::object();
    FblBudget budget;
    std::uint64_t seed = 0;
    std::string output = "result";
};

inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    ExperimentConfig cfg;
    if (!j.contains("task")) throw ConfigError("config: missing \"task\"");
    cfg.task = j.at("task").get<std::string>();
    static const char* tasks[] = {"norm",     "weakp",       "phinorm", "witness",
                                  "extract-phi", "classify", "gap",     "diverge",
                                  "verify"};
    bool known = false;
    for (const char* t : tasks) known |= cfg.task == t;
    if (!known) throw ConfigError("config: unknown task '" + cfg.task + "'");

    if (j.contains("p")) {
        cfg.p = j.at("p").get<double>();
        if (!(cfg.p >= 1.0)) throw ConfigError("config: p must be >= 1");
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("payload")) {
        if (!j.at("payload").is_object()) throw ConfigError("config: payload must be an object");
        cfg.payload = j.at("payload");
    }
    if (j.contains("budget")) {
        const json& b = j.at("budget");
        if (b.contains("restarts"))
            cfg.budget.restarts = detail::read_count(b.at("restarts"), "budget restarts", 100000);
        if (b.contains("tuple_max"))
            cfg.budget.tuple_max = detail::read_count(b.at("tuple_max"), "budget tuple_max", 64);
        if (b.contains("samples"))
            cfg.budget.pool_samples = detail::read_count(b.at("samples"), "budget samples", 1000000);
    }
    bool needs_space = cfg.task == "norm" || cfg.task == "weakp" || cfg.task == "phinorm" ||
                       cfg.task == "witness" || cfg.task == "extract-phi" || cfg.task == "classify";
    if (needs_space) {
        if (!j.contains("space")) throw ConfigError("config: task '" + cfg.task + "' needs a space");
        cfg.space = space_from_json(j.at("space"));
    } else if (j.contains("space")) {
        cfg.space = space_from_json(j.at("space"));
    }
    return cfg;
}

struct RunOutcome {
    int exit_code = 0;
    json result;
    std::string csv_header = "task,p,lower,upper,method,witness_size,seed,wall_ms";
    std::string csv_row;
    std::string message;
};

namespace detail {

inline std::string csv_number(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct CsvFields {
    double lower = 0.0;
    double upper = kInf;
    std::string method = "-";
    std::size_t witness_size = 0;
};

inline json budget_echo(const FblBudget& b) {
    return json{{"restarts", b.restarts},
                {"tuple_max", b.tuple_max},
                {"samples", b.pool_samples},
                {"top_candidates", b.top_candidates},
                {"refine_steps", b.refine_steps}};
}

}  // namespace detail

/// Executes one experiment. Exit codes: 0 success, 1 config/precondition
/// error, 2 consistency violation (including verify-suite failures).
inline RunOutcome run_experiment(const ExperimentConfig& cfg) {
    RunOutcome out;
    detail::CsvFields csv;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (cfg.task == "norm") {
            if (!cfg.payload.contains("f")) throw ConfigError("norm: payload needs \"f\" (an AST)");
            HomFn f = homfn_from_json(cfg.space, cfg.payload.at("f"));
            NormEstimate e = fbl_bracket(f, cfg.p, cfg.budget, cfg.seed);
            out.result["estimate"] = estimate_to_json(e);
            csv = {e.lower, e.upper, to_string(e.method),
                   e.witness_tuple ? e.witness_tuple->size() : 0};
        } else if (cfg.task == "weakp") {
            if (!cfg.payload.contains("tuple"))
                throw ConfigError("weakp: payload needs \"tuple\" (list of functionals)");
            std::vector<Func> tuple;
            for (const auto& t : cfg.payload.at("tuple"))
                tuple.push_back(Func(t.get<std::vector<double>>()));
            NormEstimate e = weak_p_norm(*cfg.space, tuple, cfg.p, {}, cfg.seed);
            out.result["estimate"] = estimate_to_json(e);
            csv = {e.lower, e.upper, to_string(e.method), tuple.size()};
        } else if (cfg.task == "phinorm") {
            if (!cfg.payload.contains("map") || !cfg.payload.contains("source"))
                throw ConfigError("phinorm: payload needs \"map\" and \"source\" (a space)");
            SpacePtr source = space_from_json(cfg.payload.at("source"));
            PHMap phi = phmap_from_json(cfg.space, source, cfg.payload.at("map"));
            PhiBudget pb;
            pb.inner = cfg.budget;
            NormEstimate e = phi_p_norm(phi, cfg.p, pb, cfg.seed);
            out.result["estimate"] = estimate_to_json(e);
            csv = {e.lower, e.upper, to_string(e.method),
                   e.witness_tuple ? e.witness_tuple->size() : 0};
        } else if (cfg.task == "witness") {
            if (!cfg.payload.contains("construction"))
                throw ConfigError("witness: payload needs \"construction\"");
            std::string c = cfg.payload.at("construction").get<std::string>();
            if (c == "sup_deltas") {
                std::vector<Vec> vecs;
                for (const auto& v : cfg.payload.at("vectors"))
                    vecs.push_back(Vec(v.get<std::vector<double>>()));
                auto scales = cfg.payload.at("scales").get<std::vector<double>>();
                HomFn f = sup_deltas(cfg.space, vecs, scales);
                WitnessReport rep;
                rep.construction = "sup_deltas";
                rep.f = f;
                rep.certificate.emplace_back("homogeneity_defect",
                                             homogeneity_defect(f, 1000, cfg.seed));
                out.result["report"] = witness_report_to_json(rep);
                csv = {0.0, kInf, "sup_deltas", vecs.size()};
            } else if (c == "series") {
                std::vector<Vec> basis;
                for (const auto& v : cfg.payload.at("basis"))
                    basis.push_back(Vec(v.get<std::vector<double>>()));
                HomFn f = series_witness(cfg.space, basis);
                WitnessReport rep;
                rep.construction = "series";
                rep.f = f;
                rep.certificate.emplace_back("homogeneity_defect",
                                             homogeneity_defect(f, 1000, cfg.seed));
                out.result["report"] = witness_report_to_json(rep);
                csv = {0.0, kInf, "series", basis.size()};
            } else if (c == "kernel") {
                std::vector<Vec> obstacles;
                for (const auto& v : cfg.payload.at("obstacles"))
                    obstacles.push_back(Vec(v.get<std::vector<double>>()));
                std::vector<Func> basis_funcs;
                for (const auto& v : cfg.payload.at("basis_funcs"))
                    basis_funcs.push_back(Func(v.get<std::vector<double>>()));
                Func x = kernel_witness(cfg.space, obstacles, basis_funcs);
                double residual = 0.0;
                for (const auto& o : obstacles)
                    residual = std::max(residual, std::abs(pairing(x, o)));
                out.result["functional"] = x.coords;
                out.result["residual_max"] = residual;
                csv = {residual, kInf, "kernel", obstacles.size()};
            } else if (c == "mu") {
                DiscreteMeasure mu;
                for (const auto& a : cfg.payload.at("atoms"))
                    mu.atoms.push_back(
                        {a.at(0).get<double>(), Vec(a.at(1).get<std::vector<double>>())});
                HomFn f = mu_induced(cfg.space, mu, cfg.p);
                WitnessReport rep;
                rep.construction = "mu";
                rep.f = f;
                rep.parameters.emplace_back("mass", mu.total_mass());
                rep.certificate.emplace_back("homogeneity_defect",
                                             homogeneity_defect(f, 1000, cfg.seed));
                out.result["report"] = witness_report_to_json(rep);
                csv = {0.0, kInf, "mu", mu.atoms.size()};
            } else {
                throw ConfigError("witness: unknown construction '" + c + "'");
            }
        } else if (cfg.task == "extract-phi") {
            if (!cfg.payload.contains("source") || !cfg.payload.contains("action"))
                throw ConfigError("extract-phi: payload needs \"source\" and \"action\"");
            SpacePtr source = space_from_json(cfg.payload.at("source"));
            std::vector<HomFn> action;
            for (const auto& a : cfg.payload.at("action"))
                action.push_back(homfn_from_json(source, a));
            PHMap phi = extract_phi(cfg.space, source, std::move(action));
            auto lin = linearity_report(phi, 512, cfg.seed);
            out.result["map"] = phmap_to_json(phi);
            out.result["linearity"] = json{{"additivity_defect", lin.additivity_defect},
                                           {"homogeneity_defect", lin.homogeneity_defect},
                                           {"quasilinearity_ratio", lin.quasilinearity_ratio}};
            csv = {lin.additivity_defect, kInf, "tabulated", cfg.space->dim()};
        } else if (cfg.task == "classify") {
            if (!cfg.payload.contains("f")) throw ConfigError("classify: payload needs \"f\"");
            HomFn f = homfn_from_json(cfg.space, cfg.payload.at("f"));
            ClassifyProbe probe;
            probe.seed = cfg.seed;
            if (cfg.payload.contains("probe")) {
                const json& pj = cfg.payload.at("probe");
                if (pj.contains("sphere_samples"))
                    probe.sphere_samples =
                        detail::read_count(pj.at("sphere_samples"), "sphere_samples", 1000000);
                if (pj.contains("radii")) probe.radii = pj.at("radii").get<std::vector<double>>();
                if (pj.contains("jump_threshold"))
                    probe.jump_threshold = pj.at("jump_threshold").get<double>();
                if (pj.contains("bound_cap")) probe.bound_cap = pj.at("bound_cap").get<double>();
            }
            ClassifyReport rep = classify_finite_dim(f, probe);
            out.result["classification"] = classify_report_to_json(rep);
            csv = {rep.jump, rep.sup_abs, to_string(rep.classification), 0};
        } else if (cfg.task == "gap") {
            for (const char* key : {"N", "q", "m"})
                if (!cfg.payload.contains(key))
                    throw ConfigError(std::string("gap: payload needs \"") + key + "\"");
            // the construction tree is dense, O(N^2) doubles
            std::size_t n = detail::read_count(cfg.payload.at("N"), "gap N", 1024);
            double q = cfg.payload.at("q").get<double>();
            std::size_t m = detail::read_count(cfg.payload.at("m"), "gap m", 1000);
            GapConstruction g = make_gap_construction(n, cfg.p, q, m);
            HomFn h = cfg.payload.contains("h") ? homfn_from_json(g.space, cfg.payload.at("h"))
                                                : zero_fn(g.space);
            WitnessReport rep = gap_witness(g, h);
            out.result["report"] = witness_report_to_json(rep);
            csv = {rep.value("distance_lower_bound"), kInf, "gap", m};
        } else if (cfg.task == "diverge") {
            if (!cfg.payload.contains("N")) throw ConfigError("diverge: payload needs \"N\"");
            std::size_t n = detail::read_count(cfg.payload.at("N"), "diverge N", 10000000);
            WitnessReport rep = divergence_witness(n, cfg.p, cfg.seed);
            out.result["report"] = witness_report_to_json(rep);
            csv = {rep.value("L(" + std::to_string(n) + ")") / rep.value("K"), kInf, "diverge", n};
        } else if (cfg.task == "verify") {
            verify::Mutation mutation = verify::Mutation::none;
            if (cfg.payload.contains("mutate")) {
                std::string m = cfg.payload.at("mutate").get<std::string>();
                if (m == "none") mutation = verify::Mutation::none;
                else if (m == "sup-as-inf") mutation = verify::Mutation::sup_as_inf;
                else if (m == "skip-rescale") mutation = verify::Mutation::skip_rescale;
                else if (m == "transpose-adjoint") mutation = verify::Mutation::transpose_adjoint;
                else throw ConfigError("verify: unknown mutation '" + m + "'");
            }
            verify::SuiteReport rep = verify::run_suite(cfg.seed, mutation);
            json checks = json::array();
            std::ostringstream lines;
            std::size_t failures = 0;
            for (const auto& c : rep.checks) {
                checks.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
                lines << (c.pass ? "PASS " : "FAIL ") << c.name;
                if (!c.pass && !c.detail.empty()) lines << " -- " << c.detail;
                lines << "\n";
                failures += c.pass ? 0 : 1;
            }
            out.result["checks"] = checks;
            out.result["mutation"] = verify::to_string(mutation);
            out.message = lines.str();
            csv = {double(rep.checks.size() - failures), double(rep.checks.size()), "verify", 0};
            if (!rep.all_pass()) out.exit_code = 2;
        }
    } catch (const ConfigError& e) {
        out.exit_code = 1;
        out.message = std::string("config error: ") + e.what();
        out.result = json{{"error", e.what()}};
    } catch (const ConsistencyError& e) {
        out.exit_code = 2;
        out.message = std::string("consistency violation: ") + e.what();
        out.result = json{{"error", e.what()}};
    } catch (const std::invalid_argument& e) {
        out.exit_code = 1;
        out.message = std::string("config error: ") + e.what();
        out.result = json{{"error", e.what()}};
    } catch (const std::domain_error& e) {
        out.exit_code = 1;
        out.message = std::string("config error: ") + e.what();
        out.result = json{{"error", e.what()}};
    } catch (const std::exception& e) {
        out.exit_code = 1;
        out.message = std::string("error: ") + e.what();
        out.result = json{{"error", e.what()}};
    }

    auto t1 = std::chrono::steady_clock::now();
    double wall_ms =
        std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0;

    // provenance: the effective configuration, defaults included
    out.result["config"] = json{{"task", cfg.task},
                                {"p", cfg.p},
                                {"seed", cfg.seed},
                                {"budget", detail::budget_echo(cfg.budget)}};
    if (cfg.space) out.result["config"]["space"] = space_to_json(*cfg.space);

    std::ostringstream row;
    row << cfg.task << ',' << detail::csv_number(cfg.p) << ',' << detail::csv_number(csv.lower)
        << ',' << detail::csv_number(csv.upper) << ',' << csv.method << ',' << csv.witness_size
        << ',' << cfg.seed << ',' << detail::csv_number(wall_ms);
    out.csv_row = row.str();
    return out;
}

/// Writes <prefix>.json and/or <prefix>.csv depending on format
/// ("json" | "csv" | "both").
inline void write_outputs(const RunOutcome& out, const std::string& prefix,
                          const std::string& format) {
    if (format != "json" && format != "csv" && format != "both")
        throw ConfigError("format must be json, csv or both");
    if (format == "json" || format == "both") {
        std::ofstream f(prefix + ".json");
        if (!f) throw std::runtime_error("cannot write " + prefix + ".json");
        f << out.result.dump(2) << "\n";
    }
    if (format == "csv" || format == "both") {
        std::ofstream f(prefix + ".csv");
        if (!f) throw std::runtime_error("cannot write " + prefix + ".csv");
        f << out.csv_header << "\n" << out.csv_row << "\n";
    }
}

}  // namespace fbl
