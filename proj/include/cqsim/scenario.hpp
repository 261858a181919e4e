#pragma once

// Deterministic scenario runner: prepare, interact, drift, measure, update.
// A schedule of actions drives the analytic pipeline; every run writes a
// self-contained JSON manifest recording the draw, the readout, the update,
// and the checks that were applied. Outputs depend only on (config, seed).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cqsim/analytic.hpp"
#include "cqsim/csv.hpp"
#include "cqsim/json_io.hpp"
#include "cqsim/measurement.hpp"
#include "cqsim/rng.hpp"
#include "cqsim/svg.hpp"

namespace cqsim {

struct ScheduleAction {
    enum class Kind { EvolveTo, Measure, Export };

    Kind kind = Kind::EvolveTo;
    double t = 0.0;          // EvolveTo target
    bool noisy = false;      // Measure mode
    double sigma_m = 0.0;    // Measure readout noise
    std::string target;      // Export target
};

struct ScenarioConfig {
    PhysicalParams params;
    AlphaProfile profile = AlphaProfile::for_params(PhysicalParams{});
    std::size_t nx = 401;
    std::size_t nq = 401;
    SchemeConfig scheme;
    std::vector<ScheduleAction> schedule;
    std::uint64_t seed = 1;
};

inline void validate_scenario(const ScenarioConfig& cfg) {
    validated(cfg.params);
    cfg.scheme.validate();
    if (cfg.nx < 8 || cfg.nq < 8)
        throw SimError(ErrorCode::GridTooCoarse, "scenario grids need at least 8 points per axis");
    double current = 0.0;
    for (const auto& a : cfg.schedule) {
        switch (a.kind) {
            case ScheduleAction::Kind::EvolveTo:
                if (!(a.t > current))
                    throw SimError(ErrorCode::InvalidConfig,
                                   "schedule times must be strictly increasing");
                current = a.t;
                break;
            case ScheduleAction::Kind::Measure:
                if (!(current > cfg.params.epsilon))
                    throw SimError(ErrorCode::InvalidConfig,
                                   "measurements must come after the interaction window");
                if (a.noisy && !(a.sigma_m > 0.0))
                    throw SimError(ErrorCode::InvalidConfig, "noisy measurement needs sigma_m > 0");
                break;
            case ScheduleAction::Kind::Export:
                if (a.target != "densities" && a.target != "posterior" && a.target != "figures")
                    throw SimError(ErrorCode::InvalidConfig,
                                   "unknown export target '" + a.target + "'");
                break;
        }
    }
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    json sched = json::array();
    for (const auto& a : cfg.schedule) {
        switch (a.kind) {
            case ScheduleAction::Kind::EvolveTo:
                sched.push_back(json{{"action", "evolve_to"}, {"t", a.t}});
                break;
            case ScheduleAction::Kind::Measure:
                if (a.noisy)
                    sched.push_back(json{{"action", "measure"}, {"mode", "noisy"},
                                         {"sigma_m", a.sigma_m}});
                else
                    sched.push_back(json{{"action", "measure"}, {"mode", "ideal"}});
                break;
            case ScheduleAction::Kind::Export:
                sched.push_back(json{{"action", "export"}, {"target", a.target}});
                break;
        }
    }
    return json{{"params", params_to_json(cfg.params)}, {"alpha", profile_to_json(cfg.profile)},
                {"grid", json{{"nx", cfg.nx}, {"nq", cfg.nq}}},
                {"scheme", scheme_to_json(cfg.scheme)}, {"schedule", sched}, {"seed", cfg.seed}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    try {
        cfg.params = validated(params_from_json(j.at("params")));
        cfg.profile = j.contains("alpha") ? profile_from_json(j.at("alpha"))
                                          : AlphaProfile::for_params(cfg.params);
        if (j.contains("grid")) {
            cfg.nx = j.at("grid").value("nx", cfg.nx);
            cfg.nq = j.at("grid").value("nq", cfg.nq);
        }
        if (j.contains("scheme")) cfg.scheme = scheme_from_json(j.at("scheme"));
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& e : j.value("schedule", json::array())) {
            ScheduleAction a;
            const std::string kind = e.at("action");
            if (kind == "evolve_to") {
                a.kind = ScheduleAction::Kind::EvolveTo;
                a.t = e.at("t");
            } else if (kind == "measure") {
                a.kind = ScheduleAction::Kind::Measure;
                const std::string mode = e.value("mode", "ideal");
                if (mode == "noisy") {
                    a.noisy = true;
                    a.sigma_m = e.at("sigma_m");
                } else if (mode != "ideal") {
                    throw SimError(ErrorCode::InvalidConfig, "unknown measure mode '" + mode + "'");
                }
            } else if (kind == "export") {
                a.kind = ScheduleAction::Kind::Export;
                a.target = e.at("target");
            } else {
                throw SimError(ErrorCode::InvalidConfig, "unknown action '" + kind + "'");
            }
            cfg.schedule.push_back(a);
        }
    } catch (const json::exception& e) {
        throw SimError(ErrorCode::InvalidConfig, std::string("bad scenario JSON: ") + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

struct ScenarioResult {
    json manifest;
    std::vector<std::string> files;  ///< paths relative to the output directory
};

namespace detail {

inline void write_mixture_csv(const std::filesystem::path& path, const std::string& quantity,
                              double t, const GaussianMixture1D& mix, std::size_t n = 1001) {
    const Grid1D g = cover(mix, 8.0, n);
    write_density_csv(path.string(), quantity, t, g, mix.sample_pdf(g));
}

}  // namespace detail

/// Runs the schedule against the analytic engine: the interaction window maps
/// to the rigid shift, later times to the ballistic pointer and the freely
/// dispersing particle, measurements to a seeded draw plus the update chain.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                                   bool svg_enabled = false) {
    validate_scenario(cfg);
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path out(out_dir);

    Rng rng(cfg.seed);
    double current = 0.0;
    bool measured = false;
    CollapsedPointer pointer{};
    Posterior posterior;

    ScenarioResult result;
    json events = json::array();
    json exports = json::array();
    json checks;
    checks["well_separated"] = cfg.params.well_separated();
    int export_index = 0;

    auto add_file = [&](const std::filesystem::path& p) {
        result.files.push_back(std::filesystem::relative(p, out).string());
        exports.push_back(result.files.back());
    };

    auto pointer_densities = [&](double t) {
        std::vector<std::pair<std::string, std::vector<double>>> cols;
        GaussianMixture1D full =
            (t > cfg.params.epsilon)
                ? free_pointer_density(cfg.params, t, PointerWidth::Full)
                : pointer_marginal_exact(cfg.params, cfg.profile.integrated(t));
        const Grid1D g = cover(full, 8.0, 1001);
        cols.emplace_back("full_width", full.sample_pdf(g));
        if (t > cfg.params.epsilon) {
            GaussianMixture1D narrow = free_pointer_density(cfg.params, t, PointerWidth::Narrow);
            cols.emplace_back("narrow", narrow.sample_pdf(g));
        }
        return std::pair{g, cols};
    };

    auto do_export = [&](const std::string& target) {
        const std::string tag = std::to_string(export_index++);
        if (target == "densities") {
            if (!measured) {
                auto [gx, cols] = pointer_densities(current);
                const auto px = out / ("pointer_density_" + tag + ".csv");
                write_columns_csv(px.string(), "pointer density at t=" + fmt_double(current), "x",
                                  gx, cols);
                add_file(px);
            } else {
                const auto pj = out / ("pointer_state_" + tag + ".json");
                save_json(pj.string(),
                          json{{"type", "collapsed"},
                               {"q_label", pointer.q_label},
                               {"velocity", pointer.velocity()},
                               {"position", pointer.position(current)},
                               {"t", current}});
                add_file(pj);
            }
            const GaussianMixture1D qd =
                measured ? posterior.quantum : free_quantum_state(cfg.params, current).density();
            const auto pq = out / ("quantum_density_" + tag + ".csv");
            detail::write_mixture_csv(pq, "quantum_density", current, qd);
            add_file(pq);
        } else if (target == "posterior") {
            if (!measured)
                throw SimError(ErrorCode::InvalidConfig, "posterior export before any measurement");
            const auto pj = out / ("posterior_" + tag + ".json");
            save_json(pj.string(), posterior_to_json(posterior));
            add_file(pj);
            const auto pc = out / ("posterior_density_" + tag + ".csv");
            detail::write_mixture_csv(pc, "quantum_posterior", current, posterior.quantum);
            add_file(pc);
        } else if (target == "figures") {
            if (!svg_enabled) {
                exports.push_back("(figures skipped: svg disabled)");
                return;
            }
            // Initial configuration.
            {
                const GaussianMixture1D pc = initial_pointer_density(cfg.params);
                const GaussianMixture1D pq = initial_particle_density(cfg.params);
                const Grid1D g(std::min(pc.min_support(), pq.min_support()),
                               std::max(pc.max_support(), pq.max_support()), 801);
                Curve c1{"pointer P_C(x,0)", g.coords(), pc.sample_pdf(g), "#d62728"};
                Curve c2{"particle P_Q(q,0)", g.coords(), pq.sample_pdf(g), "#1f77b4"};
                const auto f = out / ("initial_" + tag + ".svg");
                write_svg_plot(f.string(), "Initial densities", "coordinate", {c1, c2});
                add_file(f);
            }
            // Split pointer density after the interaction.
            if (current > cfg.params.epsilon) {
                std::vector<Curve> curves;
                const char* colors[] = {"#fdd0a2", "#fd8d3c", "#e6550d", "#a63603"};
                for (int i = 1; i <= 4; ++i) {
                    const double t = cfg.params.epsilon +
                                     (current - cfg.params.epsilon) * double(i) / 4.0;
                    const GaussianMixture1D d =
                        free_pointer_density(cfg.params, t, PointerWidth::Full);
                    const Grid1D g = cover(free_pointer_density(cfg.params, current,
                                                                PointerWidth::Full), 8.0, 801);
                    curves.push_back({"t=" + fmt_double(t), g.coords(), d.sample_pdf(g),
                                      colors[i - 1]});
                }
                const auto f = out / ("pointer_split_" + tag + ".svg");
                write_svg_plot(f.string(), "Pointer density after interaction", "x", curves);
                add_file(f);
            }
        }
    };

    for (const auto& a : cfg.schedule) {
        switch (a.kind) {
            case ScheduleAction::Kind::EvolveTo:
                current = a.t;
                break;
            case ScheduleAction::Kind::Measure: {
                double q_prime;
                if (!measured) {
                    const PointerMixture mix = decompose_pointer_mixture(cfg.params, current);
                    auto [qp, collapsed] = sample_measurement(mix, rng);
                    q_prime = qp;
                    pointer = collapsed;
                } else {
                    q_prime = pointer.q_label;  // the pointer stays on its trajectory
                }
                const double x_true = pointer.position(current);
                const double x_m = a.noisy ? x_true + a.sigma_m * rng.normal() : x_true;
                const MeasurementRecord rec{current, x_m, a.noisy ? a.sigma_m : 0.0};
                posterior = a.noisy ? update_quantum_noisy(rec, cfg.params)
                                    : update_quantum(rec, cfg.params);
                measured = true;

                json ev{{"t", current},
                        {"mode", a.noisy ? "noisy" : "ideal"},
                        {"q_prime", q_prime},
                        {"record", record_to_json(rec)},
                        {"q_m", posterior.pointer_label},
                        {"posterior", posterior_to_json(posterior)}};
                if (!a.noisy) ev["sigma_Qm"] = posterior.quantum.components().front().sigma;
                events.push_back(ev);
                checks["narrow_regime_at_measurement"] = narrow_pointer_regime(cfg.params, current);
                break;
            }
            case ScheduleAction::Kind::Export:
                do_export(a.target);
                break;
        }
    }

    checks["normalization_tolerance"] = 1e-6;
    result.manifest = json{{"config", scenario_to_json(cfg)},
                           {"seed", cfg.seed},
                           {"t_final", current},
                           {"events", events},
                           {"exports", exports},
                           {"checks", checks}};
    save_json((out / "manifest.json").string(), result.manifest);
    result.files.push_back("manifest.json");
    return result;
}

}  // namespace cqsim
