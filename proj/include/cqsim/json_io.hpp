#pragma once

// JSON (de)serialization of the value types crossing the tool boundary:
// physical parameters (strict eight-key schema), Gaussian mixtures,
// measurement records, posteriors, coupling profiles, scheme configs,
// phase-space specs, and the scenario config.

#include <fstream>
#include <string>

#include <json.hpp>

#include "cqsim/core.hpp"
#include "cqsim/dynamics.hpp"
#include "cqsim/measurement.hpp"
#include "cqsim/phase_space.hpp"

namespace cqsim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// PhysicalParams: exactly the keys M, m, hbar, lambda, epsilon, sigma_C,
// sigma_Q, q0; anything else is rejected.
// ---------------------------------------------------------------------------

inline json params_to_json(const PhysicalParams& p) {
    return json{{"M", p.M},           {"m", p.m},
                {"hbar", p.hbar},     {"lambda", p.lambda},
                {"epsilon", p.epsilon}, {"sigma_C", p.sigma_C},
                {"sigma_Q", p.sigma_Q}, {"q0", p.q0}};
}

inline PhysicalParams params_from_json(const json& j) {
    static const char* keys[] = {"M", "m", "hbar", "lambda", "epsilon", "sigma_C", "sigma_Q", "q0"};
    if (!j.is_object()) throw SimError(ErrorCode::InvalidConfig, "params must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) known = known || key == k;
        if (!known) throw SimError(ErrorCode::InvalidConfig, "unknown params key '" + key + "'");
        if (!value.is_number())
            throw SimError(ErrorCode::InvalidConfig, "params key '" + key + "' must be a number");
    }
    for (const char* k : keys)
        if (!j.contains(k))
            throw SimError(ErrorCode::InvalidConfig, std::string("missing params key '") + k + "'");
    PhysicalParams p;
    p.M = j.at("M");
    p.m = j.at("m");
    p.hbar = j.at("hbar");
    p.lambda = j.at("lambda");
    p.epsilon = j.at("epsilon");
    p.sigma_C = j.at("sigma_C");
    p.sigma_Q = j.at("sigma_Q");
    p.q0 = j.at("q0");
    return p;
}

// ---------------------------------------------------------------------------
// Gaussian mixtures
// ---------------------------------------------------------------------------

inline json mixture_to_json(const GaussianMixture1D& mix) {
    json arr = json::array();
    for (const auto& c : mix.components())
        arr.push_back(json{{"weight", c.weight}, {"mean", c.mean}, {"sigma", c.sigma}});
    return arr;
}

inline GaussianMixture1D mixture_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw SimError(ErrorCode::InvalidConfig, "mixture must be a non-empty JSON array");
    std::vector<GaussianComponent> comps;
    for (const auto& e : j)
        comps.push_back({e.at("weight").get<double>(), e.at("mean").get<double>(),
                         e.at("sigma").get<double>()});
    return GaussianMixture1D(comps);
}

// ---------------------------------------------------------------------------
// Measurement records and posteriors
// ---------------------------------------------------------------------------

inline json record_to_json(const MeasurementRecord& r) {
    return json{{"t_m", r.t_m}, {"x_m", r.x_m}, {"sigma_m", r.sigma_m}};
}

inline MeasurementRecord record_from_json(const json& j) {
    MeasurementRecord r;
    try {
        r.t_m = j.at("t_m");
        r.x_m = j.at("x_m");
        r.sigma_m = j.at("sigma_m");
    } catch (const json::exception& e) {
        throw SimError(ErrorCode::InvalidRecord, std::string("bad record JSON: ") + e.what());
    }
    return r;
}

inline json posterior_to_json(const Posterior& post) {
    json j{{"quantum", mixture_to_json(post.quantum)},
           {"pointer_label", post.pointer_label},
           {"independent", post.independent}};
    if (post.label_density) j["label_density"] = mixture_to_json(*post.label_density);
    return j;
}

// ---------------------------------------------------------------------------
// Coupling profile and scheme config
// ---------------------------------------------------------------------------

inline json profile_to_json(const AlphaProfile& prof) {
    json arr = json::array();
    for (const auto& s : prof.segments())
        arr.push_back(json{{"t0", s.t0}, {"t1", s.t1}, {"rate", s.rate}});
    return arr;
}

inline AlphaProfile profile_from_json(const json& j) {
    std::vector<AlphaProfile::Segment> segs;
    for (const auto& e : j)
        segs.push_back({e.at("t0").get<double>(), e.at("t1").get<double>(),
                        e.at("rate").get<double>()});
    return AlphaProfile(segs);
}

inline json scheme_to_json(const SchemeConfig& c) {
    return json{{"dt", c.dt},
                {"scheme", c.scheme == SchemeConfig::Scheme::FullHybrid ? "full-hybrid"
                                                                        : "interaction-advection"},
                {"flux", c.flux == SchemeConfig::Flux::Central ? "central" : "upwind"},
                {"cfl", c.cfl}};
}

inline SchemeConfig scheme_from_json(const json& j) {
    SchemeConfig c;
    if (j.contains("dt")) c.dt = j.at("dt");
    if (j.contains("cfl")) c.cfl = j.at("cfl");
    if (j.contains("scheme")) {
        const std::string s = j.at("scheme");
        if (s == "full-hybrid") c.scheme = SchemeConfig::Scheme::FullHybrid;
        else if (s == "interaction-advection") c.scheme = SchemeConfig::Scheme::InteractionAdvection;
        else throw SimError(ErrorCode::InvalidConfig, "unknown scheme '" + s + "'");
    }
    if (j.contains("flux")) {
        const std::string f = j.at("flux");
        if (f == "central") c.flux = SchemeConfig::Flux::Central;
        else if (f == "upwind") c.flux = SchemeConfig::Flux::Upwind;
        else throw SimError(ErrorCode::InvalidConfig, "unknown flux '" + f + "'");
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Phase-space specs
// ---------------------------------------------------------------------------

inline json phase_spec_to_json(const MixtureSpec& s) {
    return json{{"representation",
                 s.repr == MixtureSpec::Repr::Principal ? "principal" : "separated"},
                {"mass", s.mass},
                {"label_density", mixture_to_json(s.label_density)},
                {"profile", mixture_to_json(s.profile)}};
}

inline MixtureSpec phase_spec_from_json(const json& j) {
    MixtureSpec s;
    const std::string r = j.at("representation");
    if (r == "principal") s.repr = MixtureSpec::Repr::Principal;
    else if (r == "separated") s.repr = MixtureSpec::Repr::Separated;
    else throw SimError(ErrorCode::InvalidConfig, "unknown representation '" + r + "'");
    s.mass = j.at("mass");
    if (!(s.mass > 0.0)) throw SimError(ErrorCode::NonPositiveMass, "spec mass must be positive");
    s.label_density = mixture_from_json(j.at("label_density"));
    s.profile = mixture_from_json(j.at("profile"));
    return s;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError(ErrorCode::InvalidConfig, "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SimError(ErrorCode::InvalidConfig, "bad JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw SimError(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

}  // namespace cqsim
