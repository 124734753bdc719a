#ifndef LIOUVILLE_RUN_HPP
#define LIOUVILLE_RUN_HPP

// Orchestration of build / verify / sweep and the export of their results.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/version.hpp>

#include "liouville/config.hpp"
#include "liouville/profile.hpp"
#include "liouville/verifier.hpp"

#define LIOUVILLE_VERSION "1.0.0"

namespace liouville {

enum class Command { build, verify, sweep };

inline const char* to_string(Command c) {
    switch (c) {
        case Command::build: return "build";
        case Command::verify: return "verify";
        case Command::sweep: return "sweep";
    }
    return "?";
}

enum ExitCode : int { kExitPass = 0, kExitCriterion = 1, kExitConfig = 2, kExitNumerical = 3 };

/// A pass/fail decision: lower <= value <= upper (either side may be open).
struct Flag {
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool pass() const { return std::isfinite(value) && value >= lower && value <= upper; }
};

struct DecayFit {
    std::string term;
    PowerFit fit;
};

/// Per-eps summary; profiles themselves are not kept.
struct EpsResult {
    double eps = 0.0;
    double weighted_residual = 0.0;  // construction side, without the iterate
    double normalized_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> deltas;
    std::vector<double> relative;
    std::vector<double> bounds;
    std::optional<int> c2_sign;
    std::optional<double> c2_audit_ratio;
    // verification
    bool verified = false;
    double fd_weighted = 0.0;
    double fd_l1 = 0.0;
    double fd_unscaled = 0.0;
    double fd_without_iterate = 0.0;
    std::vector<DecayFit> decay_fits;
    HarnackTable harnack;
    std::optional<BoundaryEnergy> boundary;
    std::array<double, 2> psi_grad0{0.0, 0.0};
    NonvanishingReport nonvanish;
};

/// Everything a run produced: summaries, flags, and the rendered export files.
struct ResultBundle {
    RunConfig config;
    Command command = Command::sweep;
    std::vector<EpsResult> results;
    std::optional<PowerFit> order_fit;
    std::vector<Flag> flags;
    std::optional<json> failure;
    int exit_code = kExitPass;
    std::map<std::string, std::string> files;  // file name -> bytes
};

/// 17 significant digits.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shortest round-trip form, used in file names and flag names.
inline std::string short_number(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json flag_json(const Flag& f) {
    return json{{"name", f.name}, {"value", bound_json(f.value)}, {"lower", bound_json(f.lower)},
                {"upper", bound_json(f.upper)}, {"pass", f.pass()}};
}

inline json fit_json(const PowerFit& f) {
    return json{{"exponent", f.exponent}, {"width", f.width}, {"constant", f.constant}, {"residual", f.residual}};
}

inline std::string corrections_csv(const Profile& p) {
    const double a = p.exponent();
    std::vector<std::string> head{"r", "U"};
    std::vector<const std::vector<double>*> cols;
    std::vector<double> zero(p.grid.size(), 0.0);
    auto mode = [&](Origin o, int l, Parity par) -> const std::vector<double>* {
        const CorrectionTerm* t = p.term(o);
        const ModeFunction* f = t ? t->find(l, par) : nullptr;
        return f ? &f->values : &zero;
    };
    if (p.pipeline() == Pipeline::nonquantized) {
        head.insert(head.end(), {"c0", "c1_cos", "c1_sin", "c2_cos", "c2_sin", "d_mode0"});
        cols = {mode(Origin::c0, 0, Parity::radial), mode(Origin::c1, 1, Parity::cos), mode(Origin::c1, 1, Parity::sin),
                mode(Origin::c2, 2, Parity::cos),    mode(Origin::c2, 2, Parity::sin), mode(Origin::d, 0, Parity::radial)};
        const int L = p.iterate ? p.iterate->max_l() : 0;
        for (int l = 1; l <= L; ++l) {
            head.push_back("d_cos_" + std::to_string(l));
            cols.push_back(mode(Origin::d, l, Parity::cos));
            head.push_back("d_sin_" + std::to_string(l));
            cols.push_back(mode(Origin::d, l, Parity::sin));
        }
    } else {
        head.insert(head.end(), {"c", "b_mode0"});
        cols = {mode(Origin::c, 0, Parity::radial), mode(Origin::b, 0, Parity::radial)};
    }
    std::string out;
    for (std::size_t k = 0; k < head.size(); ++k) out += (k ? "," : "") + head[k];
    out += "\n";
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        const double r = p.grid.r[i];
        out += fmt17(r) + "," + fmt17(eval_bubble(a, r));
        for (const auto* c : cols) out += "," + fmt17((*c)[i]);
        out += "\n";
    }
    return out;
}

inline std::string oscillation_csv(const HarnackTable& h) {
    std::string out = "r,osc\n";
    for (std::size_t k = 0; k < h.radii.size(); ++k) out += fmt17(h.radii[k]) + "," + fmt17(h.osc[k]) + "\n";
    return out;
}

inline std::string sweep_csv(const std::vector<EpsResult>& rs) {
    std::string out = "eps,weighted_residual,fd_residual,harnack_max,boundary_osc,energy,psi_grad_norm\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rs) {
        out += fmt17(r.eps) + "," + fmt17(r.weighted_residual) + "," + fmt17(r.fd_weighted) + "," +
               fmt17(r.harnack.max) + "," + fmt17(r.boundary ? r.boundary->boundary_osc : nan) + "," +
               fmt17(r.boundary ? r.boundary->energy : nan) + "," + fmt17(std::hypot(r.psi_grad0[0], r.psi_grad0[1])) +
               "\n";
    }
    return out;
}

/// Window [R/10, R] with 24 log-spaced radii.
inline std::vector<DecayFit> decay_fits(const Profile& p) {
    std::vector<double> radii;
    const double R = p.grid.r_max;
    for (int k = 0; k < 24; ++k) radii.push_back(R * std::pow(10.0, -1.0 + k / 23.0));
    radii.back() = R;
    std::vector<Origin> origins;
    for (const auto& t : p.corrections) origins.push_back(t.origin);
    if (p.iterate) origins.push_back(p.iterate->origin);
    std::vector<DecayFit> out;
    for (Origin o : origins) {
        try {
            out.push_back({to_string(o), decay_and_order_fit(radii, term_envelope(p, o, radii))});
        } catch (const FitError&) {
            // identically zero term: nothing to fit
        }
    }
    return out;
}

inline void summarize_build(const Profile& p, EpsResult& r) {
    r.weighted_residual = p.residual.weighted_sup;
    r.normalized_residual = p.residual.normalized;
    r.iterations = static_cast<int>(p.iteration_trace.size());
    r.converged = p.converged;
    r.deltas = p.iteration_trace;
    r.relative = p.relative_trace;
    r.bounds = p.bound_trace;
    if (p.c2) {
        r.c2_sign = p.c2->sign;
        r.c2_audit_ratio = p.c2->audit_ratio;
    }
}

inline void verify_profile(const Profile& p, EpsResult& r) {
    const FdResidual fd = fd_residual(p);
    FdOptions no_iterate;
    no_iterate.mask = kAll & ~static_cast<unsigned>(kIterate);
    r.fd_weighted = fd.weighted_sup;
    r.fd_l1 = fd.l1;
    r.fd_unscaled = fd.unscaled_sup;
    r.fd_without_iterate = fd_residual(p, no_iterate).weighted_sup;
    r.decay_fits = decay_fits(p);
    r.harnack = harnack_oscillation(p, harnack_radii(p));
    if (1.0 / p.params.eps <= p.grid.r_max * (1.0 + 1e-12)) {
        r.boundary = boundary_osc_and_energy(p);
        r.psi_grad0 = psi_from_profile(p).grad0;
    }
    r.nonvanish = nonvanishing_report(p.params, r.psi_grad0);
    r.verified = true;
}

inline void eps_flags(const RunConfig& c, const EpsResult& r, std::vector<Flag>& flags) {
    const std::string at = "@" + short_number(r.eps);
    flags.push_back({"picard_converged" + at, r.relative.empty() ? 0.0 : r.relative.back(),
                     -std::numeric_limits<double>::infinity(), c.tol});
    double ratio = 0.0;  // after step 2
    for (std::size_t k = 2; k < r.deltas.size(); ++k)
        if (r.deltas[k - 1] > 0.0) ratio = std::max(ratio, r.deltas[k] / r.deltas[k - 1]);
    flags.push_back({"picard_contraction" + at, ratio, -std::numeric_limits<double>::infinity(), 0.1});
    if (!r.bounds.empty() && r.bounds.front() > 0.0) {
        double top = 0.0;
        for (double b : r.bounds) top = std::max(top, b);
        flags.push_back({"iterate_bound_uniform" + at, top, 0.0, 2.0 * r.bounds.front()});
    }
    if (!r.verified) return;
    if (r.weighted_residual > 0.0)
        flags.push_back({"fd_cross_check" + at, r.fd_without_iterate / r.weighted_residual, 1.0 / 3.0, 3.0});
    flags.push_back({"fd_residual" + at, r.fd_weighted, 0.0, 100.0 * std::pow(r.eps, 4)});
    if (c.pipeline == Pipeline::nonquantized && r.nonvanish.grad_log_h_norm > 0.0)
        flags.push_back({"nonvanish_gradient" + at, r.nonvanish.combined_norm, 0.5 * r.nonvanish.grad_log_h_norm,
                         std::numeric_limits<double>::infinity()});
    if (c.pipeline == Pipeline::quantized) {
        const double ref = 1.0 / (4.0 * (1.0 + c.n) * (1.0 + c.n));
        flags.push_back({"lap_log_h_reference" + at, r.nonvanish.lap_log_h, ref - 1e-14, ref + 1e-14});
    }
}

inline void sweep_flags(const RunConfig& c, ResultBundle& b) {
    const auto& rs = b.results;
    if (rs.empty()) return;
    const double inf = std::numeric_limits<double>::infinity();
    if (b.order_fit && c.pipeline == Pipeline::nonquantized)
        b.flags.push_back({"order_fit_slope", b.order_fit->exponent, 2.7, 3.3});
    auto uniform = [&](const std::string& name, auto get) {
        double top = 0.0;
        for (const auto& r : rs) top = std::max(top, get(r));
        b.flags.push_back({name, top, -inf, 2.0 * get(rs.front())});
    };
    uniform("harnack_uniform", [](const EpsResult& r) { return r.harnack.max; });
    if (rs.front().boundary) {
        uniform("boundary_osc_uniform", [](const EpsResult& r) { return r.boundary->boundary_osc; });
        uniform("energy_uniform", [](const EpsResult& r) { return r.boundary->energy; });
        const double target = 8.0 * std::numbers::pi * (1.0 + c.exponent());
        b.flags.push_back({"energy_limit", std::abs(rs.back().boundary->energy / target - 1.0), 0.0, 1e-3});
    }
    if (c.pipeline == Pipeline::nonquantized && rs.size() >= 2) {
        double worst = 0.0;
        for (std::size_t k = 1; k < rs.size(); ++k) {
            const double prev = std::hypot(rs[k - 1].psi_grad0[0], rs[k - 1].psi_grad0[1]);
            const double cur = std::hypot(rs[k].psi_grad0[0], rs[k].psi_grad0[1]);
            worst = std::max(worst, prev > 0.0 ? cur / prev : inf);
        }
        b.flags.push_back({"psi_gradient_decreasing", worst, 0.0, 1.0 - 1e-12});
    }
}

inline json report_json(const ResultBundle& b) {
    json j;
    j["tool"] = {{"name", "liouville"},
                 {"version", LIOUVILLE_VERSION},
                 {"boost", BOOST_LIB_VERSION},
                 {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    j["command"] = to_string(b.command);
    j["config"] = to_json(b.config);
    j["config_hash"] = config_hash(b.config);
    json residual = json::array(), profiles = json::array(), decay = json::array(), harnack = json::array(),
         bof = json::array(), energy = json::array(), psi = json::array(), nonvanish = json::array();
    for (const auto& r : b.results) {
        json row{{"eps", r.eps}, {"weighted_residual", r.weighted_residual}, {"normalized", r.normalized_residual}};
        if (r.verified) {
            row["fd_weighted"] = r.fd_weighted;
            row["fd_l1"] = r.fd_l1;
            row["fd_unscaled"] = r.fd_unscaled;
            row["fd_without_iterate"] = r.fd_without_iterate;
        }
        residual.push_back(row);
        json prof{{"eps", r.eps},         {"iterations", r.iterations}, {"converged", r.converged},
                  {"deltas", r.deltas},   {"relative", r.relative},     {"bounds", r.bounds}};
        if (r.c2_sign) prof["c2_sign"] = *r.c2_sign;
        if (r.c2_audit_ratio) prof["c2_audit_ratio"] = detail::bound_json(*r.c2_audit_ratio);
        profiles.push_back(prof);
        if (!r.verified) continue;
        for (const auto& d : r.decay_fits) {
            json f = fit_json(d.fit);
            f["eps"] = r.eps;
            f["term"] = d.term;
            decay.push_back(f);
        }
        harnack.push_back({{"eps", r.eps}, {"max", r.harnack.max}, {"radii", r.harnack.radii.size()}});
        if (r.boundary) {
            bof.push_back({{"eps", r.eps}, {"value", r.boundary->boundary_osc}});
            energy.push_back({{"eps", r.eps},
                              {"value", r.boundary->energy},
                              {"error", r.boundary->energy_error},
                              {"limit", 8.0 * std::numbers::pi * (1.0 + b.config.exponent())}});
        }
        psi.push_back({{"eps", r.eps},
                       {"grad0", {r.psi_grad0[0], r.psi_grad0[1]}},
                       {"norm", std::hypot(r.psi_grad0[0], r.psi_grad0[1])}});
        nonvanish.push_back({{"eps", r.eps},
                             {"grad_log_h", {r.nonvanish.grad_log_h[0], r.nonvanish.grad_log_h[1]}},
                             {"grad_log_h_norm", r.nonvanish.grad_log_h_norm},
                             {"combined_norm", r.nonvanish.combined_norm},
                             {"lap_log_h", r.nonvanish.lap_log_h}});
    }
    j["residual_table"] = residual;
    j["profiles"] = profiles;
    j["order_fit"] = b.order_fit ? fit_json(*b.order_fit) : json(nullptr);
    j["decay_fits"] = decay;
    j["harnack_table"] = harnack;
    j["boundary_osc"] = bof;
    j["energy"] = energy;
    j["psi_grad0"] = psi;
    j["nonvanish"] = nonvanish;
    json flags = json::array();
    for (const auto& f : b.flags) flags.push_back(flag_json(f));
    j["flags"] = flags;
    j["passed"] = b.exit_code == kExitPass;
    j["exit_code"] = b.exit_code;
    j["failure"] = b.failure ? *b.failure : json(nullptr);
    return j;
}

} // namespace detail

/// Builds (and for verify / sweep, checks) every eps of the config. Numerical failures
/// stop the run and are recorded in the bundle's failure section with exit code 3.
inline ResultBundle run(const RunConfig& config, Command command) {
    ResultBundle b;
    b.config = config;
    b.command = command;
    for (double eps : config.eps_list) {
        EpsResult r;
        r.eps = eps;
        try {
            const Params params = config.params(eps);
            const Profile p = build_profile(params, config.grid_m);
            detail::summarize_build(p, r);
            if (command != Command::build) detail::verify_profile(p, r);
            if (config.wants("csv")) {
                b.files["corrections_" + short_number(eps) + ".csv"] = detail::corrections_csv(p);
                if (r.verified) b.files["oscillation_" + short_number(eps) + ".csv"] = detail::oscillation_csv(r.harnack);
            }
        } catch (const Error& e) {
            b.exit_code = e.error_class() == ErrorClass::configuration ? kExitConfig : kExitNumerical;
            b.failure = json{{"kind", e.error_class() == ErrorClass::configuration ? "configuration" : "numerical"},
                             {"eps", eps},
                             {"message", e.what()}};
            break;
        }
        detail::eps_flags(config, r, b.flags);
        b.results.push_back(std::move(r));
    }
    if (!b.failure) {
        if (command == Command::sweep && b.results.size() >= 3) {
            std::vector<double> x, y;
            for (const auto& r : b.results) {
                x.push_back(r.eps);
                y.push_back(r.weighted_residual);
            }
            try {
                b.order_fit = decay_and_order_fit(x, y);
            } catch (const FitError& e) {
                b.exit_code = kExitNumerical;
                b.failure = json{{"kind", "numerical"}, {"message", e.what()}};
            }
        }
        if (command == Command::sweep) detail::sweep_flags(config, b);
    }
    if (!b.failure) {
        for (const auto& f : b.flags) {
            if (!f.pass()) {
                b.exit_code = kExitCriterion;
                b.failure = json{{"kind", "criterion"}, {"criterion", f.name}, {"value", detail::bound_json(f.value)}};
                break;
            }
        }
    }
    if (command != Command::build && config.wants("csv")) b.files["sweep.csv"] = detail::sweep_csv(b.results);
    if (config.wants("json")) b.files["report.json"] = detail::report_json(b).dump(2) + "\n";
    return b;
}

/// Writes the rendered files into config.out_dir; returns the paths written.
inline std::vector<std::string> export_bundle(const ResultBundle& b) {
    namespace fs = std::filesystem;
    const fs::path dir(b.config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory", dir.string());
    std::vector<std::string> written;
    for (const auto& [name, bytes] : b.files) {
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write", path.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed", path.string());
        written.push_back(path.string());
    }
    return written;
}

} // namespace liouville

#endif
