#ifndef LIOUVILLE_CONFIG_HPP
#define LIOUVILLE_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "liouville/errors.hpp"
#include "liouville/params.hpp"

namespace liouville {

using json = nlohmann::json;

/// One sweep: a pipeline, its exponent, and a list of scales. No randomness anywhere.
struct RunConfig {
    Pipeline pipeline = Pipeline::nonquantized;
    double alpha = 0.5;
    int n = 1;
    std::vector<double> eps_list{0.1, 0.03, 0.01, 0.003};
    QuadraticH h = default_h_nonquantized(0.5);
    int grid_m = 4096;
    int l_max = 32;
    double tol = 1e-12;
    double tau = 1.0;
    int max_iter = 50;
    std::string out_dir = "out";
    std::vector<std::string> formats{"csv", "json"};

    double exponent() const { return pipeline == Pipeline::quantized ? double(n) : alpha; }

    bool wants(const std::string& fmt) const {
        for (const auto& f : formats)
            if (f == fmt) return true;
        return false;
    }

    Params params(double eps) const {
        Params p = pipeline == Pipeline::quantized ? Params::quantized(n, eps) : Params::nonquantized(alpha, eps);
        p.h = h;
        p.l_max = l_max;
        p.tol = tol;
        p.tau = tau;
        p.max_iter = max_iter;
        return p;
    }

    bool operator==(const RunConfig&) const = default;
};

inline json to_json(const QuadraticH& h) {
    return json{{"h0", h.h0}, {"grad", {h.grad[0], h.grad[1]}}, {"hess", {h.hess.xx, h.hess.xy, h.hess.yy}}};
}

inline json to_json(const RunConfig& c) {
    return json{{"pipeline", to_string(c.pipeline)},
                {"alpha", c.alpha},
                {"n", c.n},
                {"eps", c.eps_list},
                {"h", to_json(c.h)},
                {"grid_m", c.grid_m},
                {"l_max", c.l_max},
                {"tol", c.tol},
                {"tau", c.tau},
                {"max_iter", c.max_iter},
                {"out", c.out_dir},
                {"format", c.formats}};
}

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& dst, std::vector<std::string>& problems) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        problems.push_back(std::string(key) + ": has the wrong type");
    }
}

inline void read_h(const json& j, QuadraticH& h, std::vector<std::string>& problems) {
    if (!j.is_object()) {
        problems.push_back("h: must be an object with h0, grad, hess");
        return;
    }
    for (const auto& [key, value] : j.items())
        if (key != "h0" && key != "grad" && key != "hess") problems.push_back("h." + key + ": unknown key");
    if (j.contains("h0")) {
        if (j["h0"].is_number()) h.h0 = j["h0"].get<double>();
        else problems.push_back("h.h0: must be a number");
    }
    if (j.contains("grad")) {
        const json& g = j["grad"];
        if (g.is_array() && g.size() == 2 && g[0].is_number() && g[1].is_number())
            h.grad = {g[0].get<double>(), g[1].get<double>()};
        else
            problems.push_back("h.grad: must be two numbers");
    }
    if (j.contains("hess")) {
        const json& b = j["hess"];
        if (b.is_array() && b.size() == 3 && b[0].is_number() && b[1].is_number() && b[2].is_number())
            h.hess = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
        else
            problems.push_back("h.hess: must be three numbers (xx, xy, yy)");
    }
}

} // namespace detail

/// Validated configuration from a flat JSON object; missing keys take the defaults.
/// Throws ValidationError naming every violated invariant.
inline RunConfig parse_config(const json& j) {
    std::vector<std::string> problems;
    RunConfig c;
    if (!j.is_object()) throw ValidationError({"config: must be a JSON object"});
    static const std::set<std::string> known{"pipeline", "alpha", "n",     "eps", "h",   "grid_m",
                                             "l_max",    "tol",   "tau",   "max_iter", "out", "format"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) problems.push_back(key + ": unknown key");

    if (j.contains("pipeline")) {
        const json& p = j["pipeline"];
        if (p == "nonquantized") c.pipeline = Pipeline::nonquantized;
        else if (p == "quantized") c.pipeline = Pipeline::quantized;
        else problems.push_back("pipeline: must be \"nonquantized\" or \"quantized\"");
    } else if (j.contains("n") && !j.contains("alpha")) {
        c.pipeline = Pipeline::quantized;
    }
    detail::read_field(j, "alpha", c.alpha, problems);
    if (j.contains("n")) {
        const json& n = j["n"];
        if (n.is_number_integer()) c.n = n.get<int>();
        else problems.push_back("n: must be an integer");
    }
    detail::read_field(j, "eps", c.eps_list, problems);
    detail::read_field(j, "grid_m", c.grid_m, problems);
    detail::read_field(j, "l_max", c.l_max, problems);
    detail::read_field(j, "tol", c.tol, problems);
    detail::read_field(j, "tau", c.tau, problems);
    detail::read_field(j, "max_iter", c.max_iter, problems);
    detail::read_field(j, "out", c.out_dir, problems);
    detail::read_field(j, "format", c.formats, problems);

    c.h = c.pipeline == Pipeline::quantized ? default_h_quantized(c.n) : default_h_nonquantized(c.alpha);
    if (j.contains("h")) detail::read_h(j["h"], c.h, problems);

    if (c.eps_list.empty()) problems.push_back("eps: must list at least one value");
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        const double e = c.eps_list[i];
        if (!(e > 0.0 && e < 1.0)) problems.push_back("eps[" + std::to_string(i) + "]: must lie in (0, 1)");
        if (i > 0 && !(e < c.eps_list[i - 1])) problems.push_back("eps: must be strictly decreasing");
    }
    if (c.grid_m < 16) problems.push_back("grid_m: must be >= 16");
    if (c.out_dir.empty()) problems.push_back("out: must be a directory path");
    if (c.formats.empty()) problems.push_back("format: must list csv and/or json");
    for (const auto& f : c.formats)
        if (f != "csv" && f != "json") problems.push_back("format: unknown format " + f);
    if (c.pipeline == Pipeline::quantized && !(c.h == default_h_quantized(c.n)))
        problems.push_back("h: the quantized pipeline fixes h = 8(N+1)^2 + |x|^2");

    // Params invariants other than eps, which was checked above.
    for (auto& p : c.params(0.5).problems())
        if (p.rfind("eps", 0) != 0) problems.push_back(p);

    if (!problems.empty()) throw ValidationError(std::move(problems));
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config", path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({"config: " + path + " is not valid JSON (" + e.what() + ")"});
    }
}

/// File contents (or {} without a path) with the flag overrides merged on top.
inline RunConfig parse_config(const std::string& path, const json& overrides) {
    json j = path.empty() ? json::object() : read_json_file(path);
    if (!j.is_object()) throw ValidationError({"config: must be a JSON object"});
    j.merge_patch(overrides);
    return parse_config(j);
}

/// FNV-1a of the canonical JSON echo.
inline std::string config_hash(const RunConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace liouville

#endif
