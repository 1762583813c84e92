#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gmclab {

namespace {

using nlohmann::json;

const std::set<std::string> common_keys = {"kind", "seed", "replicas", "threads", "out_dir"};

const std::map<std::string, std::set<std::string>>& kind_keys() {
    static const std::map<std::string, std::set<std::string>> m = {
        {"identities", {}},
        {"covcheck", {"dim", "alpha", "delta_u", "kernel_resolution"}},
        {"sample",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution"}},
        {"gmc-moments",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution", "gamma",
          "k_max", "eps_log_schedule", "f_lo", "f_hi", "f_width", "regularization"}},
        {"series-check",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution",
          "gamma_schedule", "eps_log_schedule", "n_gamma_prime", "radius_factor", "series_tol",
          "f_lo", "f_hi", "f_width", "regularization"}},
        {"growth-report",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution", "gamma",
          "eta", "k_max", "eps_log_schedule", "f_lo", "f_hi", "f_width", "regularization"}},
        {"thickness",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution",
          "t_schedule"}},
        {"badmass",
         {"dim", "frak_a", "alpha", "grid_m", "t_max", "delta_u", "kernel_resolution", "gamma",
          "gamma_hat", "k", "eps_log_schedule", "delta_log_schedule", "f_lo", "f_hi", "f_width",
          "regularization"}},
        {"toy-martingale", {"t_schedule"}},
    };
    return m;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(const std::string& kind) {
    ExperimentConfig c;
    c.kind = kind;
    if (kind == "identities") {
        c.replicas = 1000;
    } else if (kind == "covcheck") {
        c.dim = 1;
        c.replicas = 1;
    } else if (kind == "sample") {
        c.dim = 1;
        c.grid_m = 512;
        c.t_max = 8.0;
        c.frak_a = 1.0;
        c.alpha = 1.0;
        c.replicas = 2000;
    } else if (kind == "gmc-moments") {
        c.dim = 1;
        c.grid_m = 512;
        c.frak_a = 0.0;
        c.t_max = 4.0;
        c.gamma = 0.5;
        c.k_max = 2;
        c.eps_log_schedule = {4};
        c.replicas = 4000;
        c.regularization = "truncated";
    } else if (kind == "series-check") {
        c.dim = 2;
        c.grid_m = 256;
        c.frak_a = 0.0;
        c.t_max = 7.0;
        c.gamma_schedule = {0.5, 1.0};
        c.eps_log_schedule = {3};
        c.replicas = 5;
        c.n_gamma_prime = 12;
        c.radius_factor = 0.8;
        c.series_tol = 1e-8;
        c.regularization = "mollified";
    } else if (kind == "growth-report") {
        c.dim = 2;
        c.grid_m = 256;
        c.frak_a = 0.0;
        c.t_max = 5.0;
        c.gamma = 1.0;
        c.eta = 0.2;
        c.k_max = 8;
        c.eps_log_schedule = {2, 3, 4, 5};
        c.replicas = 200;
        c.regularization = "truncated";
    } else if (kind == "thickness") {
        c.dim = 1;
        c.grid_m = 2048;
        c.frak_a = 0.0;
        c.t_max = 12.0;
        c.t_schedule = {4.0, 8.0, 12.0};
        c.replicas = 50;
    } else if (kind == "badmass") {
        c.dim = 1;
        c.grid_m = 512;
        c.frak_a = 0.0;
        c.gamma = 1.0;
        c.k = 1;
        c.t_max = 7.0;
        c.eps_log_schedule = {7};
        c.delta_log_schedule = {2, 3, 4};
        c.replicas = 3000;
        c.regularization = "truncated";
    } else if (kind == "toy-martingale") {
        c.replicas = 100000;
        c.t_schedule = {5.0, 10.0, 20.0, 50.0};
    } else {
        throw std::invalid_argument("unknown experiment kind '" + kind + "'");
    }
    return c;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("config invariant violated: " + what); };
    if (kind_keys().find(kind) == kind_keys().end()) fail("kind must be one of the experiment kinds");
    if (replicas < 1) fail("replicas must be positive");
    if (threads < 0) fail("threads must be nonnegative");
    if (dim != 1 && dim != 2) fail("dim must be 1 or 2");
    if (!(frak_a >= 0.0 && frak_a <= 1.0)) fail("frak_a must lie in [0,1]");
    if (!(alpha > 0.0)) fail("alpha must be positive");
    if (kernel_resolution < 256) fail("kernel_resolution must be at least 256");
    if (!(delta_u > 0.0 && delta_u <= 0.5)) fail("delta_u must lie in (0, 0.5]");
    const bool uses_grid = (kind == "sample" || kind == "gmc-moments" || kind == "series-check" ||
                            kind == "growth-report" || kind == "thickness" || kind == "badmass");
    if (uses_grid) {
        if (grid_m < 64 || (grid_m & (grid_m - 1)) != 0)
            fail("grid_m must be a power of two, at least 64");
        double steps = t_max / delta_u;
        if (std::abs(steps - std::lround(steps)) > 1e-9) fail("t_max must be a multiple of delta_u");
        if (regularization != "truncated" && regularization != "mollified")
            fail("regularization must be 'truncated' or 'mollified'");
    }
    if (kind == "gmc-moments" || kind == "series-check" || kind == "growth-report" ||
        kind == "badmass") {
        if (eps_log_schedule.empty()) fail("eps_log_schedule must be nonempty");
        for (int n : eps_log_schedule) {
            if (n < 1) fail("eps_log_schedule entries must be positive");
            if (regularization == "mollified" && std::exp(-double(n)) < 4.0 / grid_m)
                fail("every scheduled eps must be at least 4 grid spacings");
            if (regularization == "mollified" && t_max < double(n) + 4.0 - 1e-9)
                fail("t_max must be at least log(1/eps)+4 for mollified regularization");
            if (regularization == "truncated" && t_max < double(n) - 1e-9)
                fail("t_max must cover the finest scheduled scale");
        }
    }
    if (kind == "gmc-moments" || kind == "growth-report" || kind == "badmass") {
        if (!(std::abs(gamma) < std::sqrt(2.0 * dim))) fail("gamma must lie in (-sqrt(2d), sqrt(2d))");
    }
    if (kind == "series-check") {
        if (gamma_schedule.empty()) fail("gamma_schedule must be nonempty");
        for (double g : gamma_schedule)
            if (!(std::abs(g) < std::sqrt(2.0 * dim))) fail("gamma must lie in (-sqrt(2d), sqrt(2d))");
        if (n_gamma_prime < 1) fail("n_gamma_prime must be positive");
        if (!(radius_factor > 0.0 && radius_factor < 1.0)) fail("radius_factor must lie in (0,1)");
        if (!(series_tol > 0.0)) fail("series_tol must be positive");
    }
    if (kind == "growth-report") {
        if (!(eta > 0.0)) fail("eta must be positive");
        if (k_max < 0 || k_max > 12) fail("k_max must lie in [0,12] (desk scale)");
    }
    if (kind == "gmc-moments") {
        if (k_max < 0 || k_max > 12) fail("k_max must lie in [0,12] (desk scale)");
    }
    if (kind == "thickness" || kind == "toy-martingale") {
        if (t_schedule.empty()) fail("t_schedule must be nonempty");
    }
    if (kind == "thickness") {
        for (double t : t_schedule) {
            if (!(t > 0.0)) fail("t_schedule entries must be positive");
            if (t > t_max + 1e-9) fail("t_schedule entries must not exceed t_max");
        }
    }
    if (kind == "toy-martingale") {
        if (replicas < 10000) fail("toy-martingale requires at least 1e4 replicas");
        for (double t : t_schedule)
            if (t < 1.0 || std::abs(t - std::lround(t)) > 1e-12) fail("t_schedule entries must be positive integers");
    }
    if (kind == "badmass") {
        if (delta_log_schedule.empty()) fail("delta_log_schedule must be nonempty");
        if (eps_log_schedule.size() != 1) fail("badmass uses exactly one eps");
        for (int n0 : delta_log_schedule) {
            if (n0 < 1) fail("delta_log_schedule entries must be positive");
            if (n0 >= eps_log_schedule[0]) fail("delta must exceed eps (n0 < N)");
        }
        if (k < 0) fail("k must be nonnegative");
        if (gamma_hat >= 0.0 && !(gamma_hat > gamma)) fail("gamma_hat must exceed gamma");
    }
    if (uses_grid) {
        if (!(f_lo < f_hi) || !(f_width > 0.0) || f_hi - f_lo < 2.0 * f_width)
            fail("test function needs f_lo < f_hi and f_width < (f_hi-f_lo)/2");
    }
}

std::string ExperimentConfig::canonical_json() const {
    const auto& extra = kind_keys().at(kind);
    std::map<std::string, std::string> kv;
    kv["kind"] = quote(kind);
    kv["seed"] = std::to_string(seed);
    kv["replicas"] = std::to_string(replicas);
    kv["threads"] = std::to_string(threads);
    kv["out_dir"] = quote(out_dir);
    auto put_if = [&](const char* key, const std::string& v) {
        if (extra.count(key)) kv[key] = v;
    };
    put_if("dim", std::to_string(dim));
    put_if("frak_a", fmt_double(frak_a));
    put_if("alpha", fmt_double(alpha));
    put_if("grid_m", std::to_string(grid_m));
    put_if("t_max", fmt_double(t_max));
    put_if("delta_u", fmt_double(delta_u));
    put_if("kernel_resolution", std::to_string(kernel_resolution));
    put_if("gamma", fmt_double(gamma));
    put_if("eta", fmt_double(eta));
    put_if("k", std::to_string(k));
    put_if("k_max", std::to_string(k_max));
    put_if("gamma_hat", fmt_double(gamma_hat));
    put_if("series_tol", fmt_double(series_tol));
    put_if("radius_factor", fmt_double(radius_factor));
    put_if("n_gamma_prime", std::to_string(n_gamma_prime));
    put_if("f_lo", fmt_double(f_lo));
    put_if("f_hi", fmt_double(f_hi));
    put_if("f_width", fmt_double(f_width));
    put_if("regularization", quote(regularization));
    auto arr_int = [](const std::vector<int>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(v[i]);
        }
        return s + "]";
    };
    auto arr_d = [](const std::vector<double>& v) {
        std::string s = "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ",";
            s += fmt_double(v[i]);
        }
        return s + "]";
    };
    put_if("eps_log_schedule", arr_int(eps_log_schedule));
    put_if("delta_log_schedule", arr_int(delta_log_schedule));
    put_if("t_schedule", arr_d(t_schedule));
    put_if("gamma_schedule", arr_d(gamma_schedule));

    std::string out = "{";
    bool first = true;
    for (const auto& [key, val] : kv) {
        if (!first) out += ",";
        first = false;
        out += quote(key) + ":" + val;
    }
    return out + "}";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw std::invalid_argument("config invariant violated: kind must be a string");
    std::string kind = j["kind"].get<std::string>();
    auto it = kind_keys().find(kind);
    if (it == kind_keys().end())
        throw std::invalid_argument("unknown experiment kind '" + kind + "'");
    ExperimentConfig c = defaults(kind);
    for (const auto& [key, val] : j.items()) {
        if (!common_keys.count(key) && !it->second.count(key))
            throw std::invalid_argument("unknown config key '" + key + "' for kind '" + kind + "'");
        try {
            if (key == "kind") continue;
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "replicas") c.replicas = val.get<long>();
            else if (key == "threads") c.threads = val.get<int>();
            else if (key == "out_dir") c.out_dir = val.get<std::string>();
            else if (key == "dim") c.dim = val.get<int>();
            else if (key == "frak_a") c.frak_a = val.get<double>();
            else if (key == "alpha") c.alpha = val.get<double>();
            else if (key == "grid_m") c.grid_m = val.get<int>();
            else if (key == "t_max") c.t_max = val.get<double>();
            else if (key == "delta_u") c.delta_u = val.get<double>();
            else if (key == "kernel_resolution") c.kernel_resolution = val.get<int>();
            else if (key == "gamma") c.gamma = val.get<double>();
            else if (key == "eta") c.eta = val.get<double>();
            else if (key == "k") c.k = val.get<int>();
            else if (key == "k_max") c.k_max = val.get<int>();
            else if (key == "gamma_hat") c.gamma_hat = val.get<double>();
            else if (key == "series_tol") c.series_tol = val.get<double>();
            else if (key == "radius_factor") c.radius_factor = val.get<double>();
            else if (key == "n_gamma_prime") c.n_gamma_prime = val.get<int>();
            else if (key == "f_lo") c.f_lo = val.get<double>();
            else if (key == "f_hi") c.f_hi = val.get<double>();
            else if (key == "f_width") c.f_width = val.get<double>();
            else if (key == "regularization") c.regularization = val.get<std::string>();
            else if (key == "eps_log_schedule") c.eps_log_schedule = val.get<std::vector<int>>();
            else if (key == "delta_log_schedule") c.delta_log_schedule = val.get<std::vector<int>>();
            else if (key == "t_schedule") c.t_schedule = val.get<std::vector<double>>();
            else if (key == "gamma_schedule") c.gamma_schedule = val.get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("config key '" + key + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace gmclab
