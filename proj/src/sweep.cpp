#include "imsmc/sweep.hpp"

#include <future>

namespace imsmc {

std::vector<std::string> split_values(const std::string& list) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : list) {
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    for (auto& v : out) {
        const auto a = v.find_first_not_of(" \t");
        const auto b = v.find_last_not_of(" \t");
        v = a == std::string::npos ? std::string{} : v.substr(a, b - a + 1);
    }
    return out;
}

namespace {

std::pair<std::string, std::string> resolve_param(const ConfigDocument& doc, const std::string& param) {
    const auto dot = param.find('.');
    if (dot != std::string::npos) {
        return {param.substr(0, dot), param.substr(dot + 1)};
    }
    static const std::vector<std::pair<std::string, std::vector<std::string>>> owners = {
        {"controller", {"type", "mu0", "xi_t", "delta_bar", "N", "mu0_init", "g", "g_init", "compensator_mode"}},
        {"plant", {"a_tilde", "b_tilde", "d", "e", "delta", "disturbance_window", "disturbance_vector",
                   "disturbance_table"}},
        {"solver", {"max_iter", "tol_residual", "tol_step", "lambda_init", "lambda_up", "lambda_down",
                    "accept_residual", "mu0_min", "mu0_max"}},
        {"run", {"x0", "horizon", "seed"}},
        {"output", {"c", "y_d"}},
        {"metrics", {"settle_eps", "hold"}},
        {"experiment", {"name"}},
    };
    for (const auto& [section, keys] : owners) {
        for (const auto& k : keys) {
            if (k == param) return {section, k};
        }
    }
    throw ConfigError(doc.source + ": unknown sweep parameter '" + param + "'");
}

}  // namespace

std::vector<SweepPoint> run_sweep(const ConfigDocument& base, const std::string& param,
                                  const std::vector<std::string>& values) {
    if (values.empty()) {
        throw ConfigError("sweep: no values given");
    }
    const auto [section, key] = resolve_param(base, param);
    std::vector<SweepPoint> points(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        ConfigDocument doc = base;
        const ConfigDocument lit = parse_config_document("[" + section + "]\n" + key + " = " + values[i],
                                                         "--values[" + std::to_string(i) + "]");
        doc.set(section, key, lit.find(section, key)->value);
        points[i].value = values[i];
        points[i].config = config_from_document(doc);
    }
    std::vector<std::future<void>> jobs;
    jobs.reserve(points.size());
    for (auto& p : points) {
        jobs.push_back(std::async(std::launch::async, [&p] {
            try {
                p.log = run_experiment(p.config);
                p.metrics = compute_metrics(p.log, p.config);
            } catch (const std::exception& e) {
                p.error = e.what();
            }
        }));
    }
    for (auto& j : jobs) j.get();
    return points;
}

}  // namespace imsmc
