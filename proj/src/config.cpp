#include "imsmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace imsmc {

using nlohmann::json;

const ConfigDocument::Entry* ConfigDocument::find(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) {
        return nullptr;
    }
    for (const auto& [k, entry] : it->second) {
        if (k == key) {
            return &entry;
        }
    }
    return nullptr;
}

void ConfigDocument::set(const std::string& section, const std::string& key, json value) {
    if (!sections.count(section)) {
        section_order.push_back(section);
    }
    auto& entries = sections[section];
    for (auto& [k, entry] : entries) {
        if (k == key) {
            entry.value = std::move(value);
            return;
        }
    }
    entries.emplace_back(key, Entry{std::move(value), 0});
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted) {
            return line.substr(0, i);
        }
    }
    return line;
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

int bracket_depth(const std::string& s) {
    int depth = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) {
            quoted = !quoted;
        } else if (!quoted && s[i] == '[') {
            ++depth;
        } else if (!quoted && s[i] == ']') {
            --depth;
        }
    }
    return depth;
}

std::string where(const std::string& source, int line, const std::string& section, const std::string& key) {
    std::ostringstream os;
    os << source;
    if (line > 0) {
        os << ":" << line;
    }
    os << ": [" << section << "]";
    if (!key.empty()) {
        os << " " << key;
    }
    return os.str();
}

}  // namespace

ConfigDocument parse_config_document(const std::string& text, const std::string& source) {
    ConfigDocument doc;
    doc.source = source;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
            section = trim(line.substr(1, line.size() - 2));
            if (!is_identifier(section)) {
                throw ConfigError(source + ":" + std::to_string(line_no) + ": invalid section name '" + section + "'");
            }
            if (!doc.sections.count(section)) {
                doc.section_order.push_back(section);
                doc.sections[section];
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' outside of a section");
        }
        if (!is_identifier(key)) {
            throw ConfigError(where(source, line_no, section, key) + ": invalid key name");
        }
        const int start_line = line_no;
        // Array literals may continue over several lines.
        while (bracket_depth(value) > 0 && std::getline(in, raw)) {
            ++line_no;
            value += " " + trim(strip_comment(raw));
        }
        if (doc.find(section, key)) {
            throw ConfigError(where(source, start_line, section, key) + ": duplicate key");
        }
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            if (!is_identifier(value)) {
                throw ConfigError(where(source, start_line, section, key) + ": cannot parse value '" + value + "'");
            }
            parsed = value;
        }
        doc.sections[section].emplace_back(key, ConfigDocument::Entry{parsed, start_line});
    }
    return doc;
}

std::string to_string(ControllerKind kind) {
    return kind == ControllerKind::robust ? "robust" : "imsmc";
}

namespace {

class Reader {
  public:
    explicit Reader(const ConfigDocument& doc) : doc_(doc) {
        static const std::map<std::string, std::set<std::string>> known = {
            {"experiment", {"name"}},
            {"plant",
             {"a_tilde", "b_tilde", "d", "e", "delta", "disturbance_window", "disturbance_vector",
              "disturbance_table"}},
            {"controller", {"type", "mu0", "xi_t", "delta_bar", "N", "mu0_init", "g", "g_init", "compensator_mode"}},
            {"solver",
             {"max_iter", "tol_residual", "tol_step", "lambda_init", "lambda_up", "lambda_down", "accept_residual",
              "mu0_min", "mu0_max"}},
            {"run", {"x0", "horizon", "seed"}},
            {"output", {"c", "y_d"}},
            {"metrics", {"settle_eps", "hold"}},
        };
        for (const auto& [name, entries] : doc.sections) {
            auto it = known.find(name);
            if (it == known.end()) {
                throw ConfigError(doc.source + ": unknown section [" + name + "]");
            }
            for (const auto& [key, entry] : entries) {
                if (!it->second.count(key)) {
                    throw ConfigError(where(doc.source, entry.line, name, key) + ": unknown key");
                }
            }
        }
    }

    bool has(const std::string& s, const std::string& k) const { return doc_.find(s, k) != nullptr; }

    [[noreturn]] void fail(const std::string& s, const std::string& k, const std::string& msg) const {
        const auto* e = doc_.find(s, k);
        throw ConfigError(where(doc_.source, e ? e->line : 0, s, k) + ": " + msg);
    }

    const json& require(const std::string& s, const std::string& k) const {
        const auto* e = doc_.find(s, k);
        if (!e) {
            throw ConfigError(where(doc_.source, 0, s, k) + ": missing required key");
        }
        return e->value;
    }

    double number(const std::string& s, const std::string& k) const {
        const json& v = require(s, k);
        if (!v.is_number()) {
            fail(s, k, "expected a number");
        }
        return v.get<double>();
    }

    long integer(const std::string& s, const std::string& k) const {
        const json& v = require(s, k);
        if (!v.is_number_integer()) {
            fail(s, k, "expected an integer");
        }
        return v.get<long>();
    }

    std::uint64_t unsigned_integer(const std::string& s, const std::string& k) const {
        const json& v = require(s, k);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
            fail(s, k, "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& s, const std::string& k) const {
        const json& v = require(s, k);
        if (!v.is_string()) {
            fail(s, k, "expected a string");
        }
        return v.get<std::string>();
    }

    Vector vector(const std::string& s, const std::string& k) const { return to_vector(require(s, k), s, k); }

    Vector to_vector(const json& v, const std::string& s, const std::string& k) const {
        if (v.is_number()) {
            return Vector::Constant(1, v.get<double>());
        }
        if (!v.is_array()) {
            fail(s, k, "expected a flat numeric array");
        }
        Vector out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(s, k, "expected a flat numeric array");
            }
            out(static_cast<Index>(i)) = v[i].get<double>();
        }
        return out;
    }

    Matrix matrix(const std::string& s, const std::string& k) const {
        const json& v = require(s, k);
        if (v.is_number()) {
            return Matrix::Constant(1, 1, v.get<double>());
        }
        if (!v.is_array() || v.empty() || !v[0].is_array()) {
            fail(s, k, "expected a matrix literal [[row], [row], ...]");
        }
        const std::size_t cols = v[0].size();
        Matrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_array() || v[i].size() != cols) {
                fail(s, k, "matrix rows must all have " + std::to_string(cols) + " entries");
            }
            for (std::size_t j = 0; j < cols; ++j) {
                if (!v[i][j].is_number()) {
                    fail(s, k, "matrix entries must be numbers");
                }
                out(static_cast<Index>(i), static_cast<Index>(j)) = v[i][j].get<double>();
            }
        }
        return out;
    }

    const ConfigDocument& doc() const { return doc_; }

  private:
    const ConfigDocument& doc_;
};

json to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(row);
    }
    return rows;
}

json to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        arr.push_back(v(i));
    }
    return arr;
}

}  // namespace

ExperimentConfig config_from_document(const ConfigDocument& doc) {
    Reader r(doc);
    ExperimentConfig cfg;
    if (r.has("experiment", "name")) {
        cfg.name = r.string("experiment", "name");
    }

    cfg.plant.a_tilde = r.matrix("plant", "a_tilde");
    cfg.plant.b_tilde = r.matrix("plant", "b_tilde");
    const Index n = cfg.plant.a_tilde.rows();
    cfg.plant.d = r.has("plant", "d") ? r.matrix("plant", "d") : Matrix::Zero(n, 1);
    cfg.plant.e = r.has("plant", "e") ? r.matrix("plant", "e") : Matrix::Zero(1, n);
    cfg.plant.delta = r.has("plant", "delta") ? r.matrix("plant", "delta")
                                              : Matrix::Zero(cfg.plant.d.cols(), cfg.plant.e.rows());
    if (r.has("plant", "disturbance_window") != r.has("plant", "disturbance_vector")) {
        r.fail("plant", r.has("plant", "disturbance_window") ? "disturbance_vector" : "disturbance_window",
               "disturbance_window and disturbance_vector must be given together");
    }
    if (r.has("plant", "disturbance_window")) {
        const Vector w = r.vector("plant", "disturbance_window");
        if (w.size() != 2 || w(0) != std::floor(w(0)) || w(1) != std::floor(w(1))) {
            r.fail("plant", "disturbance_window", "expected [k_on, k_off] integers");
        }
        cfg.plant.disturbance.window =
            DisturbanceSchedule::Window{static_cast<StepIndex>(w(0)), static_cast<StepIndex>(w(1)),
                                        r.vector("plant", "disturbance_vector")};
    }
    if (r.has("plant", "disturbance_table")) {
        const json& t = r.require("plant", "disturbance_table");
        if (!t.is_array()) {
            r.fail("plant", "disturbance_table", "expected [[k, [f...]], ...]");
        }
        for (const auto& item : t) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number_integer()) {
                r.fail("plant", "disturbance_table", "expected [[k, [f...]], ...]");
            }
            const auto k = item[0].get<StepIndex>();
            if (cfg.plant.disturbance.table.count(k)) {
                r.fail("plant", "disturbance_table", "duplicate step " + std::to_string(k));
            }
            cfg.plant.disturbance.table[k] = r.to_vector(item[1], "plant", "disturbance_table");
        }
    }

    if (r.has("controller", "type")) {
        const std::string type = r.string("controller", "type");
        if (type == "robust") {
            cfg.controller = ControllerKind::robust;
        } else if (type == "imsmc") {
            cfg.controller = ControllerKind::imsmc;
        } else {
            r.fail("controller", "type", "expected robust | imsmc");
        }
    }
    if (r.has("controller", "mu0")) cfg.reaching.mu0 = r.number("controller", "mu0");
    if (r.has("controller", "xi_t")) cfg.reaching.xi_t = r.number("controller", "xi_t");
    if (r.has("controller", "delta_bar")) cfg.reaching.delta_bar = r.number("controller", "delta_bar");
    if (r.has("controller", "N")) cfg.window = r.integer("controller", "N");
    if (r.has("controller", "mu0_init")) cfg.mu0_init = r.number("controller", "mu0_init");
    if (r.has("controller", "g")) cfg.g = r.matrix("controller", "g");
    if (r.has("controller", "g_init")) cfg.g_init = r.matrix("controller", "g_init");
    if (r.has("controller", "compensator_mode")) {
        try {
            cfg.compensator_mode = compensator_mode_from_string(r.string("controller", "compensator_mode"));
        } catch (const std::invalid_argument& e) {
            r.fail("controller", "compensator_mode", e.what());
        }
    }

    auto& lm = cfg.solve.lm;
    if (r.has("solver", "max_iter")) lm.max_iter = static_cast<int>(r.integer("solver", "max_iter"));
    if (r.has("solver", "tol_residual")) lm.tol_residual = r.number("solver", "tol_residual");
    if (r.has("solver", "tol_step")) lm.tol_step = r.number("solver", "tol_step");
    if (r.has("solver", "lambda_init")) lm.lambda_init = r.number("solver", "lambda_init");
    if (r.has("solver", "lambda_up")) lm.lambda_up = r.number("solver", "lambda_up");
    if (r.has("solver", "lambda_down")) lm.lambda_down = r.number("solver", "lambda_down");
    if (r.has("solver", "accept_residual")) cfg.solve.accept_residual = r.number("solver", "accept_residual");
    if (r.has("solver", "mu0_min")) cfg.solve.mu0_min = r.number("solver", "mu0_min");
    if (r.has("solver", "mu0_max")) cfg.solve.mu0_max = r.number("solver", "mu0_max");

    cfg.x0 = r.vector("run", "x0");
    if (r.has("run", "horizon")) cfg.horizon = r.integer("run", "horizon");
    if (r.has("run", "seed")) cfg.seed = r.unsigned_integer("run", "seed");

    if (r.has("output", "c")) cfg.output_c = r.matrix("output", "c");
    if (r.has("output", "y_d")) cfg.y_d = r.vector("output", "y_d");

    if (r.has("metrics", "settle_eps")) cfg.settle_eps = r.number("metrics", "settle_eps");
    if (r.has("metrics", "hold")) cfg.hold = static_cast<int>(r.integer("metrics", "hold"));

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(doc.source + ": " + e.what());
    }
    return cfg;
}

void ExperimentConfig::validate() const {
    try {
        plant.validate();
    } catch (const PlantError& e) {
        throw ConfigError(std::string("[plant]: ") + e.what());
    }
    const Index n = plant.state_dim();
    const Index nu = plant.input_dim();
    if (x0.size() != n) {
        throw ConfigError("[run] x0: expected length " + std::to_string(n));
    }
    if (horizon < 1) {
        throw ConfigError("[run] horizon: must be at least 1");
    }
    try {
        reaching.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[controller]: ") + e.what());
    }
    if (!(std::sqrt(static_cast<double>(nu)) * reaching.xi_t > reaching.delta_bar)) {
        throw ConfigError("[controller] delta_bar: band undefined unless sqrt(n_u) * xi_t > delta_bar");
    }
    if (mu0_init && !(*mu0_init > 0.0 && *mu0_init < 1.0)) {
        throw ConfigError("[controller] mu0_init: must lie in (0, 1)");
    }
    if (window < 1) {
        throw ConfigError("[controller] N: must be at least 1");
    }
    for (const auto* gain : {&g, &g_init}) {
        if (*gain && ((*gain)->rows() != nu || (*gain)->cols() != n - nu)) {
            throw ConfigError(std::string("[controller] ") + (gain == &g ? "g" : "g_init") + ": expected " +
                              std::to_string(nu) + "x" + std::to_string(n - nu));
        }
    }
    try {
        solve.lm.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[solver]: ") + e.what());
    }
    if (!(solve.mu0_min > 0.0 && solve.mu0_min < solve.mu0_max && solve.mu0_max < 1.0)) {
        throw ConfigError("[solver]: need 0 < mu0_min < mu0_max < 1");
    }
    if (!(solve.accept_residual > 0.0)) {
        throw ConfigError("[solver] accept_residual: must be positive");
    }
    if (output_c && output_c->cols() != n) {
        throw ConfigError("[output] c: expected " + std::to_string(n) + " columns");
    }
    if (y_d.size() != 0 && (!output_c || y_d.size() != output_c->rows())) {
        throw ConfigError("[output] y_d: length must match the rows of c");
    }
    if (settle_eps && !(*settle_eps >= 0.0)) {
        throw ConfigError("[metrics] settle_eps: must be non-negative");
    }
    if (hold < 0) {
        throw ConfigError("[metrics] hold: must be non-negative");
    }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    return config_from_document(parse_config_document(text, source));
}

ConfigDocument load_config_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(path + ": cannot open configuration file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_document(buf.str(), path);
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_document(load_config_document(path));
}

std::string write_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    const auto kv = [&os](const std::string& key, const json& value) { os << key << " = " << value.dump() << "\n"; };

    os << "[experiment]\n";
    kv("name", cfg.name);

    os << "\n[plant]\n";
    kv("a_tilde", to_json(cfg.plant.a_tilde));
    kv("b_tilde", to_json(cfg.plant.b_tilde));
    kv("d", to_json(cfg.plant.d));
    kv("e", to_json(cfg.plant.e));
    kv("delta", to_json(cfg.plant.delta));
    if (const auto& w = cfg.plant.disturbance.window) {
        kv("disturbance_window", json::array({w->k_on, w->k_off}));
        kv("disturbance_vector", to_json(w->value));
    }
    if (!cfg.plant.disturbance.table.empty()) {
        json table = json::array();
        for (const auto& [k, f] : cfg.plant.disturbance.table) {
            table.push_back(json::array({k, to_json(f)}));
        }
        kv("disturbance_table", table);
    }

    os << "\n[controller]\n";
    kv("type", to_string(cfg.controller));
    kv("mu0", cfg.reaching.mu0);
    kv("xi_t", cfg.reaching.xi_t);
    kv("delta_bar", cfg.reaching.delta_bar);
    kv("N", cfg.window);
    if (cfg.mu0_init) kv("mu0_init", *cfg.mu0_init);
    if (cfg.g) kv("g", to_json(*cfg.g));
    if (cfg.g_init) kv("g_init", to_json(*cfg.g_init));
    kv("compensator_mode", to_string(cfg.compensator_mode));

    os << "\n[solver]\n";
    kv("max_iter", cfg.solve.lm.max_iter);
    kv("tol_residual", cfg.solve.lm.tol_residual);
    kv("tol_step", cfg.solve.lm.tol_step);
    kv("lambda_init", cfg.solve.lm.lambda_init);
    kv("lambda_up", cfg.solve.lm.lambda_up);
    kv("lambda_down", cfg.solve.lm.lambda_down);
    kv("accept_residual", cfg.solve.accept_residual);
    kv("mu0_min", cfg.solve.mu0_min);
    kv("mu0_max", cfg.solve.mu0_max);

    os << "\n[run]\n";
    kv("x0", to_json(cfg.x0));
    kv("horizon", cfg.horizon);
    kv("seed", cfg.seed);

    if (cfg.output_c) {
        os << "\n[output]\n";
        kv("c", to_json(*cfg.output_c));
        if (cfg.y_d.size() != 0) kv("y_d", to_json(cfg.y_d));
    }

    os << "\n[metrics]\n";
    if (cfg.settle_eps) kv("settle_eps", *cfg.settle_eps);
    kv("hold", cfg.hold);
    return os.str();
}

}  // namespace imsmc
