#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "imsmc/controller.hpp"

namespace imsmc {

// Raised for malformed configuration; the message carries "source:line" and
// the offending [section] key.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Sectioned key = value text. Values are JSON literals (numbers, booleans,
// quoted strings, nested arrays); a bare identifier is read as a string.
// '#' starts a comment outside of quoted strings.
struct ConfigDocument {
    struct Entry {
        nlohmann::json value;
        int line = 0;
    };
    std::string source;
    // section -> key -> entry; sections and keys kept in first-seen order
    std::vector<std::string> section_order;
    std::map<std::string, std::vector<std::pair<std::string, Entry>>> sections;

    const Entry* find(const std::string& section, const std::string& key) const;
    // Replaces or inserts; used by sweeps.
    void set(const std::string& section, const std::string& key, nlohmann::json value);
};

ConfigDocument parse_config_document(const std::string& text, const std::string& source = "<config>");

enum class ControllerKind { robust, imsmc };

std::string to_string(ControllerKind kind);

struct ExperimentConfig {
    std::string name = "experiment";
    Plant plant;

    ControllerKind controller = ControllerKind::imsmc;
    ReachingParams reaching{};
    Index window = 2;
    std::optional<double> mu0_init;
    // Static gain for the robust law and initial gain for the co-design;
    // designed through the LMI when absent.
    std::optional<Matrix> g;
    std::optional<Matrix> g_init;
    CompensatorMode compensator_mode = CompensatorMode::one_step;
    CoDesignOptions solve{};

    Vector x0;
    long horizon = 150;
    std::uint64_t seed = 1;

    std::optional<Matrix> output_c;
    Vector y_d;

    std::optional<double> settle_eps;
    int hold = 20;

    // Cross-field consistency; throws ConfigError.
    void validate() const;
};

ExperimentConfig config_from_document(const ConfigDocument& doc);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
ConfigDocument load_config_document(const std::string& path);

// Canonical text form; parse_config(write_config(c)) reproduces c exactly.
std::string write_config(const ExperimentConfig& cfg);

}  // namespace imsmc
