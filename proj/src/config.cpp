#include "ragdec/config.hpp"

#include <fstream>

#include "ragdec/errors.hpp"
#include "ragdec/text.hpp"

namespace ragdec {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SpecError("config key " + key + ": not a number: " + value);
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SpecError("config key " + key + ": not an integer: " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw SpecError("config key " + key + ": not a boolean: " + value);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::map<std::string, std::string> pairs;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        pairs[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return pairs;
}

void apply_config(DecoderConfig& config, const std::map<std::string, std::string>& pairs) {
    for (const auto& [key, value] : pairs) {
        if (key == "tau1") config.tau1 = parse_double(key, value);
        else if (key == "tau2") config.tau2 = parse_double(key, value);
        else if (key == "gamma") config.gamma = parse_double(key, value);
        else if (key == "max_weight") config.max_weight = parse_double(key, value);
        else if (key == "min_weight") config.min_weight = parse_double(key, value);
        else if (key == "beta") config.beta = parse_double(key, value);
        else if (key == "n_contexts") config.n_contexts = parse_int(key, value);
        else if (key == "scd_alpha1") config.scd_alpha1 = parse_double(key, value);
        else if (key == "scd_alpha2") config.scd_alpha2 = parse_double(key, value);
        else if (key == "method") config.method = parse_method(value);
        else if (key == "empty_context_mode") config.empty_context_mode = parse_empty_context_mode(value);
        else if (key == "deflection_enabled") config.deflection_enabled = parse_bool(key, value);
        else if (key == "constraint_mode") config.constraint_mode = parse_constraint_mode(value);
        else if (key == "weight_scheme") config.weight_scheme = parse_weight_scheme(value);
        else if (key == "sampling") config.sampling = parse_sampling_mode(value);
        else if (key == "top_p") config.top_p = parse_double(key, value);
        else if (key == "max_new_tokens") config.max_new_tokens = parse_int(key, value);
        else throw SpecError("unknown config key: " + key);
    }
    config.validate();
}

std::string empty_context_mode_name(EmptyContextMode mode) {
    switch (mode) {
        case EmptyContextMode::NegInf: return "neginf";
        case EmptyContextMode::Mean: return "mean";
        case EmptyContextMode::Exclude: return "exclude";
    }
    throw ContractViolation("unknown empty-context mode");
}

EmptyContextMode parse_empty_context_mode(const std::string& name) {
    if (name == "neginf") return EmptyContextMode::NegInf;
    if (name == "mean") return EmptyContextMode::Mean;
    if (name == "exclude") return EmptyContextMode::Exclude;
    throw SpecError("unknown empty_context_mode: " + name);
}

std::string constraint_mode_name(ConstraintMode mode) {
    switch (mode) {
        case ConstraintMode::Threshold: return "threshold";
        case ConstraintMode::BestContext: return "best_context";
        case ConstraintMode::AllContexts: return "all_contexts";
        case ConstraintMode::Disabled: return "disabled";
    }
    throw ContractViolation("unknown constraint mode");
}

ConstraintMode parse_constraint_mode(const std::string& name) {
    if (name == "threshold") return ConstraintMode::Threshold;
    if (name == "best_context") return ConstraintMode::BestContext;
    if (name == "all_contexts") return ConstraintMode::AllContexts;
    if (name == "disabled") return ConstraintMode::Disabled;
    throw SpecError("unknown constraint_mode: " + name);
}

std::string weight_scheme_name(WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::Relative: return "relative";
        case WeightScheme::Absolute: return "absolute";
        case WeightScheme::Uniform: return "uniform";
    }
    throw ContractViolation("unknown weight scheme");
}

WeightScheme parse_weight_scheme(const std::string& name) {
    if (name == "relative") return WeightScheme::Relative;
    if (name == "absolute") return WeightScheme::Absolute;
    if (name == "uniform") return WeightScheme::Uniform;
    throw SpecError("unknown weight_scheme: " + name);
}

std::string sampling_mode_name(SamplingMode mode) {
    switch (mode) {
        case SamplingMode::Greedy: return "greedy";
        case SamplingMode::Nucleus: return "nucleus";
    }
    throw ContractViolation("unknown sampling mode");
}

SamplingMode parse_sampling_mode(const std::string& name) {
    if (name == "greedy") return SamplingMode::Greedy;
    if (name == "nucleus") return SamplingMode::Nucleus;
    throw SpecError("unknown sampling mode: " + name);
}

}  // namespace ragdec
