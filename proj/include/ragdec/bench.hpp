#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragdec/decoder.hpp"
#include "ragdec/synth.hpp"

namespace ragdec {

inline constexpr const char* kArtifactVersion = "0.1.0";

enum class Metric { ExactMatch, NumericRelaxed };

/// A full experiment: synthetic world parameters, KB tiers (distractor count
/// per tier), methods under comparison, decoding configuration, and the seed.
/// Everything except wall-clock readings is a pure function of this spec.
struct ExperimentSpec {
    SyntheticWorldSpec world;
    std::vector<int> tier_distractors = {14, 974, 16334};  // KB sizes 64/1024/16384
    std::vector<Method> methods = {Method::Unconditional, Method::Rag,    Method::Scd,
                                   Method::Consistency,   Method::Concat, Method::MaxProbability,
                                   Method::Rmcd};
    DecoderConfig config;
    std::vector<int> n_sweep;  // context-count sweep values; empty = no sweep
    uint64_t seed = 42;
    Metric metric = Metric::ExactMatch;

    void validate() const;  // throws SpecError
};

/// Oracle-retriever preset: a single distractor-laden KB whose distractors
/// never mention real entities, so the misleading content is co-retrieved
/// purely through the context window rather than through score ties.
ExperimentSpec default_oracle_spec();

struct MethodRow {
    std::string name;
    double accuracy = 0.0;
    double fwd_per_token = 0.0;
    double lat_med_ms = 0.0;
    double lat_p95_ms = 0.0;
};

struct TierRow {
    size_t kb_size = 0;
    int n_label = -1;  // >= 0 for context-sweep rows
    double recall1 = 0.0;
    double recall3 = 0.0;
    double recall5 = 0.0;
    std::vector<MethodRow> methods;
};

struct ReportRecord {
    std::string kind;  // bench | oracle | ablation | sweep
    uint64_t seed = 0;
    nlohmann::ordered_json spec_echo;
    std::vector<TierRow> tiers;
    std::string version = kArtifactVersion;
};

/// KB-size robustness protocol: per tier, synthesize the (nested) world,
/// retrieve, run every method, and score exact-match accuracy plus
/// recall@{1,3,5} and per-token decoding cost.
ReportRecord run_benchmark(const ExperimentSpec& spec);

/// Context-count sweep on a single world: one row per n in spec.n_sweep.
ReportRecord run_context_sweep(const ExperimentSpec& spec);

/// Perfect-retriever protocol: the oracle is injected into every query's
/// retrieval set before decoding.
ReportRecord run_oracle_experiment(const ExperimentSpec& spec);

/// Full RMCD plus each single-switch variant on one world. Retrieval is
/// shared, so recall columns are identical across the nine rows:
/// full, no_deflection, best_context, all_contexts, uniform_weight,
/// absolute_weight, empty_exclude, empty_mean, no_constraint.
ReportRecord run_ablation_suite(const ExperimentSpec& spec);

std::vector<std::string> ablation_variant_names();

enum class ReportFormat { Json, Csv };

nlohmann::ordered_json report_to_json(const ReportRecord& report);
/// Fixed header: kb_size,method,accuracy,recall1,recall3,recall5,fwd_per_tok,lat_med,lat_p95
std::string report_to_csv(const ReportRecord& report);
ReportRecord report_from_json(const nlohmann::ordered_json& j);

void emit_report(const ReportRecord& report, ReportFormat format,
                 const std::filesystem::path& path);

/// Answer scoring: exact match after normalization, optionally relaxed to a
/// +-10% band when both sides parse as numbers.
bool answer_matches(const std::string& answer, const std::vector<std::string>& golds,
                    Metric metric);

nlohmann::ordered_json spec_to_json(const ExperimentSpec& spec);

}  // namespace ragdec
