#include "ragdec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ragdec/config.hpp"
#include "ragdec/errors.hpp"
#include "ragdec/text.hpp"

namespace ragdec {

using nlohmann::ordered_json;

void ExperimentSpec::validate() const {
    world.validate();
    config.validate();
    if (tier_distractors.empty()) throw SpecError("at least one KB tier is required");
    for (size_t i = 0; i < tier_distractors.size(); ++i) {
        if (tier_distractors[i] < 0) throw SpecError("tier distractor counts must be >= 0");
        if (i > 0 && tier_distractors[i] <= tier_distractors[i - 1]) {
            throw SpecError("KB tiers must be strictly increasing");
        }
    }
    if (methods.empty()) throw SpecError("at least one method is required");
    for (int n : n_sweep) {
        if (n < 1) throw SpecError("sweep n values must be >= 1");
    }
}

ExperimentSpec default_oracle_spec() {
    ExperimentSpec spec;
    spec.world.mention_rate = 0.0;
    spec.world.num_distractor_docs = 974;
    spec.tier_distractors = {974};
    return spec;
}

bool answer_matches(const std::string& answer, const std::vector<std::string>& golds,
                    Metric metric) {
    const std::string a = normalize_answer(answer);
    for (const auto& g : golds) {
        if (a == normalize_answer(g)) return true;
    }
    if (metric == Metric::NumericRelaxed) {
        auto as_number = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size()) return std::nullopt;
            return v;
        };
        const auto av = as_number(a);
        if (av) {
            for (const auto& g : golds) {
                const auto gv = as_number(normalize_answer(g));
                if (gv && std::abs(*av - *gv) <= 0.1 * std::abs(*gv)) return true;
            }
        }
    }
    return false;
}

namespace {

double round4(double v) { return std::round(v * 10000.0) / 10000.0; }

double percentile(std::vector<double>& values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const size_t rank = static_cast<size_t>(
        std::ceil(p * static_cast<double>(values.size())));
    return values[std::max<size_t>(rank, 1) - 1];
}

struct MethodJob {
    std::string label;
    Method method;
    DecoderConfig config;
};

/// Shared tier runner: retrieval once, then every job over every query.
TierRow evaluate_tier(const SyntheticWorld& world, const LogitBackend& backend,
                      const std::vector<MethodJob>& jobs, uint64_t seed, Metric metric,
                      bool inject_oracles) {
    int retrieve_k = 5;
    for (const auto& job : jobs) retrieve_k = std::max(retrieve_k, job.config.n_contexts);

    std::vector<RetrievedContextSet> retrievals;
    retrievals.reserve(world.queries.size());
    for (const auto& q : world.queries) {
        RetrievedContextSet set = retrieve(world.kb, q.question, retrieve_k);
        if (inject_oracles) {
            const size_t idx = world.kb.find(q.oracle_doc_id);
            if (idx == KnowledgeBase::npos) {
                throw SpecError("oracle document missing: " + q.oracle_doc_id);
            }
            const Document& doc = world.kb.doc(idx);
            ScoredContext oracle{doc.id, doc.title + "\n" + doc.text,
                                 bm25_score_idx(q.question, idx, world.kb)};
            set = inject_oracle(set, std::move(oracle));
        }
        retrievals.push_back(std::move(set));
    }

    TierRow row;
    row.kb_size = world.kb.size();
    row.recall1 = recall_at_k(retrievals, world.queries, 1);
    row.recall3 = recall_at_k(retrievals, world.queries, 3);
    row.recall5 = recall_at_k(retrievals, world.queries, 5);

    for (const auto& job : jobs) {
        size_t correct = 0;
        uint64_t calls = 0;
        uint64_t tokens = 0;
        std::vector<double> latencies;
        latencies.reserve(world.queries.size());
        for (size_t i = 0; i < world.queries.size(); ++i) {
            const auto& q = world.queries[i];
            Rng rng = derive_rng(seed, job.label + "/" + q.qid);
            const auto start = std::chrono::steady_clock::now();
            const QueryOutcome outcome =
                run_query(job.method, backend, q.question, retrievals[i], job.config, rng);
            const auto stop = std::chrono::steady_clock::now();
            latencies.push_back(
                std::chrono::duration<double, std::milli>(stop - start).count());
            if (answer_matches(outcome.answer, q.answers, metric)) ++correct;
            calls += outcome.forward_calls;
            tokens += outcome.tokens;
        }
        MethodRow mr;
        mr.name = job.label;
        mr.accuracy = world.queries.empty()
                          ? 0.0
                          : static_cast<double>(correct) /
                                static_cast<double>(world.queries.size());
        mr.fwd_per_token =
            tokens == 0 ? 0.0 : static_cast<double>(calls) / static_cast<double>(tokens);
        mr.lat_med_ms = percentile(latencies, 0.50);
        mr.lat_p95_ms = percentile(latencies, 0.95);
        row.methods.push_back(std::move(mr));
    }
    return row;
}

SyntheticWorld build_world(const ExperimentSpec& spec, int distractors) {
    SyntheticWorldSpec ws = spec.world;
    ws.num_distractor_docs = distractors;
    return synthesize_world(ws, spec.seed);
}

GroundedBackend build_backend(const SyntheticWorld& world, uint64_t seed) {
    return GroundedBackend(GroundedWorldModel::from_corpus(
        world.kb, world.queries, /*kappa=*/10.0, /*prior_temperature=*/1.0, seed));
}

std::vector<MethodJob> method_jobs(const ExperimentSpec& spec) {
    std::vector<MethodJob> jobs;
    for (Method m : spec.methods) {
        DecoderConfig cfg = spec.config;
        cfg.method = m;
        jobs.push_back(MethodJob{method_name(m), m, cfg});
    }
    return jobs;
}

}  // namespace

ReportRecord run_benchmark(const ExperimentSpec& spec) {
    spec.validate();
    ReportRecord report;
    report.kind = "bench";
    report.seed = spec.seed;
    report.spec_echo = spec_to_json(spec);
    for (int distractors : spec.tier_distractors) {
        const SyntheticWorld world = build_world(spec, distractors);
        const GroundedBackend backend = build_backend(world, spec.seed);
        report.tiers.push_back(evaluate_tier(world, backend, method_jobs(spec), spec.seed,
                                             spec.metric, /*inject_oracles=*/false));
    }
    return report;
}

ReportRecord run_context_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.n_sweep.empty()) throw SpecError("n_sweep must be non-empty for a sweep");
    ReportRecord report;
    report.kind = "sweep";
    report.seed = spec.seed;
    report.spec_echo = spec_to_json(spec);

    const SyntheticWorld world = build_world(spec, spec.world.num_distractor_docs);
    const GroundedBackend backend = build_backend(world, spec.seed);
    for (int n : spec.n_sweep) {
        std::vector<MethodJob> jobs = method_jobs(spec);
        for (auto& job : jobs) job.config.n_contexts = n;
        TierRow row = evaluate_tier(world, backend, jobs, spec.seed, spec.metric,
                                    /*inject_oracles=*/false);
        row.n_label = n;
        report.tiers.push_back(std::move(row));
    }
    return report;
}

ReportRecord run_oracle_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ReportRecord report;
    report.kind = "oracle";
    report.seed = spec.seed;
    report.spec_echo = spec_to_json(spec);
    const SyntheticWorld world = build_world(spec, spec.tier_distractors.front());
    const GroundedBackend backend = build_backend(world, spec.seed);
    report.tiers.push_back(evaluate_tier(world, backend, method_jobs(spec), spec.seed,
                                         spec.metric, /*inject_oracles=*/true));
    return report;
}

std::vector<std::string> ablation_variant_names() {
    return {"full",           "no_deflection", "best_context",
            "all_contexts",   "uniform_weight", "absolute_weight",
            "empty_exclude",  "empty_mean",     "no_constraint"};
}

ReportRecord run_ablation_suite(const ExperimentSpec& spec) {
    spec.validate();
    ReportRecord report;
    report.kind = "ablation";
    report.seed = spec.seed;
    report.spec_echo = spec_to_json(spec);

    const SyntheticWorld world = build_world(spec, spec.tier_distractors.front());
    const GroundedBackend backend = build_backend(world, spec.seed);

    std::vector<MethodJob> jobs;
    for (const auto& name : ablation_variant_names()) {
        DecoderConfig cfg = spec.config;
        cfg.method = Method::Rmcd;
        if (name == "no_deflection") cfg.deflection_enabled = false;
        else if (name == "best_context") cfg.constraint_mode = ConstraintMode::BestContext;
        else if (name == "all_contexts") cfg.constraint_mode = ConstraintMode::AllContexts;
        else if (name == "uniform_weight") cfg.weight_scheme = WeightScheme::Uniform;
        else if (name == "absolute_weight") cfg.weight_scheme = WeightScheme::Absolute;
        else if (name == "empty_exclude") cfg.empty_context_mode = EmptyContextMode::Exclude;
        else if (name == "empty_mean") cfg.empty_context_mode = EmptyContextMode::Mean;
        else if (name == "no_constraint") cfg.constraint_mode = ConstraintMode::Disabled;
        jobs.push_back(MethodJob{name, Method::Rmcd, cfg});
    }
    report.tiers.push_back(evaluate_tier(world, backend, jobs, spec.seed, spec.metric,
                                         /*inject_oracles=*/false));
    return report;
}

ordered_json spec_to_json(const ExperimentSpec& spec) {
    ordered_json world{
        {"num_entities", spec.world.num_entities},
        {"attributes_per_entity", spec.world.attributes_per_entity},
        {"num_distractor_docs", spec.world.num_distractor_docs},
        {"value_vocab_size", spec.world.value_vocab_size},
        {"value_tokens_min", spec.world.value_tokens_min},
        {"value_tokens_max", spec.world.value_tokens_max},
        {"mention_rate", spec.world.mention_rate},
        {"mention_repeat_rate", spec.world.mention_repeat_rate},
        {"distractor_lines_min", spec.world.distractor_lines_min},
        {"distractor_lines_max", spec.world.distractor_lines_max},
    };
    ordered_json config{
        {"tau1", spec.config.tau1},
        {"tau2", spec.config.tau2},
        {"gamma", spec.config.gamma},
        {"max_weight", spec.config.max_weight},
        {"min_weight", spec.config.min_weight},
        {"beta", spec.config.beta},
        {"n_contexts", spec.config.n_contexts},
        {"scd_alpha1", spec.config.scd_alpha1},
        {"scd_alpha2", spec.config.scd_alpha2},
        {"empty_context_mode", empty_context_mode_name(spec.config.empty_context_mode)},
        {"deflection_enabled", spec.config.deflection_enabled},
        {"constraint_mode", constraint_mode_name(spec.config.constraint_mode)},
        {"weight_scheme", weight_scheme_name(spec.config.weight_scheme)},
        {"sampling", sampling_mode_name(spec.config.sampling)},
        {"top_p", spec.config.top_p},
        {"max_new_tokens", spec.config.max_new_tokens},
    };
    ordered_json methods = ordered_json::array();
    for (Method m : spec.methods) methods.push_back(method_name(m));
    return ordered_json{
        {"world", world},
        {"tier_distractors", spec.tier_distractors},
        {"methods", methods},
        {"config", config},
        {"n_sweep", spec.n_sweep},
        {"seed", spec.seed},
        {"metric", spec.metric == Metric::ExactMatch ? "exact_match" : "numeric_relaxed"},
    };
}

ordered_json report_to_json(const ReportRecord& report) {
    ordered_json tiers = ordered_json::array();
    for (const auto& tier : report.tiers) {
        ordered_json methods = ordered_json::array();
        for (const auto& m : tier.methods) {
            methods.push_back(ordered_json{
                {"name", m.name},
                {"accuracy", round4(m.accuracy)},
                {"fwd_calls_per_token", round4(m.fwd_per_token)},
                {"latency_ms",
                 ordered_json{{"median", round4(m.lat_med_ms)}, {"p95", round4(m.lat_p95_ms)}}},
            });
        }
        ordered_json t{
            {"kb_size", tier.kb_size},
            {"recall",
             ordered_json{{"1", round4(tier.recall1)},
                          {"3", round4(tier.recall3)},
                          {"5", round4(tier.recall5)}}},
            {"methods", methods},
        };
        if (tier.n_label >= 0) t["n"] = tier.n_label;
        tiers.push_back(std::move(t));
    }
    return ordered_json{
        {"kind", report.kind},     {"version", report.version}, {"seed", report.seed},
        {"spec_echo", report.spec_echo}, {"tiers", tiers},
    };
}

ReportRecord report_from_json(const ordered_json& j) {
    ReportRecord report;
    report.kind = j.at("kind").get<std::string>();
    report.version = j.at("version").get<std::string>();
    report.seed = j.at("seed").get<uint64_t>();
    report.spec_echo = j.at("spec_echo");
    for (const auto& t : j.at("tiers")) {
        TierRow tier;
        tier.kb_size = t.at("kb_size").get<size_t>();
        tier.n_label = t.contains("n") ? t.at("n").get<int>() : -1;
        tier.recall1 = t.at("recall").at("1").get<double>();
        tier.recall3 = t.at("recall").at("3").get<double>();
        tier.recall5 = t.at("recall").at("5").get<double>();
        for (const auto& m : t.at("methods")) {
            MethodRow mr;
            mr.name = m.at("name").get<std::string>();
            mr.accuracy = m.at("accuracy").get<double>();
            mr.fwd_per_token = m.at("fwd_calls_per_token").get<double>();
            mr.lat_med_ms = m.at("latency_ms").at("median").get<double>();
            mr.lat_p95_ms = m.at("latency_ms").at("p95").get<double>();
            tier.methods.push_back(std::move(mr));
        }
        report.tiers.push_back(std::move(tier));
    }
    return report;
}

std::string report_to_csv(const ReportRecord& report) {
    std::string out = "kb_size,method,accuracy,recall1,recall3,recall5,fwd_per_tok,lat_med,lat_p95\n";
    char buf[256];
    for (const auto& tier : report.tiers) {
        for (const auto& m : tier.methods) {
            std::string name = m.name;
            if (tier.n_label >= 0) name += "[n=" + std::to_string(tier.n_label) + "]";
            std::snprintf(buf, sizeof(buf), "%zu,%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                          tier.kb_size, name.c_str(), m.accuracy, tier.recall1, tier.recall3,
                          tier.recall5, m.fwd_per_token, m.lat_med_ms, m.lat_p95_ms);
            out += buf;
        }
    }
    return out;
}

void emit_report(const ReportRecord& report, ReportFormat format,
                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    if (format == ReportFormat::Json) {
        out << report_to_json(report).dump(2) << "\n";
    } else {
        out << report_to_csv(report);
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ragdec
