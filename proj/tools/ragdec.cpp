// Command-line experiment runner: synthetic worlds, retrieval, decoding, and
// the benchmark/oracle/ablation protocols, all deterministic under --seed.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragdec/bench.hpp"
#include "ragdec/config.hpp"
#include "ragdec/decoder.hpp"
#include "ragdec/errors.hpp"
#include "ragdec/kb.hpp"
#include "ragdec/retrieval.hpp"
#include "ragdec/synth.hpp"

namespace {

using namespace ragdec;
using nlohmann::ordered_json;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

struct DecoderFlags {
    std::string config_path;
    std::optional<double> tau1, tau2, gamma, max_weight, min_weight, beta, top_p;
    std::optional<int> n, max_new_tokens;
    std::optional<std::string> sampling, empty_mode, constraint_mode, weight_scheme;
    std::optional<bool> deflection;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "flat key=value config file");
        cmd->add_option("--tau1", tau1, "relative-score softmax temperature");
        cmd->add_option("--tau2", tau2, "constraint-ensemble softmax temperature");
        cmd->add_option("--gamma", gamma, "constraint-set score threshold");
        cmd->add_option("--max-weight", max_weight, "maximum context weight M");
        cmd->add_option("--min-weight", min_weight, "minimum context weight m");
        cmd->add_option("--beta", beta, "plausibility threshold");
        cmd->add_option("--top-p", top_p, "nucleus mass");
        cmd->add_option("--n", n, "number of retrieved contexts");
        cmd->add_option("--max-new-tokens", max_new_tokens, "generation cap");
        cmd->add_option("--sampling", sampling, "greedy|nucleus");
        cmd->add_option("--empty-context-mode", empty_mode, "neginf|mean|exclude");
        cmd->add_option("--constraint-mode", constraint_mode,
                        "threshold|best_context|all_contexts|disabled");
        cmd->add_option("--weight-scheme", weight_scheme, "relative|absolute|uniform");
        cmd->add_option("--deflection", deflection, "enable negative-weight deflection");
    }

    DecoderConfig build() const {
        DecoderConfig cfg;
        if (!config_path.empty()) apply_config(cfg, parse_config_file(config_path));
        if (tau1) cfg.tau1 = *tau1;
        if (tau2) cfg.tau2 = *tau2;
        if (gamma) cfg.gamma = *gamma;
        if (max_weight) cfg.max_weight = *max_weight;
        if (min_weight) cfg.min_weight = *min_weight;
        if (beta) cfg.beta = *beta;
        if (top_p) cfg.top_p = *top_p;
        if (n) cfg.n_contexts = *n;
        if (max_new_tokens) cfg.max_new_tokens = *max_new_tokens;
        if (sampling) cfg.sampling = parse_sampling_mode(*sampling);
        if (empty_mode) cfg.empty_context_mode = parse_empty_context_mode(*empty_mode);
        if (constraint_mode) cfg.constraint_mode = parse_constraint_mode(*constraint_mode);
        if (weight_scheme) cfg.weight_scheme = parse_weight_scheme(*weight_scheme);
        if (deflection) cfg.deflection_enabled = *deflection;
        cfg.validate();
        return cfg;
    }
};

struct WorldFlags {
    SyntheticWorldSpec spec;

    void attach(CLI::App* cmd) {
        cmd->add_option("--entities", spec.num_entities, "number of entities");
        cmd->add_option("--attributes", spec.attributes_per_entity, "attributes per entity");
        cmd->add_option("--distractors", spec.num_distractor_docs, "distractor documents");
        cmd->add_option("--value-vocab", spec.value_vocab_size, "value lexicon size");
        cmd->add_option("--value-tokens-min", spec.value_tokens_min, "min value length");
        cmd->add_option("--value-tokens-max", spec.value_tokens_max, "max value length");
        cmd->add_option("--mention-rate", spec.mention_rate,
                        "mean real-entity mentions per distractor");
        cmd->add_option("--mention-repeat-rate", spec.mention_repeat_rate,
                        "chance a mention is doubled");
    }
};

void write_or_print(const ReportRecord& report, const std::string& out,
                    const std::string& format) {
    const ReportFormat fmt = format == "csv" ? ReportFormat::Csv : ReportFormat::Json;
    if (out.empty()) {
        if (fmt == ReportFormat::Json) {
            std::cout << report_to_json(report).dump(2) << "\n";
        } else {
            std::cout << report_to_csv(report);
        }
    } else {
        emit_report(report, fmt, out);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"RAG decoding engine and benchmark harness"};
    app.require_subcommand(1);

    uint64_t seed = 42;
    app.add_option("--seed", seed, "global rng seed")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic world");
    WorldFlags synth_world;
    synth_world.attach(synth);
    std::string synth_kb = "kb.jsonl", synth_qa = "qa.jsonl";
    synth->add_option("--out-kb", synth_kb, "KB JSONL output");
    synth->add_option("--out-qa", synth_qa, "QA JSONL output");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load and validate a KB file");
    std::string ingest_path, ingest_emit;
    ingest->add_option("--kb", ingest_path, "KB JSONL input")->required();
    ingest->add_option("--emit", ingest_emit, "re-emit canonical JSONL here");

    // retrieve
    auto* retr = app.add_subcommand("retrieve", "BM25 retrieval and recall metrics");
    std::string retr_kb, retr_qa, retr_out;
    int retr_n = 5;
    bool retr_full = false;
    retr->add_option("--kb", retr_kb)->required();
    retr->add_option("--qa", retr_qa)->required();
    retr->add_option("--n", retr_n, "contexts per query");
    retr->add_option("--out", retr_out, "write JSON here (default stdout)");
    retr->add_flag("--full", retr_full, "include per-query rankings");

    // generate
    auto* gen = app.add_subcommand("generate", "decode one query");
    std::string gen_kb, gen_qa, gen_qid, gen_method = "rmcd";
    DecoderFlags gen_flags;
    gen->add_option("--kb", gen_kb)->required();
    gen->add_option("--qa", gen_qa)->required();
    gen->add_option("--qid", gen_qid, "query id (default: first query)");
    gen->add_option("--method", gen_method, "decoding method");
    gen_flags.attach(gen);

    // bench
    auto* bench = app.add_subcommand("bench", "KB-size robustness benchmark");
    WorldFlags bench_world;
    bench_world.attach(bench);
    DecoderFlags bench_flags;
    bench_flags.attach(bench);
    std::string bench_tiers = "14,974,16334";
    std::string bench_methods =
        "unconditional,rag,scd,consistency,concat,max_probability,rmcd";
    std::string bench_sweep, bench_out, bench_format = "json";
    bool bench_numeric = false;
    bench->add_option("--tiers", bench_tiers, "distractor counts per tier");
    bench->add_option("--methods", bench_methods, "comma-separated method list");
    bench->add_option("--sweep-n", bench_sweep, "run a context-count sweep instead");
    bench->add_option("--out", bench_out, "report path (default stdout)");
    bench->add_option("--format", bench_format, "json|csv");
    bench->add_flag("--numeric-relaxed", bench_numeric, "allow +-10% numeric matches");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "perfect-retriever experiment");
    WorldFlags oracle_world;
    oracle_world.spec.mention_rate = 0.0;
    oracle_world.spec.num_distractor_docs = 974;
    oracle_world.attach(oracle);
    DecoderFlags oracle_flags;
    oracle_flags.attach(oracle);
    std::string oracle_methods =
        "unconditional,rag,scd,consistency,concat,max_probability,rmcd";
    std::string oracle_out, oracle_format = "json";
    oracle->add_option("--methods", oracle_methods);
    oracle->add_option("--out", oracle_out);
    oracle->add_option("--format", oracle_format, "json|csv");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "single-switch RMCD variants");
    WorldFlags ablate_world;
    ablate_world.attach(ablate);
    DecoderFlags ablate_flags;
    ablate_flags.attach(ablate);
    std::string ablate_out, ablate_format = "json";
    ablate->add_option("--out", ablate_out);
    ablate->add_option("--format", ablate_format, "json|csv");

    // report
    auto* rep = app.add_subcommand("report", "convert a JSON report");
    std::string rep_in, rep_out, rep_format = "csv";
    rep->add_option("--in", rep_in, "JSON report")->required();
    rep->add_option("--out", rep_out, "output path (default stdout)");
    rep->add_option("--format", rep_format, "json|csv");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        const SyntheticWorld world = synthesize_world(synth_world.spec, seed);
        emit_kb(world.kb, synth_kb);
        emit_queries(world.queries, synth_qa);
        std::cout << "wrote " << world.kb.size() << " documents to " << synth_kb << " and "
                  << world.queries.size() << " queries to " << synth_qa << "\n";
        return 0;
    }
    if (ingest->parsed()) {
        const KnowledgeBase kb = ingest_kb(ingest_path);
        ordered_json stats{{"documents", kb.size()},
                           {"avg_doc_length", kb.avg_doc_length()}};
        if (!ingest_emit.empty()) {
            emit_kb(kb, ingest_emit);
            stats["emitted"] = ingest_emit;
        }
        std::cout << stats.dump(2) << "\n";
        return 0;
    }
    if (retr->parsed()) {
        const KnowledgeBase kb = ingest_kb(retr_kb);
        const auto queries = ingest_queries(retr_qa);
        std::vector<RetrievedContextSet> sets;
        sets.reserve(queries.size());
        ordered_json per_query = ordered_json::array();
        for (const auto& q : queries) {
            sets.push_back(retrieve(kb, q.question, retr_n));
            if (retr_full) {
                ordered_json ranked = ordered_json::array();
                for (const auto& c : sets.back().contexts) {
                    ranked.push_back(ordered_json{{"doc_id", c.doc_id}, {"score", c.score}});
                }
                per_query.push_back(ordered_json{{"qid", q.qid}, {"contexts", ranked}});
            }
        }
        ordered_json out{{"n", retr_n},
                         {"recall", ordered_json{{"1", recall_at_k(sets, queries, 1)},
                                                 {"3", recall_at_k(sets, queries, 3)},
                                                 {"5", recall_at_k(sets, queries, 5)}}}};
        if (retr_full) out["queries"] = per_query;
        if (retr_out.empty()) {
            std::cout << out.dump(2) << "\n";
        } else {
            std::ofstream f(retr_out);
            if (!f) throw IoError("cannot write " + retr_out);
            f << out.dump(2) << "\n";
        }
        return 0;
    }
    if (gen->parsed()) {
        const KnowledgeBase kb = ingest_kb(gen_kb);
        const auto queries = ingest_queries(gen_qa);
        if (queries.empty()) throw SpecError("no queries in " + gen_qa);
        const QueryRecord* query = &queries.front();
        if (!gen_qid.empty()) {
            query = nullptr;
            for (const auto& q : queries) {
                if (q.qid == gen_qid) {
                    query = &q;
                    break;
                }
            }
            if (!query) throw SpecError("qid not found: " + gen_qid);
        }
        DecoderConfig cfg = gen_flags.build();
        const Method method = parse_method(gen_method);
        cfg.method = method;
        const GroundedBackend backend(
            GroundedWorldModel::from_corpus(kb, queries, 10.0, 1.0, seed));
        const RetrievedContextSet set = retrieve(kb, query->question, cfg.n_contexts);
        Rng rng = derive_rng(seed, method_name(method) + "/" + query->qid);
        const QueryOutcome outcome =
            run_query(method, backend, query->question, set, cfg, rng);
        ordered_json out{{"qid", query->qid},
                         {"question", query->question},
                         {"method", method_name(method)},
                         {"answer", outcome.answer},
                         {"correct", answer_matches(outcome.answer, query->answers,
                                                    Metric::ExactMatch)},
                         {"forward_calls", outcome.forward_calls},
                         {"tokens", outcome.tokens},
                         {"mean_confidence", outcome.mean_confidence}};
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    if (bench->parsed()) {
        ExperimentSpec spec;
        spec.world = bench_world.spec;
        spec.config = bench_flags.build();
        spec.seed = seed;
        spec.metric = bench_numeric ? Metric::NumericRelaxed : Metric::ExactMatch;
        spec.methods.clear();
        for (const auto& name : split_csv(bench_methods)) {
            spec.methods.push_back(parse_method(name));
        }
        if (!bench_sweep.empty()) {
            spec.n_sweep.clear();
            for (const auto& n : split_csv(bench_sweep)) spec.n_sweep.push_back(std::stoi(n));
            write_or_print(run_context_sweep(spec), bench_out, bench_format);
        } else {
            spec.tier_distractors.clear();
            for (const auto& t : split_csv(bench_tiers)) {
                spec.tier_distractors.push_back(std::stoi(t));
            }
            write_or_print(run_benchmark(spec), bench_out, bench_format);
        }
        return 0;
    }
    if (oracle->parsed()) {
        ExperimentSpec spec = default_oracle_spec();
        spec.world = oracle_world.spec;
        spec.tier_distractors = {oracle_world.spec.num_distractor_docs};
        spec.config = oracle_flags.build();
        spec.seed = seed;
        spec.methods.clear();
        for (const auto& name : split_csv(oracle_methods)) {
            spec.methods.push_back(parse_method(name));
        }
        write_or_print(run_oracle_experiment(spec), oracle_out, oracle_format);
        return 0;
    }
    if (ablate->parsed()) {
        ExperimentSpec spec;
        spec.world = ablate_world.spec;
        spec.tier_distractors = {ablate_world.spec.num_distractor_docs};
        spec.config = ablate_flags.build();
        spec.seed = seed;
        write_or_print(run_ablation_suite(spec), ablate_out, ablate_format);
        return 0;
    }
    if (rep->parsed()) {
        std::ifstream in(rep_in);
        if (!in) throw IoError("cannot read " + rep_in);
        ordered_json j;
        in >> j;
        const ReportRecord report = report_from_json(j);
        write_or_print(report, rep_out, rep_format);
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
