#include "ragdec/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ragdec/errors.hpp"

namespace ragdec {

std::string method_name(Method m) {
    switch (m) {
        case Method::Unconditional: return "unconditional";
        case Method::Rag: return "rag";
        case Method::Scd: return "scd";
        case Method::Consistency: return "consistency";
        case Method::MaxProbability: return "max_probability";
        case Method::Concat: return "concat";
        case Method::Rmcd: return "rmcd";
    }
    throw ContractViolation("unknown method");
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::Unconditional, Method::Rag, Method::Scd, Method::Consistency,
                     Method::MaxProbability, Method::Concat, Method::Rmcd}) {
        if (method_name(m) == name) return m;
    }
    throw SpecError("unknown method: " + name);
}

void DecoderConfig::validate() const {
    if (tau1 <= 0.0) throw SpecError("tau1 must be positive");
    if (tau2 <= 0.0) throw SpecError("tau2 must be positive");
    if (gamma < 0.0 || gamma > 1.0) throw SpecError("gamma must lie in [0, 1]");
    if (!(max_weight > min_weight)) throw SpecError("max_weight must exceed min_weight");
    if (max_weight <= 0.0) throw SpecError("max_weight must be positive");
    if (beta <= 0.0 || beta >= 1.0) throw SpecError("beta must lie in (0, 1)");
    if (n_contexts < 1) throw SpecError("n_contexts must be >= 1");
    if (top_p <= 0.0 || top_p > 1.0) throw SpecError("top_p must lie in (0, 1]");
    if (max_new_tokens < 0) throw SpecError("max_new_tokens must be >= 0");
}

RetrievedContextSet augment_with_sentinel(const RetrievedContextSet& set,
                                          EmptyContextMode mode) {
    if (set.has_sentinel()) {
        throw ContractViolation("context set already contains a sentinel");
    }
    RetrievedContextSet out = set;
    switch (mode) {
        case EmptyContextMode::Exclude:
            return out;
        case EmptyContextMode::NegInf:
            out.contexts.push_back(ScoredContext::sentinel(kNegInf));
            return out;
        case EmptyContextMode::Mean: {
            if (set.empty()) {
                throw ContractViolation("mean sentinel score needs at least one context");
            }
            double mean = 0.0;
            for (const auto& c : set.contexts) mean += c.score;
            mean /= static_cast<double>(set.size());
            // Insert after every context scoring >= mean so ordering holds.
            auto pos = std::find_if(out.contexts.begin(), out.contexts.end(),
                                    [&](const ScoredContext& c) { return c.score < mean; });
            out.contexts.insert(pos, ScoredContext::sentinel(mean));
            return out;
        }
    }
    throw ContractViolation("unknown empty-context mode");
}

RelativeScoreVector relative_scores(const RetrievedContextSet& set, double tau1) {
    if (tau1 <= 0.0) throw ContractViolation("tau1 must be positive");
    std::vector<double> scores;
    scores.reserve(set.size());
    for (const auto& c : set.contexts) scores.push_back(c.score);
    ProbVector p = stable_softmax(LogitVector(std::move(scores)), tau1);
    return RelativeScoreVector{p.probs()};
}

ContextWeightVector context_weights(const RelativeScoreVector& w,
                                    const RetrievedContextSet& set,
                                    const DecoderConfig& config) {
    if (w.w.size() != set.size() || set.empty()) {
        throw ContractViolation("context_weights: score/set mismatch");
    }
    const double M = config.max_weight;
    const double m = config.min_weight;
    const double delta = M - m;
    const size_t k = set.size();
    std::vector<double> alpha(k);

    switch (config.weight_scheme) {
        case WeightScheme::Relative: {
            const double w1 = w.w[0];
            if (!(w1 > 0.0)) {
                throw DegenerateInputError("relative scheme needs w_1 > 0");
            }
            for (size_t j = 0; j < k; ++j) {
                alpha[j] = M - delta * ((w1 - w.w[j]) / w1);
            }
            break;
        }
        case WeightScheme::Absolute: {
            const double s1 = set[0].score;
            if (!(s1 > 0.0)) {
                throw DegenerateInputError("absolute scheme needs a positive top score");
            }
            for (size_t j = 0; j < k; ++j) {
                const double sj = set[j].score;
                const double raw = sj == kNegInf ? m : M - delta * ((s1 - sj) / s1);
                alpha[j] = std::clamp(raw, m, M);
            }
            break;
        }
        case WeightScheme::Uniform: {
            for (size_t j = 0; j < k; ++j) {
                alpha[j] = k == 1 ? M
                                  : M - delta * (static_cast<double>(j) /
                                                 static_cast<double>(k - 1));
            }
            break;
        }
    }
    return ContextWeightVector{std::move(alpha)};
}

std::vector<size_t> build_constraint_set(const RetrievedContextSet& set,
                                         const RelativeScoreVector& w,
                                         const DecoderConfig& config) {
    if (set.empty() || w.w.size() != set.size()) {
        throw ContractViolation("build_constraint_set: score/set mismatch");
    }
    if (set[0].is_sentinel()) {
        throw ContractViolation("constraint set cannot anchor on a sentinel");
    }
    std::vector<size_t> out;
    switch (config.constraint_mode) {
        case ConstraintMode::BestContext:
            out.push_back(0);
            break;
        case ConstraintMode::AllContexts:
            for (size_t j = 0; j < set.size(); ++j) {
                if (!set[j].is_sentinel()) out.push_back(j);
            }
            break;
        case ConstraintMode::Threshold:
            for (size_t j = 0; j < set.size(); ++j) {
                if (!set[j].is_sentinel() && w.w[j] >= config.gamma) out.push_back(j);
            }
            // The threshold can be unreachable for every context (n+1-way
            // splits dilute w); the ensemble needs a non-empty set, so the
            // top context is always kept.
            if (out.empty() || out.front() != 0) {
                out.insert(out.begin(), 0);
                out.erase(std::unique(out.begin(), out.end()), out.end());
            }
            break;
        case ConstraintMode::Disabled:
            throw ContractViolation("constraint set requested while disabled");
    }
    return out;
}

ProbVector ensemble_distribution(std::span<const LogitVector> logits,
                                 std::span<const double> scores, double tau2) {
    if (logits.empty() || logits.size() != scores.size()) {
        throw ContractViolation("ensemble_distribution: empty or mismatched inputs");
    }
    ProbVector w_tilde =
        stable_softmax(LogitVector(std::vector<double>(scores.begin(), scores.end())), tau2);
    LogitVector combined = weighted_logit_sum(logits, w_tilde.probs());
    return stable_softmax(combined, 1.0);
}

PlausibleTokenSet plausible_tokens(const ProbVector& p_tilde, double beta) {
    if (beta <= 0.0 || beta >= 1.0) throw ContractViolation("beta must lie in (0, 1)");
    double max_p = 0.0;
    for (size_t i = 0; i < p_tilde.size(); ++i) max_p = std::max(max_p, p_tilde[i]);
    const double threshold = beta * max_p;

    PlausibleTokenSet out;
    out.member.assign(p_tilde.size(), 0);
    for (size_t v = 0; v < p_tilde.size(); ++v) {
        if (p_tilde[v] >= threshold) {
            out.member[v] = 1;
            out.ids.push_back(static_cast<TokenId>(v));
        }
    }
    out.p_tilde = p_tilde;
    return out;
}

namespace {

LogitVector query_backend(const LogitBackend& backend, const PromptState& state,
                          const ScoredContext& ctx, uint64_t& forward_calls) {
    ++forward_calls;
    if (ctx.is_sentinel()) return backend.next_token_logits(state, std::nullopt);
    return backend.next_token_logits(state, ctx.text);
}

}  // namespace

ProbVector rmcd_step(const LogitBackend& backend, const PromptState& state,
                     const RetrievedContextSet& augmented, const DecoderConfig& config,
                     uint64_t& forward_calls) {
    if (augmented.empty()) throw ContractViolation("rmcd_step: empty context set");

    std::vector<LogitVector> logits;
    logits.reserve(augmented.size());
    for (const auto& ctx : augmented.contexts) {
        logits.push_back(query_backend(backend, state, ctx, forward_calls));
    }

    const RelativeScoreVector w = relative_scores(augmented, config.tau1);
    const ContextWeightVector weights = context_weights(w, augmented, config);

    if (config.constraint_mode != ConstraintMode::Disabled) {
        const auto cc = build_constraint_set(augmented, w, config);
        std::vector<LogitVector> cc_logits;
        std::vector<double> cc_scores;
        for (size_t j : cc) {
            cc_logits.push_back(logits[j]);
            cc_scores.push_back(augmented[j].score);
        }
        const ProbVector p_tilde = ensemble_distribution(cc_logits, cc_scores, config.tau2);
        const PlausibleTokenSet allowed = plausible_tokens(p_tilde, config.beta);

        // Masking is applied to every summand before weighting, so negative
        // weights cannot resurrect an excluded token.
        for (auto& l : logits) {
            for (size_t v = 0; v < l.size(); ++v) {
                if (!allowed.contains(static_cast<TokenId>(v))) l[v] = kNegInf;
            }
        }
    }

    std::vector<LogitVector> terms;
    std::vector<double> term_weights;
    for (size_t j = 0; j < logits.size(); ++j) {
        if (!config.deflection_enabled && weights.alpha[j] < 0.0) continue;
        terms.push_back(std::move(logits[j]));
        term_weights.push_back(weights.alpha[j]);
    }
    if (terms.empty()) {
        throw DegenerateInputError("no contexts left after dropping negative weights");
    }
    return stable_softmax(weighted_logit_sum(terms, term_weights), 1.0);
}

ProbVector baseline_step(Method method, const LogitBackend& backend,
                         const PromptState& state, const RetrievedContextSet& retrieved,
                         const DecoderConfig& config, uint64_t& forward_calls) {
    switch (method) {
        case Method::Unconditional:
            return stable_softmax(
                query_backend(backend, state, ScoredContext::sentinel(), forward_calls), 1.0);
        case Method::Rag: {
            if (retrieved.empty()) throw ContractViolation("rag: empty retrieval set");
            return stable_softmax(
                query_backend(backend, state, retrieved[0], forward_calls), 1.0);
        }
        case Method::Scd: {
            if (retrieved.empty()) throw ContractViolation("scd: empty retrieval set");
            std::vector<LogitVector> parts;
            parts.push_back(query_backend(backend, state, retrieved[0], forward_calls));
            parts.push_back(
                query_backend(backend, state, ScoredContext::sentinel(), forward_calls));
            const double weights[2] = {config.scd_alpha1, -config.scd_alpha2};
            return stable_softmax(weighted_logit_sum(parts, weights), 1.0);
        }
        case Method::Concat: {
            if (retrieved.empty()) throw ContractViolation("concat: empty retrieval set");
            std::string joined;
            for (const auto& c : retrieved.contexts) {
                if (c.is_sentinel()) continue;
                if (!joined.empty()) joined += '\n';
                joined += c.text;
            }
            ++forward_calls;
            return stable_softmax(backend.next_token_logits(state, joined), 1.0);
        }
        default:
            throw ContractViolation(method_name(method) + " is not a per-step method");
    }
}

GenerationRecord generate(Method method, const LogitBackend& backend,
                          const std::string& question, const RetrievedContextSet& retrieved,
                          const DecoderConfig& config, Rng& rng) {
    config.validate();
    GenerationRecord rec;
    rec.method = method;

    RetrievedContextSet augmented;
    const bool is_rmcd = method == Method::Rmcd;
    if (is_rmcd) augmented = augment_with_sentinel(retrieved, config.empty_context_mode);

    PromptState state{question, {}};
    uint64_t calls = 0;
    for (int step = 0; step < config.max_new_tokens; ++step) {
        const ProbVector probs =
            is_rmcd ? rmcd_step(backend, state, augmented, config, calls)
                    : baseline_step(method, backend, state, retrieved, config, calls);
        const TokenId tok = config.sampling == SamplingMode::Greedy
                                ? greedy_select(probs)
                                : nucleus_sample(probs, config.top_p, rng);
        rec.tokens.push_back(tok);
        rec.token_probs.push_back(probs[static_cast<size_t>(tok)]);
        state.prefix.push_back(tok);
        if (tok == Vocabulary::kEos) break;
    }
    rec.forward_calls = calls;
    if (!rec.token_probs.empty()) {
        rec.mean_confidence =
            std::accumulate(rec.token_probs.begin(), rec.token_probs.end(), 0.0) /
            static_cast<double>(rec.token_probs.size());
    }
    return rec;
}

std::string answer_string(const GenerationRecord& record, const Vocabulary& vocab) {
    std::string out;
    for (TokenId t : record.tokens) {
        if (vocab.is_reserved(t)) continue;
        if (!out.empty()) out += ' ';
        out += vocab.token_string(t);
    }
    return normalize_answer(out);
}

std::string aggregate_answers(Method method, std::span<const GenerationRecord> records,
                              const Vocabulary& vocab, Rng& rng) {
    if (records.empty()) throw ContractViolation("aggregate_answers: no records");

    if (method == Method::Consistency) {
        std::map<std::string, int> counts;  // ordered: deterministic tie listing
        for (const auto& r : records) ++counts[answer_string(r, vocab)];
        int best = 0;
        for (const auto& [ans, n] : counts) best = std::max(best, n);
        std::vector<std::string> tied;
        for (const auto& [ans, n] : counts) {
            if (n == best) tied.push_back(ans);
        }
        return tied.size() == 1 ? tied.front() : tied[rng.next_below(tied.size())];
    }
    if (method == Method::MaxProbability) {
        double best = -1.0;
        for (const auto& r : records) best = std::max(best, r.mean_confidence);
        std::vector<std::string> tied;
        for (const auto& r : records) {
            if (r.mean_confidence == best) tied.push_back(answer_string(r, vocab));
        }
        std::sort(tied.begin(), tied.end());
        tied.erase(std::unique(tied.begin(), tied.end()), tied.end());
        return tied.size() == 1 ? tied.front() : tied[rng.next_below(tied.size())];
    }
    throw ContractViolation(method_name(method) + " is not an aggregation method");
}

QueryOutcome run_query(Method method, const LogitBackend& backend,
                       const std::string& question, const RetrievedContextSet& retrieved,
                       const DecoderConfig& config, Rng& rng) {
    QueryOutcome out;
    if (method == Method::Consistency || method == Method::MaxProbability) {
        if (retrieved.empty()) {
            throw ContractViolation(method_name(method) + ": empty retrieval set");
        }
        const size_t k = std::min<size_t>(static_cast<size_t>(config.n_contexts),
                                          retrieved.size());
        std::vector<GenerationRecord> records;
        records.reserve(k);
        for (size_t j = 0; j < k; ++j) {
            RetrievedContextSet single;
            single.contexts.push_back(retrieved[j]);
            records.push_back(generate(Method::Rag, backend, question, single, config, rng));
            out.forward_calls += records.back().forward_calls;
        }
        out.answer = aggregate_answers(method, records, backend.vocabulary(), rng);
        for (const auto& r : records) {
            if (answer_string(r, backend.vocabulary()) == out.answer) {
                out.tokens = r.tokens.size();
                out.mean_confidence = r.mean_confidence;
                break;
            }
        }
        return out;
    }

    RetrievedContextSet sliced = retrieved;
    if (sliced.contexts.size() > static_cast<size_t>(config.n_contexts)) {
        sliced.contexts.resize(static_cast<size_t>(config.n_contexts));
    }
    const GenerationRecord rec = generate(method, backend, question, sliced, config, rng);
    out.answer = answer_string(rec, backend.vocabulary());
    out.forward_calls = rec.forward_calls;
    out.tokens = rec.tokens.size();
    out.mean_confidence = rec.mean_confidence;
    return out;
}

}  // namespace ragdec
