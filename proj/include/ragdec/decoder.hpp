#pragma once

#include <span>
#include <string>
#include <vector>

#include "ragdec/backend.hpp"
#include "ragdec/numerics.hpp"
#include "ragdec/retrieval.hpp"
#include "ragdec/rng.hpp"

namespace ragdec {

enum class Method {
    Unconditional,
    Rag,
    Scd,
    Consistency,
    MaxProbability,
    Concat,
    Rmcd,
};

std::string method_name(Method m);
Method parse_method(const std::string& name);  // throws SpecError

enum class EmptyContextMode { NegInf, Mean, Exclude };
enum class ConstraintMode { Threshold, BestContext, AllContexts, Disabled };
enum class WeightScheme { Relative, Absolute, Uniform };
enum class SamplingMode { Greedy, Nucleus };

struct DecoderConfig {
    double tau1 = 1.75;        // relative-score softmax temperature
    double tau2 = 0.5;         // constraint-ensemble softmax temperature
    double gamma = 0.3;        // relative-score threshold for the constraint set
    double max_weight = 4.0;   // M
    double min_weight = -1.0;  // m
    double beta = 0.2;         // plausibility threshold
    int n_contexts = 5;
    double scd_alpha1 = 2.0;
    double scd_alpha2 = 1.0;
    Method method = Method::Rmcd;
    EmptyContextMode empty_context_mode = EmptyContextMode::NegInf;
    bool deflection_enabled = true;
    ConstraintMode constraint_mode = ConstraintMode::Threshold;
    WeightScheme weight_scheme = WeightScheme::Relative;
    SamplingMode sampling = SamplingMode::Greedy;
    double top_p = 0.9;
    int max_new_tokens = 32;

    void validate() const;  // throws SpecError
};

/// Softmax-normalized retrieval scores over the augmented context set.
/// A -inf-scored sentinel gets exactly 0.
struct RelativeScoreVector {
    std::vector<double> w;
};

/// Signed combination coefficients, one per context. Under the relative
/// scheme alpha[0] == max_weight exactly and entries are non-increasing
/// along the score order, bounded by [min_weight, max_weight].
struct ContextWeightVector {
    std::vector<double> alpha;
};

/// Tokens allowed by the ensembled plausibility constraint, plus the
/// ensemble distribution they were derived from.
struct PlausibleTokenSet {
    std::vector<TokenId> ids;    // ascending
    std::vector<uint8_t> member; // size |V|
    ProbVector p_tilde;

    bool contains(TokenId v) const { return member[static_cast<size_t>(v)] != 0; }
};

struct GenerationRecord {
    std::vector<TokenId> tokens;      // includes the terminating <eos> if reached
    std::vector<double> token_probs;  // chosen-token probability per step
    double mean_confidence = 0.0;     // arithmetic mean of token_probs
    uint64_t forward_calls = 0;
    Method method = Method::Rmcd;
};

/// Appends the empty-context pseudo-entry according to the mode:
/// NegInf appends it with score -inf (sorted last); Mean appends it with the
/// mean of the existing scores, re-sorted into place; Exclude is a no-op.
/// The input must not already contain a sentinel.
RetrievedContextSet augment_with_sentinel(const RetrievedContextSet& set,
                                          EmptyContextMode mode);

/// softmax(scores / tau1) over the whole augmented set.
RelativeScoreVector relative_scores(const RetrievedContextSet& set, double tau1);

/// Maps relative scores to context weights.
///   Relative: alpha_j = M - (M-m) * (w_1 - w_j) / w_1
///   Absolute: same ratio on raw retrieval scores (requires a positive top
///             score); results clamped to [m, M] so the -inf sentinel lands on m.
///   Uniform:  alpha_j = M - (M-m) * j/(k-1), scores ignored.
ContextWeightVector context_weights(const RelativeScoreVector& w,
                                    const RetrievedContextSet& set,
                                    const DecoderConfig& config);

/// Indices of the constraint context set. Threshold keeps w_j >= gamma and
/// always force-includes index 0; BestContext is {0}; AllContexts keeps every
/// real context. The sentinel is never included.
std::vector<size_t> build_constraint_set(const RetrievedContextSet& set,
                                         const RelativeScoreVector& w,
                                         const DecoderConfig& config);

/// p_tilde = softmax( sum_k softmax(s/tau2)_k * q_k ) over the constraint set.
ProbVector ensemble_distribution(std::span<const LogitVector> logits,
                                 std::span<const double> scores, double tau2);

/// { v : p_tilde(v) >= beta * max p_tilde }; always contains the argmax.
PlausibleTokenSet plausible_tokens(const ProbVector& p_tilde, double beta);

/// One next-token distribution from the full pipeline: per-context logits,
/// relative scores, context weights, plausibility masking, weighted sum,
/// softmax. The set must already be augmented for the configured
/// empty-context mode. Adds one forward call per context in the set.
ProbVector rmcd_step(const LogitBackend& backend, const PromptState& state,
                     const RetrievedContextSet& augmented, const DecoderConfig& config,
                     uint64_t& forward_calls);

/// Per-step distributions for Unconditional, Rag, Scd, and Concat. The set is
/// the raw retrieval output (no sentinel).
ProbVector baseline_step(Method method, const LogitBackend& backend,
                         const PromptState& state, const RetrievedContextSet& retrieved,
                         const DecoderConfig& config, uint64_t& forward_calls);

/// Autoregressive loop for the step-driven methods; stops at <eos> or
/// max_new_tokens. Greedy selection is fully deterministic; nucleus sampling
/// draws from rng.
GenerationRecord generate(Method method, const LogitBackend& backend,
                          const std::string& question, const RetrievedContextSet& retrieved,
                          const DecoderConfig& config, Rng& rng);

/// Decoded answer: non-reserved token strings joined by single spaces,
/// lowercase (whitespace-normalized exact-match form).
std::string answer_string(const GenerationRecord& record, const Vocabulary& vocab);

/// Consistency picks the modal answer; MaxProbability the answer of the
/// record with the highest mean confidence. Ties are broken by a seeded
/// uniform draw among the tied answers (sorted for determinism).
std::string aggregate_answers(Method method, std::span<const GenerationRecord> records,
                              const Vocabulary& vocab, Rng& rng);

/// One query end to end, covering all seven methods. Consistency and
/// MaxProbability run one single-context generation per retrieved context
/// and aggregate; their forward calls are the sum over sub-generations while
/// tokens/confidence describe the winning record.
struct QueryOutcome {
    std::string answer;
    uint64_t forward_calls = 0;
    size_t tokens = 0;
    double mean_confidence = 0.0;
};

QueryOutcome run_query(Method method, const LogitBackend& backend,
                       const std::string& question, const RetrievedContextSet& retrieved,
                       const DecoderConfig& config, Rng& rng);

}  // namespace ragdec
