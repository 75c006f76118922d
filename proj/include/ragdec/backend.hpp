#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ragdec/kb.hpp"
#include "ragdec/numerics.hpp"

namespace ragdec {

/// Fixed token inventory. Ids 0..2 are reserved; real tokens follow in
/// lexicographic order, so a vocabulary is fully determined by its word set.
class Vocabulary {
  public:
    static constexpr TokenId kBos = 0;
    static constexpr TokenId kEos = 1;
    static constexpr TokenId kUnk = 2;
    static constexpr size_t kMaxSize = 4096;

    Vocabulary() = default;
    /// Words are deduplicated and sorted; throws SpecError beyond kMaxSize.
    explicit Vocabulary(std::vector<std::string> words);

    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string& token_string(TokenId id) const { return tokens_[id]; }
    /// Id of a word, or kUnk when absent.
    TokenId find(const std::string& word) const;
    bool is_reserved(TokenId id) const { return id <= kUnk; }

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> by_word_;
};

/// Inputs to one next-token prediction: the question plus the tokens already
/// generated. The prefix may contain EOS only as its final element.
struct PromptState {
    std::string question;
    std::vector<TokenId> prefix;
};

/// The contract every decoding strategy programs against. Implementations
/// must be deterministic — identical (state, context) pairs yield bitwise
/// identical logits — and an absent context must behave exactly like the
/// empty string. Implementations are immutable after construction and safe
/// for concurrent generations.
class LogitBackend {
  public:
    virtual ~LogitBackend() = default;
    virtual const Vocabulary& vocabulary() const = 0;
    virtual LogitVector next_token_logits(const PromptState& state,
                                          const std::optional<std::string>& context) const = 0;
};

/// Desk-scale stand-in for a knowledge-grounded language model. Logits are
/// log(prior) + kappa * match_boost: the prior is near-uniform seeded noise
/// over value tokens (plus EOS), and a token is boosted iff it is the next
/// unemitted token of a value stated in the context on a line whose attribute
/// key equals the question's attribute — whichever entity the context is
/// about. Relevant contexts therefore help and conflicting ones mislead.
struct GroundedWorldModel {
    Vocabulary vocab;
    std::unordered_set<std::string> attributes;
    std::unordered_set<std::string> entities;
    std::vector<uint8_t> prior_support;  // per token id
    double kappa = 10.0;                 // boost strength
    double prior_temperature = 1.0;
    double noise_amplitude = 0.1;
    double floor_gap = 8.0;  // log-prior penalty for tokens outside the support
    uint64_t noise_seed = 0;
    /// entity -> attribute -> gold value string.
    std::unordered_map<std::string, std::unordered_map<std::string, std::string>> facts;

    /// Derives vocabulary, attribute/entity sets, and fact tables from any
    /// corpus whose documents carry "attribute: value" lines.
    static GroundedWorldModel from_corpus(const KnowledgeBase& kb,
                                          const std::vector<QueryRecord>& queries,
                                          double kappa = 10.0,
                                          double prior_temperature = 1.0,
                                          uint64_t noise_seed = 0);

    /// Width of the log-prior band over supported tokens.
    double prior_spread() const { return noise_amplitude / prior_temperature; }
};

/// Stateless logit computation for the grounded model. Throws
/// ContractViolation when the question does not parse as
/// "What is the <attribute> of <entity>?" or the prefix already ended.
LogitVector grounded_logits(const GroundedWorldModel& world, const PromptState& state,
                            const std::optional<std::string>& context);

class GroundedBackend final : public LogitBackend {
  public:
    explicit GroundedBackend(GroundedWorldModel model) : model_(std::move(model)) {}

    const Vocabulary& vocabulary() const override { return model_.vocab; }
    LogitVector next_token_logits(const PromptState& state,
                                  const std::optional<std::string>& context) const override {
        return grounded_logits(model_, state, context);
    }
    const GroundedWorldModel& model() const { return model_; }

  private:
    GroundedWorldModel model_;
};

}  // namespace ragdec
