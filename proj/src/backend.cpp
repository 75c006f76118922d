#include "ragdec/backend.hpp"

#include <algorithm>
#include <set>

#include "ragdec/errors.hpp"
#include "ragdec/rng.hpp"
#include "ragdec/text.hpp"

namespace ragdec {

Vocabulary::Vocabulary(std::vector<std::string> words) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    if (words.size() + 3 > kMaxSize) {
        throw SpecError("vocabulary exceeds " + std::to_string(kMaxSize) + " tokens");
    }
    tokens_ = {"<bos>", "<eos>", "<unk>"};
    tokens_.insert(tokens_.end(), words.begin(), words.end());
    for (size_t i = 0; i < tokens_.size(); ++i) {
        by_word_.emplace(tokens_[i], static_cast<TokenId>(i));
    }
}

TokenId Vocabulary::find(const std::string& word) const {
    auto it = by_word_.find(word);
    return it == by_word_.end() ? kUnk : it->second;
}

namespace {

struct AttrLine {
    std::string key;                  // single-token attribute name
    std::vector<std::string> values;  // tokenized value words
};

/// Attribute lines are "key: value ..." with a single-token key; anything
/// else in the text is ignored.
std::vector<AttrLine> parse_attr_lines(std::string_view text) {
    std::vector<AttrLine> lines;
    for (auto line : split_lines(text)) {
        const size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        auto key_tokens = tokenize(line.substr(0, colon));
        if (key_tokens.size() != 1) continue;
        auto value_tokens = tokenize(line.substr(colon + 1));
        if (value_tokens.empty()) continue;
        lines.push_back(AttrLine{std::move(key_tokens[0]), std::move(value_tokens)});
    }
    return lines;
}

double token_noise(const GroundedWorldModel& world, uint64_t question_hash, TokenId v) {
    const uint64_t bits = splitmix64(world.noise_seed ^ question_hash ^
                                     (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(v + 1)));
    return world.noise_amplitude * unit_double(bits);
}

}  // namespace

GroundedWorldModel GroundedWorldModel::from_corpus(const KnowledgeBase& kb,
                                                   const std::vector<QueryRecord>& queries,
                                                   double kappa, double prior_temperature,
                                                   uint64_t noise_seed) {
    if (kappa <= 0.0) throw SpecError("kappa must be positive");
    if (prior_temperature <= 0.0) throw SpecError("prior temperature must be positive");

    GroundedWorldModel model;
    model.kappa = kappa;
    model.prior_temperature = prior_temperature;
    model.noise_seed = noise_seed;

    std::set<std::string> words;        // sorted for a stable vocabulary
    std::set<std::string> value_words;  // prior support
    for (const auto& doc : kb.documents()) {
        for (const auto& line : parse_attr_lines(doc.text)) {
            model.attributes.insert(line.key);
            words.insert(line.key);
            for (const auto& w : line.values) {
                value_words.insert(w);
                words.insert(w);
            }
        }
    }
    for (const auto& q : queries) {
        for (const auto& tok : tokenize(q.question)) words.insert(tok);
        const auto toks = tokenize(q.question);
        if (toks.size() == 6) model.entities.insert(toks[5]);
    }

    model.vocab = Vocabulary(std::vector<std::string>(words.begin(), words.end()));
    model.prior_support.assign(model.vocab.size(), 0);
    model.prior_support[Vocabulary::kEos] = 1;
    for (const auto& w : value_words) {
        model.prior_support[model.vocab.find(w)] = 1;
    }

    for (const auto& q : queries) {
        const auto toks = tokenize(q.question);
        if (toks.size() != 6 || q.answers.empty()) continue;
        model.facts[toks[5]][toks[3]] = normalize_answer(q.answers.front());
    }
    return model;
}

LogitVector grounded_logits(const GroundedWorldModel& world, const PromptState& state,
                            const std::optional<std::string>& context) {
    for (size_t i = 0; i < state.prefix.size(); ++i) {
        if (state.prefix[i] == Vocabulary::kEos) {
            throw ContractViolation("prefix already ended with <eos>");
        }
    }

    const auto toks = tokenize(state.question);
    const bool shaped = toks.size() == 6 && toks[0] == "what" && toks[1] == "is" &&
                        toks[2] == "the" && toks[4] == "of";
    if (!shaped || !world.attributes.contains(toks[3]) || !world.entities.contains(toks[5])) {
        throw ContractViolation("question does not match \"What is the <attribute> of <entity>?\"");
    }
    const std::string& attribute = toks[3];

    const uint64_t qhash = fnv1a64(state.question);
    const int vsize = world.vocab.size();
    std::vector<double> logits(vsize);
    for (TokenId v = 0; v < vsize; ++v) {
        if (v == Vocabulary::kBos || v == Vocabulary::kUnk) {
            logits[v] = -50.0;  // never emitted
            continue;
        }
        double log_prior = token_noise(world, qhash, v);
        if (!world.prior_support[v]) log_prior -= world.floor_gap;
        logits[v] = log_prior / world.prior_temperature;
    }

    if (context && !context->empty()) {
        // 0/1 indicator: repeated statements of the same value do not stack.
        std::vector<uint8_t> boost(vsize, 0);
        for (const auto& line : parse_attr_lines(*context)) {
            if (line.key != attribute) continue;
            // Candidate value: boost its next unemitted token, or EOS once the
            // whole value has been generated.
            if (state.prefix.size() > line.values.size()) continue;
            bool matches = true;
            for (size_t i = 0; i < state.prefix.size(); ++i) {
                const TokenId want = world.vocab.find(line.values[i]);
                if (want == Vocabulary::kUnk || state.prefix[i] != want) {
                    matches = false;
                    break;
                }
            }
            if (!matches) continue;
            if (state.prefix.size() == line.values.size()) {
                boost[Vocabulary::kEos] = 1;
            } else {
                const TokenId next = world.vocab.find(line.values[state.prefix.size()]);
                if (next != Vocabulary::kUnk) boost[next] = 1;
            }
        }
        for (TokenId v = 0; v < vsize; ++v) {
            if (boost[v]) logits[v] += world.kappa;
        }
    }
    return LogitVector(std::move(logits));
}

}  // namespace ragdec
