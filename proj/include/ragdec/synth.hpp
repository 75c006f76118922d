#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ragdec/kb.hpp"

namespace ragdec {

/// Parameters of a generated question-answering world. One oracle document
/// per entity lists "attribute: value" lines; distractor documents describe
/// made-up subjects with conflicting values for the same attribute names and
/// may mention real entities, which is what degrades retrieval as the
/// distractor count grows.
struct SyntheticWorldSpec {
    int num_entities = 50;
    int attributes_per_entity = 10;
    int num_distractor_docs = 974;
    int value_vocab_size = 64;
    int value_tokens_min = 1;
    int value_tokens_max = 3;
    /// Mean number of distinct real entities mentioned per distractor.
    /// 0 keeps every distractor retrieval-invisible (scores 0 for all queries).
    double mention_rate = 0.8;
    /// Chance that a mentioned entity is named twice instead of once.
    double mention_repeat_rate = 0.35;
    int distractor_lines_min = 2;
    int distractor_lines_max = 4;

    void validate() const;  // throws SpecError
};

struct SyntheticWorld {
    KnowledgeBase kb;
    std::vector<QueryRecord> queries;
    std::vector<std::string> entity_names;
    std::vector<std::string> attribute_names;
    std::vector<std::string> value_lexicon;
};

/// Deterministic under (spec, seed). Worlds that differ only in
/// num_distractor_docs share entities, queries, and their common distractor
/// prefix, so growing the distractor count strictly enlarges the same KB.
SyntheticWorld synthesize_world(const SyntheticWorldSpec& spec, uint64_t seed);

}  // namespace ragdec
