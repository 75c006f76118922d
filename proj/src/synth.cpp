#include "ragdec/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "ragdec/errors.hpp"
#include "ragdec/rng.hpp"

namespace ragdec {

void SyntheticWorldSpec::validate() const {
    if (num_entities < 1) throw SpecError("num_entities must be positive");
    if (attributes_per_entity < 1) throw SpecError("attributes_per_entity must be positive");
    if (num_distractor_docs < 0) throw SpecError("num_distractor_docs must be >= 0");
    if (value_vocab_size < 1) throw SpecError("value_vocab_size must be positive");
    if (value_vocab_size < attributes_per_entity) {
        throw SpecError("value_vocab_size must be >= attributes_per_entity "
                        "(values must be distinguishable)");
    }
    if (value_tokens_min < 1 || value_tokens_max < value_tokens_min) {
        throw SpecError("invalid value token length range");
    }
    if (mention_rate < 0.0) throw SpecError("mention_rate must be >= 0");
    if (mention_repeat_rate < 0.0 || mention_repeat_rate > 1.0) {
        throw SpecError("mention_repeat_rate must lie in [0, 1]");
    }
    if (distractor_lines_min < 1 || distractor_lines_max < distractor_lines_min) {
        throw SpecError("invalid distractor line count range");
    }
}

namespace {

const char* const kSyllables[] = {
    "ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du", "fa", "fe",
    "fi", "fo", "fu", "ga", "ge", "gi", "go", "gu", "ka", "ke", "ki", "ko",
    "ku", "la", "le", "li", "lo", "lu", "ma", "me", "mi", "mo", "mu", "na",
    "ne", "ni", "no", "nu", "pa", "pe", "pi", "po", "pu", "ra", "re", "ri",
    "ro", "ru", "sa", "se", "si", "so", "su", "ta", "te", "ti", "to", "tu",
    "va", "ve", "vi", "vo", "vu", "za", "ze", "zi", "zo", "zu",
};
constexpr size_t kNumSyllables = sizeof(kSyllables) / sizeof(kSyllables[0]);

class WordForge {
  public:
    explicit WordForge(Rng& rng) : rng_(rng) {
        // Words that already occur in templates must never be re-minted.
        for (const char* w : {"what", "is", "the", "of", "see", "also",
                              "reference", "entry"}) {
            used_.insert(w);
        }
    }

    std::string fresh() {
        for (;;) {
            const int syllables = rng_.next_int(2, 3);
            std::string w;
            for (int i = 0; i < syllables; ++i) {
                w += kSyllables[rng_.next_below(kNumSyllables)];
            }
            if (used_.insert(w).second) return w;
        }
    }

  private:
    Rng& rng_;
    std::unordered_set<std::string> used_;
};

std::string format_id(const char* prefix, int width, int n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, n);
    return buf;
}

}  // namespace

SyntheticWorld synthesize_world(const SyntheticWorldSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng = derive_rng(seed, "synth-world");
    WordForge forge(rng);

    SyntheticWorld world;
    for (int a = 0; a < spec.attributes_per_entity; ++a) {
        world.attribute_names.push_back(forge.fresh());
    }
    for (int e = 0; e < spec.num_entities; ++e) {
        world.entity_names.push_back(forge.fresh());
    }
    for (int v = 0; v < spec.value_vocab_size; ++v) {
        world.value_lexicon.push_back(forge.fresh());
    }

    auto draw_value = [&](Rng& r, const std::string& head) {
        std::string value = head;
        const int len = r.next_int(spec.value_tokens_min, spec.value_tokens_max);
        for (int t = 1; t < len; ++t) {
            value += ' ';
            value += world.value_lexicon[r.next_below(world.value_lexicon.size())];
        }
        return value;
    };

    // Oracle documents and queries. Head words are drawn without replacement
    // within an entity so its attribute values stay distinguishable.
    std::vector<std::unordered_map<std::string, std::string>> facts(spec.num_entities);
    int qn = 0;
    for (int e = 0; e < spec.num_entities; ++e) {
        const std::string& entity = world.entity_names[e];
        std::unordered_set<size_t> used_heads;
        std::string text = entity + " reference entry";
        for (int a = 0; a < spec.attributes_per_entity; ++a) {
            size_t head;
            do {
                head = rng.next_below(world.value_lexicon.size());
            } while (!used_heads.insert(head).second);
            const std::string value = draw_value(rng, world.value_lexicon[head]);
            facts[e][world.attribute_names[a]] = value;
            text += "\n" + world.attribute_names[a] + ": " + value;

            QueryRecord q;
            q.qid = format_id("q", 5, qn++);
            q.question = "What is the " + world.attribute_names[a] + " of " + entity + "?";
            q.answers = {value};
            q.oracle_doc_id = format_id("e", 4, e);
            world.queries.push_back(std::move(q));
        }
        world.kb.add(Document{format_id("e", 4, e), entity, text, entity});
    }

    // Distractors, drawn from the continuing stream so a larger
    // num_distractor_docs extends rather than reshuffles the corpus.
    for (int d = 0; d < spec.num_distractor_docs; ++d) {
        const std::string subject = forge.fresh();

        int mention_count = static_cast<int>(spec.mention_rate);
        if (rng.next_double() < spec.mention_rate - mention_count) ++mention_count;
        mention_count = std::min(mention_count, spec.num_entities);
        std::unordered_set<int> mentioned;
        while (static_cast<int>(mentioned.size()) < mention_count) {
            mentioned.insert(static_cast<int>(rng.next_below(spec.num_entities)));
        }

        const int lines_lo = std::min(spec.distractor_lines_min, spec.attributes_per_entity);
        const int lines_hi = std::min(spec.distractor_lines_max, spec.attributes_per_entity);
        const int lines = rng.next_int(lines_lo, lines_hi);
        std::unordered_set<int> used_attrs;
        std::string text = subject + " reference entry";
        for (int l = 0; l < lines; ++l) {
            int a;
            do {
                a = static_cast<int>(rng.next_below(spec.attributes_per_entity));
            } while (!used_attrs.insert(a).second);
            const std::string& attr = world.attribute_names[a];
            // Conflict rule: the stated value must differ from the gold value
            // of every entity this document mentions. Bounded retry so tiny
            // value pools cannot stall generation.
            std::string value;
            for (int attempt = 0; attempt < 100; ++attempt) {
                value = draw_value(rng, world.value_lexicon[rng.next_below(
                                            world.value_lexicon.size())]);
                bool clash = false;
                for (int e : mentioned) {
                    if (facts[e][attr] == value) {
                        clash = true;
                        break;
                    }
                }
                if (!clash) break;
            }
            text += "\n" + attr + ": " + value;
        }

        if (!mentioned.empty()) {
            std::vector<int> order(mentioned.begin(), mentioned.end());
            std::sort(order.begin(), order.end());
            text += "\nsee also";
            for (int e : order) {
                text += " " + world.entity_names[e];
                if (rng.next_double() < spec.mention_repeat_rate) {
                    text += " " + world.entity_names[e];
                }
            }
        }
        world.kb.add(Document{format_id("d", 6, d), subject, text, subject});
    }
    return world;
}

}  // namespace ragdec
