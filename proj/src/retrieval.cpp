#include "ragdec/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "ragdec/errors.hpp"
#include "ragdec/text.hpp"

namespace ragdec {

bool RetrievedContextSet::has_sentinel() const {
    return std::any_of(contexts.begin(), contexts.end(),
                       [](const ScoredContext& c) { return c.is_sentinel(); });
}

void RetrievedContextSet::validate() const {
    std::unordered_set<std::string> seen;
    int sentinels = 0;
    for (size_t i = 0; i < contexts.size(); ++i) {
        const auto& c = contexts[i];
        if (i > 0 && contexts[i - 1].score < c.score) {
            throw ContractViolation("context scores not non-increasing");
        }
        if (c.is_sentinel()) {
            ++sentinels;
            if (!c.text.empty()) throw ContractViolation("sentinel with non-empty text");
        } else {
            if (c.text.empty()) throw ContractViolation("empty text on non-sentinel context");
            if (!seen.insert(c.doc_id).second) {
                throw ContractViolation("duplicate doc id in context set: " + c.doc_id);
            }
        }
    }
    if (sentinels > 1) throw ContractViolation("more than one sentinel");
    if (sentinels == 1 && contexts.back().score == kNegInf && !contexts.back().is_sentinel()) {
        throw ContractViolation("-inf sentinel must sort last");
    }
}

namespace {

double idf(const KnowledgeBase& kb, const std::string& term) {
    const double n = static_cast<double>(kb.size());
    const double df = static_cast<double>(kb.doc_frequency(term));
    const double raw = std::log((n - df + 0.5) / (df + 0.5));
    return std::max(0.0, raw);
}

double tf_saturation(double tf, double dl, double avgdl, const Bm25Params& p) {
    const double norm = avgdl > 0.0 ? dl / avgdl : 0.0;
    return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

std::vector<std::string> unique_query_terms(const std::string& question) {
    auto terms = tokenize(question);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    return terms;
}

}  // namespace

double bm25_score_idx(const std::string& question, size_t doc_idx,
                      const KnowledgeBase& kb, const Bm25Params& params) {
    if (kb.size() == 0) return 0.0;
    const double dl = static_cast<double>(kb.doc_length(doc_idx));
    const double avgdl = kb.avg_doc_length();
    double score = 0.0;
    for (const auto& term : unique_query_terms(question)) {
        const int tf = kb.term_frequency(doc_idx, term);
        if (tf == 0) continue;
        score += idf(kb, term) * tf_saturation(tf, dl, avgdl, params);
    }
    return score;
}

double bm25_score(const std::string& question, const Document& doc,
                  const KnowledgeBase& kb, const Bm25Params& params) {
    const size_t idx = kb.find(doc.id);
    if (idx == KnowledgeBase::npos) {
        throw ContractViolation("document " + doc.id + " is not in the knowledge base");
    }
    return bm25_score_idx(question, idx, kb, params);
}

RetrievedContextSet retrieve(const KnowledgeBase& kb, const std::string& question,
                             int n, const Bm25Params& params) {
    if (n < 1) throw ContractViolation("retrieve: n must be >= 1");

    // Accumulate scores over postings of the query terms; documents sharing
    // no term stay at zero and are only used to fill up short results.
    std::unordered_map<size_t, double> acc;
    const double avgdl = kb.avg_doc_length();
    for (const auto& term : unique_query_terms(question)) {
        const auto* plist = kb.postings(term);
        if (!plist) continue;
        const double w = idf(kb, term);
        if (w == 0.0) continue;
        for (const auto& post : *plist) {
            acc[post.doc_idx] += w * tf_saturation(static_cast<double>(post.tf),
                                                   static_cast<double>(kb.doc_length(post.doc_idx)),
                                                   avgdl, params);
        }
    }

    std::vector<std::pair<size_t, double>> ranked(acc.begin(), acc.end());
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return kb.doc(a.first).id < kb.doc(b.first).id;
    });

    const size_t want = std::min<size_t>(static_cast<size_t>(n), kb.size());
    RetrievedContextSet out;
    out.contexts.reserve(want);
    for (const auto& [idx, score] : ranked) {
        if (out.contexts.size() == want) break;
        const auto& d = kb.doc(idx);
        out.contexts.push_back(ScoredContext{d.id, d.title + "\n" + d.text, score});
    }

    if (out.contexts.size() < want) {
        // Zero-score fill, in id order; equivalent to dense scoring with the
        // same (score desc, id asc) tie-break.
        std::set<std::string> taken;
        for (const auto& c : out.contexts) taken.insert(c.doc_id);
        std::vector<size_t> rest;
        for (size_t i = 0; i < kb.size(); ++i) {
            if (!acc.contains(i) && !taken.contains(kb.doc(i).id)) rest.push_back(i);
        }
        std::sort(rest.begin(), rest.end(), [&](size_t a, size_t b) {
            return kb.doc(a).id < kb.doc(b).id;
        });
        for (size_t idx : rest) {
            if (out.contexts.size() == want) break;
            const auto& d = kb.doc(idx);
            out.contexts.push_back(ScoredContext{d.id, d.title + "\n" + d.text, 0.0});
        }
        // Zero-scored accumulator entries (possible when idf vanished) rank by id
        // among the fill; the sort above already handled accumulated ones.
    }
    return out;
}

double recall_at_k(std::span<const RetrievedContextSet> retrievals,
                   std::span<const QueryRecord> queries, int k) {
    if (retrievals.size() != queries.size()) {
        throw ContractViolation("recall_at_k: retrievals and queries differ in length");
    }
    if (queries.empty()) return 0.0;
    size_t hits = 0;
    for (size_t i = 0; i < queries.size(); ++i) {
        const auto& set = retrievals[i];
        const size_t top = std::min<size_t>(static_cast<size_t>(k), set.size());
        for (size_t j = 0; j < top; ++j) {
            if (set[j].doc_id == queries[i].oracle_doc_id) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

RetrievedContextSet inject_oracle(const RetrievedContextSet& set, ScoredContext oracle) {
    if (set.empty()) throw ContractViolation("inject_oracle: empty context set");
    if (set.has_sentinel()) throw ContractViolation("inject_oracle: set already augmented");

    std::vector<ScoredContext> rest;
    rest.reserve(set.size());
    bool removed_existing = false;
    for (const auto& c : set.contexts) {
        if (!removed_existing && c.doc_id == oracle.doc_id) {
            removed_existing = true;
            continue;
        }
        rest.push_back(c);
    }
    if (!removed_existing && !rest.empty()) rest.pop_back();  // drop the least relevant

    if (!rest.empty()) oracle.score = rest.front().score;  // fair-score rule
    RetrievedContextSet out;
    out.contexts.push_back(std::move(oracle));
    out.contexts.insert(out.contexts.end(), rest.begin(), rest.end());
    return out;
}

}  // namespace ragdec
