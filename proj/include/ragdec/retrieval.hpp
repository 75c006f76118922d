#pragma once

#include <span>
#include <string>
#include <vector>

#include "ragdec/kb.hpp"
#include "ragdec/numerics.hpp"

namespace ragdec {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// One retrieved context. The empty-context sentinel has empty doc_id and
/// text; its score is -inf as produced by the decoder's default augmentation
/// (other augmentation modes may assign it a finite score).
struct ScoredContext {
    std::string doc_id;
    std::string text;
    double score = 0.0;

    bool is_sentinel() const { return doc_id.empty(); }
    static ScoredContext sentinel(double score = kNegInf) {
        return ScoredContext{"", "", score};
    }
};

/// Score-sorted context list. Invariants: scores non-increasing, no duplicate
/// doc ids among real contexts, at most one sentinel.
struct RetrievedContextSet {
    std::vector<ScoredContext> contexts;

    size_t size() const { return contexts.size(); }
    bool empty() const { return contexts.empty(); }
    const ScoredContext& operator[](size_t i) const { return contexts[i]; }
    bool has_sentinel() const;

    /// Throws ContractViolation if an invariant is broken.
    void validate() const;
};

/// Okapi BM25 of the question against one KB document, idf clamped at >= 0.
/// Unique query terms each contribute idf * tf*(k1+1) / (tf + k1*(1-b+b*dl/avgdl)).
/// No shared terms yields 0.
double bm25_score(const std::string& question, const Document& doc,
                  const KnowledgeBase& kb, const Bm25Params& params = {});
double bm25_score_idx(const std::string& question, size_t doc_idx,
                      const KnowledgeBase& kb, const Bm25Params& params = {});

/// Top-n documents by BM25, descending; ties broken by lexicographically
/// smaller doc id. When fewer than n documents score above zero the set is
/// filled with zero-scored documents in id order, so the result always has
/// min(n, kb.size()) entries. No sentinel is appended here.
RetrievedContextSet retrieve(const KnowledgeBase& kb, const std::string& question,
                             int n, const Bm25Params& params = {});

/// Fraction of queries whose oracle document appears in the top k.
double recall_at_k(std::span<const RetrievedContextSet> retrievals,
                   std::span<const QueryRecord> queries, int k);

/// Perfect-retriever protocol: drop the oracle if already present (otherwise
/// the lowest-scored context), shift the rest down one rank, and place the
/// oracle at rank 1 with the new rank-2 score. The input must not contain a
/// sentinel and must be non-empty.
RetrievedContextSet inject_oracle(const RetrievedContextSet& set, ScoredContext oracle);

}  // namespace ragdec
