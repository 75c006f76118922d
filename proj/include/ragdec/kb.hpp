#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace ragdec {

struct Document {
    std::string id;
    std::string title;
    std::string text;
    std::string entity_id;
};

struct QueryRecord {
    std::string qid;
    std::string question;
    std::vector<std::string> answers;
    std::string oracle_doc_id;
};

/// Indexed document collection. Token statistics (document frequencies,
/// lengths, postings) are maintained on every add, so they are always
/// consistent with the stored documents. Immutable in practice after
/// ingestion; all read paths are safe for concurrent use.
class KnowledgeBase {
  public:
    struct Posting {
        size_t doc_idx;
        int tf;
    };

    /// Adds a document; throws ContractViolation on duplicate id or empty text.
    void add(Document doc);

    size_t size() const { return docs_.size(); }
    const Document& doc(size_t idx) const { return docs_[idx]; }
    const std::vector<Document>& documents() const { return docs_; }
    /// Index of the document with this id, or npos.
    size_t find(const std::string& id) const;
    static constexpr size_t npos = static_cast<size_t>(-1);

    int doc_frequency(const std::string& term) const;
    const std::vector<Posting>* postings(const std::string& term) const;
    int term_frequency(size_t doc_idx, const std::string& term) const;
    size_t doc_length(size_t idx) const { return lengths_[idx]; }
    double avg_doc_length() const;

  private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, size_t> by_id_;
    std::vector<std::unordered_map<std::string, int>> term_counts_;
    std::vector<size_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    size_t total_tokens_ = 0;
};

// JSONL persistence. One object per line; emit writes fields in a fixed
// order so ingest/emit round-trips are byte-identical.
//   KB:  {"id":..., "title":..., "text":..., "entity_id":...}
//   QA:  {"qid":..., "question":..., "answers":[...], "oracle_doc_id":...}

KnowledgeBase ingest_kb(const std::filesystem::path& path);
void emit_kb(const KnowledgeBase& kb, const std::filesystem::path& path);

std::vector<QueryRecord> ingest_queries(const std::filesystem::path& path);
void emit_queries(const std::vector<QueryRecord>& queries,
                  const std::filesystem::path& path);

}  // namespace ragdec
