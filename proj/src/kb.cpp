#include "ragdec/kb.hpp"

#include <fstream>

#include <json.hpp>

#include "ragdec/errors.hpp"
#include "ragdec/text.hpp"

namespace ragdec {

void KnowledgeBase::add(Document doc) {
    if (doc.text.empty()) {
        throw ContractViolation("document " + doc.id + " has empty text");
    }
    if (by_id_.contains(doc.id)) {
        throw ContractViolation("duplicate document id: " + doc.id);
    }
    const size_t idx = docs_.size();
    by_id_.emplace(doc.id, idx);

    auto tokens = tokenize(doc.title);
    auto body = tokenize(doc.text);
    tokens.insert(tokens.end(), body.begin(), body.end());

    std::unordered_map<std::string, int> counts;
    for (auto& t : tokens) ++counts[t];
    for (auto& [term, tf] : counts) {
        postings_[term].push_back(Posting{idx, tf});
    }
    lengths_.push_back(tokens.size());
    total_tokens_ += tokens.size();
    term_counts_.push_back(std::move(counts));
    docs_.push_back(std::move(doc));
}

size_t KnowledgeBase::find(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? npos : it->second;
}

int KnowledgeBase::doc_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : static_cast<int>(it->second.size());
}

const std::vector<KnowledgeBase::Posting>* KnowledgeBase::postings(
    const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

int KnowledgeBase::term_frequency(size_t doc_idx, const std::string& term) const {
    const auto& counts = term_counts_[doc_idx];
    auto it = counts.find(term);
    return it == counts.end() ? 0 : it->second;
}

double KnowledgeBase::avg_doc_length() const {
    if (docs_.empty()) return 0.0;
    return static_cast<double>(total_tokens_) / static_cast<double>(docs_.size());
}

namespace {

using nlohmann::json;

json parse_line(const std::string& line, size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ParseError("line " + std::to_string(lineno) + ": not a JSON object");
    }
    return j;
}

std::string require_string(const json& j, const char* field, size_t lineno) {
    if (!j.contains(field) || !j[field].is_string()) {
        throw ParseError("line " + std::to_string(lineno) + ": missing or non-string field \"" +
                         field + "\"");
    }
    return j[field].get<std::string>();
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string json_escape(const std::string& s) {
    return json(s).dump();
}

}  // namespace

KnowledgeBase ingest_kb(const std::filesystem::path& path) {
    auto in = open_in(path);
    KnowledgeBase kb;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, lineno);
        Document doc;
        doc.id = require_string(j, "id", lineno);
        doc.title = require_string(j, "title", lineno);
        doc.text = require_string(j, "text", lineno);
        doc.entity_id = require_string(j, "entity_id", lineno);
        try {
            kb.add(std::move(doc));
        } catch (const ContractViolation& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return kb;
}

void emit_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& d : kb.documents()) {
        out << "{\"id\":" << json_escape(d.id) << ",\"title\":" << json_escape(d.title)
            << ",\"text\":" << json_escape(d.text)
            << ",\"entity_id\":" << json_escape(d.entity_id) << "}\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<QueryRecord> ingest_queries(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<QueryRecord> queries;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, lineno);
        QueryRecord q;
        q.qid = require_string(j, "qid", lineno);
        q.question = require_string(j, "question", lineno);
        q.oracle_doc_id = require_string(j, "oracle_doc_id", lineno);
        if (!j.contains("answers") || !j["answers"].is_array() || j["answers"].empty()) {
            throw ParseError("line " + std::to_string(lineno) +
                             ": \"answers\" must be a non-empty array");
        }
        for (const auto& a : j["answers"]) {
            if (!a.is_string()) {
                throw ParseError("line " + std::to_string(lineno) +
                                 ": answers must be strings");
            }
            q.answers.push_back(a.get<std::string>());
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

void emit_queries(const std::vector<QueryRecord>& queries,
                  const std::filesystem::path& path) {
    auto out = open_out(path);
    for (const auto& q : queries) {
        out << "{\"qid\":" << json_escape(q.qid)
            << ",\"question\":" << json_escape(q.question) << ",\"answers\":[";
        for (size_t i = 0; i < q.answers.size(); ++i) {
            if (i) out << ',';
            out << json_escape(q.answers[i]);
        }
        out << "],\"oracle_doc_id\":" << json_escape(q.oracle_doc_id) << "}\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ragdec
