#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "protoflow/backends.hpp"
#include "protoflow/kb.hpp"

namespace protoflow {

/// dot(a,b) / (|a| |b|). Throws on dimension mismatch or a zero-norm input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

struct RetrievalConfig {
    int k = 2;
};

struct Hit {
    std::string record_id;
    double score = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

/// Hits in non-increasing score order, ties by ascending id.
struct RetrievalResult {
    std::vector<Hit> hits;
};

/// Exact cosine index. Vectors are stored contiguously; immutable once built,
/// so concurrent queries are safe.
class Index {
public:
    /// Embeds each text; an embedder failure is rethrown naming the id.
    static Index build(const std::vector<std::pair<std::string, std::string>>& texts, TextEmbedder& embedder);
    static Index from_vectors(std::vector<std::pair<std::string, EmbeddingVector>> entries);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    std::span<const double> vector(std::size_t i) const;

    RetrievalResult top_k(const EmbeddingVector& query, const RetrievalConfig& config) const;

private:
    std::vector<std::string> ids_;
    std::vector<double> data_;
    std::vector<double> norms_;
    std::size_t dimension_ = 0;
};

/// Query text for a design input: the prompt, then the layout in the same
/// "<Type> [x,y,w,h]" lines the knowledge texts use.
std::string retrieval_query_text(const std::string& prompt, const Layout& layout);

/// Index over knowledge records keyed by record id, plus the records.
class KnowledgeIndex {
public:
    KnowledgeIndex(std::vector<KnowledgeRecord> records, TextEmbedder& embedder);

    const Index& index() const noexcept { return index_; }
    const std::vector<KnowledgeRecord>& records() const noexcept { return records_; }
    /// Throws NotFoundError for an unknown id.
    const KnowledgeRecord& record(const std::string& id) const;

private:
    std::vector<KnowledgeRecord> records_;
    std::unordered_map<std::string, std::size_t> by_id_;
    Index index_;
};

/// Phrase index over an icon base; entries are keyed by icon id.
class IconIndex {
public:
    IconIndex(std::vector<IconRecord> icons, TextEmbedder& embedder);

    const Index& index() const noexcept { return index_; }
    const std::vector<IconRecord>& icons() const noexcept { return icons_; }
    const IconRecord& icon(const std::string& id) const;

private:
    std::vector<IconRecord> icons_;
    std::unordered_map<std::string, std::size_t> by_id_;
    Index index_;
};

/// Top-1 icon by cosine similarity between the embedded phrase and the icon phrases.
const IconRecord& retrieve_icon(const IconIndex& icons, std::string_view phrase, TextEmbedder& embedder);

}  // namespace protoflow
