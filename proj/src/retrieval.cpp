#include "protoflow/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "protoflow/error.hpp"

namespace protoflow {

namespace {

double sum_squares(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Shared by cosine_similarity and Index::top_k so scores agree bit for bit.
double cosine_with_norms(std::span<const double> a, double norm_a, std::span<const double> b, double norm_b) {
    return dot(a, b) / (norm_a * norm_b);
}

void check_vector(std::span<const double> v, std::size_t dimension, const std::string& what) {
    if (v.size() != dimension)
        throw ValidationError(what + " has dimension " + std::to_string(v.size()) + ", expected " +
                              std::to_string(dimension));
    for (double x : v)
        if (!std::isfinite(x)) throw ValidationError(what + " has a non-finite entry");
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    const double na = std::sqrt(sum_squares(a));
    const double nb = std::sqrt(sum_squares(b));
    if (na == 0.0 || nb == 0.0) throw ValidationError("cosine_similarity: zero-norm vector");
    return cosine_with_norms(a, na, b, nb);
}

Index Index::from_vectors(std::vector<std::pair<std::string, EmbeddingVector>> entries) {
    Index index;
    if (entries.empty()) return index;
    index.dimension_ = entries.front().second.dimension();
    if (index.dimension_ == 0) throw ValidationError("embedding dimension must be positive");
    std::set<std::string> seen;
    index.ids_.reserve(entries.size());
    index.data_.reserve(entries.size() * index.dimension_);
    index.norms_.reserve(entries.size());
    for (auto& [id, vec] : entries) {
        if (!seen.insert(id).second) throw ValidationError("duplicate id '" + id + "' in index");
        check_vector(vec.values, index.dimension_, "vector '" + id + "'");
        const double norm = std::sqrt(sum_squares(vec.values));
        if (norm == 0.0) throw ValidationError("vector '" + id + "' has zero norm");
        index.ids_.push_back(std::move(id));
        index.data_.insert(index.data_.end(), vec.values.begin(), vec.values.end());
        index.norms_.push_back(norm);
    }
    return index;
}

Index Index::build(const std::vector<std::pair<std::string, std::string>>& texts, TextEmbedder& embedder) {
    std::set<std::string> seen;
    for (const auto& [id, text] : texts)
        if (!seen.insert(id).second) throw ValidationError("duplicate id '" + id + "' in index");
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(texts.size());
    for (const auto& [id, text] : texts) {
        try {
            entries.emplace_back(id, embedder.embed_text(text));
        } catch (const BackendError& e) {
            throw BackendError("embedding failed for '" + id + "': " + e.what(), e.retryable());
        } catch (const Error& e) {
            throw Error("embedding failed for '" + id + "': " + e.what());
        }
    }
    return from_vectors(std::move(entries));
}

std::span<const double> Index::vector(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dimension_, dimension_);
}

RetrievalResult Index::top_k(const EmbeddingVector& query, const RetrievalConfig& config) const {
    if (config.k < 1) throw ValidationError("k must be >= 1", "k");
    if (ids_.empty()) throw ValidationError("cannot query an empty index");
    check_vector(query.values, dimension_, "query");
    const double qnorm = std::sqrt(sum_squares(query.values));
    if (qnorm == 0.0) throw ValidationError("query has zero norm");

    std::vector<double> scores(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) scores[i] = cosine_with_norms(query.values, qnorm, vector(i), norms_[i]);

    std::vector<std::size_t> order(ids_.size());
    std::iota(order.begin(), order.end(), 0);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.k), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return ids_[a] < ids_[b];
                      });
    RetrievalResult result;
    result.hits.reserve(k);
    for (std::size_t i = 0; i < k; ++i) result.hits.push_back({ids_[order[i]], scores[order[i]]});
    return result;
}

std::string retrieval_query_text(const std::string& prompt, const Layout& layout) {
    return prompt + "\n" + serialize_layout_lines(layout);
}

KnowledgeIndex::KnowledgeIndex(std::vector<KnowledgeRecord> records, TextEmbedder& embedder)
    : records_(std::move(records)) {
    std::vector<std::pair<std::string, std::string>> texts;
    texts.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        texts.emplace_back(records_[i].id, knowledge_record_to_text(records_[i]));
        by_id_.emplace(records_[i].id, i);
    }
    index_ = Index::build(texts, embedder);
}

const KnowledgeRecord& KnowledgeIndex::record(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw NotFoundError("knowledge record '" + id + "' not found");
    return records_[it->second];
}

IconIndex::IconIndex(std::vector<IconRecord> icons, TextEmbedder& embedder) : icons_(std::move(icons)) {
    std::vector<std::pair<std::string, std::string>> texts;
    texts.reserve(icons_.size());
    for (std::size_t i = 0; i < icons_.size(); ++i) {
        texts.emplace_back(icons_[i].id, icons_[i].phrase);
        by_id_.emplace(icons_[i].id, i);
    }
    index_ = Index::build(texts, embedder);
}

const IconRecord& IconIndex::icon(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) throw NotFoundError("icon '" + id + "' not found");
    return icons_[it->second];
}

const IconRecord& retrieve_icon(const IconIndex& icons, std::string_view phrase, TextEmbedder& embedder) {
    if (icons.icons().empty()) throw ValidationError("icon base is empty");
    const auto query = embedder.embed_text(phrase);
    const auto result = icons.index().top_k(query, RetrievalConfig{1});
    return icons.icon(result.hits.front().record_id);
}

}  // namespace protoflow
