#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdf/chunker.hpp"
#include "mdf/text.hpp"

namespace mdf {

/// Inverted index over the whole corpus (all documents jointly).
struct Bm25Index {
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings;
    std::vector<std::uint32_t> doc_lengths;  // ordinal -> token count
    std::vector<std::string> chunk_ids;      // ordinal -> chunk_id
    double avg_doc_length = 0.0;
    double k1 = 1.2;
    double b = 0.75;

    std::size_t n_docs() const { return doc_lengths.size(); }

    double idf(const std::string& term) const {
        const auto it = postings.find(term);
        const double df = it == postings.end() ? 0.0 : static_cast<double>(it->second.size());
        const double n = static_cast<double>(n_docs());
        return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
    }
};

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;

    bool operator==(const RetrievalHit&) const = default;
};

struct RetrievalResult {
    std::string query_id;
    std::vector<RetrievalHit> hits;  // descending score, ties by ascending chunk_id
};

inline Bm25Index build_bm25_index(const std::vector<Chunk>& chunks, double k1 = 1.2,
                                  double b = 0.75) {
    if (k1 <= 0) throw ValidationError("bm25: k1 must be > 0");
    if (b < 0 || b > 1) throw ValidationError("bm25: b must be in [0, 1]");
    Bm25Index index;
    index.k1 = k1;
    index.b = b;
    std::uint64_t total = 0;
    for (const Chunk& chunk : chunks) {
        const auto ordinal = static_cast<std::uint32_t>(index.chunk_ids.size());
        index.chunk_ids.push_back(chunk.chunk_id);
        std::map<std::string, std::uint32_t> tf;
        std::uint32_t len = 0;
        for (const std::string& term : search_tokens(chunk.text)) {
            ++tf[term];
            ++len;
        }
        index.doc_lengths.push_back(len);
        total += len;
        for (const auto& [term, count] : tf) index.postings[term].push_back({ordinal, count});
    }
    if (total == 0) throw ValidationError("bm25: corpus is empty after tokenization");
    index.avg_doc_length = static_cast<double>(total) / static_cast<double>(chunks.size());
    return index;
}

/// Top-k by BM25 score; zero-score chunks are never returned. Query tokens
/// contribute once per occurrence.
inline RetrievalResult query(const Bm25Index& index, std::string_view question, int k,
                             std::string query_id = "") {
    if (k < 1) throw ValidationError("bm25: k must be >= 1");
    RetrievalResult result;
    result.query_id = std::move(query_id);

    std::unordered_map<std::uint32_t, double> scores;
    for (const std::string& term : search_tokens(question)) {
        const auto it = index.postings.find(term);
        if (it == index.postings.end()) continue;
        const double idf = index.idf(term);
        for (const auto& [ordinal, tf] : it->second) {
            const double len = static_cast<double>(index.doc_lengths[ordinal]);
            const double denom =
                tf + index.k1 * (1.0 - index.b + index.b * len / index.avg_doc_length);
            scores[ordinal] += idf * (tf * (index.k1 + 1.0)) / denom;
        }
    }

    std::vector<RetrievalHit> hits;
    hits.reserve(scores.size());
    for (const auto& [ordinal, score] : scores) {
        if (score > 0.0) hits.push_back({index.chunk_ids[ordinal], score});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
    result.hits = std::move(hits);
    return result;
}

inline json bm25_index_to_json(const Bm25Index& index) {
    json out;
    out["k1"] = index.k1;
    out["b"] = index.b;
    out["avg_doc_length"] = index.avg_doc_length;
    out["chunk_ids"] = index.chunk_ids;
    out["doc_lengths"] = index.doc_lengths;
    json postings = json::object();
    for (const auto& [term, rows] : index.postings) {
        json list = json::array();
        for (const auto& [ordinal, tf] : rows) list.push_back(json::array({ordinal, tf}));
        postings[term] = std::move(list);
    }
    out["postings"] = std::move(postings);
    return out;
}

inline Bm25Index bm25_index_from_json(const json& j) {
    Bm25Index index;
    index.k1 = j.at("k1").get<double>();
    index.b = j.at("b").get<double>();
    index.avg_doc_length = j.at("avg_doc_length").get<double>();
    index.chunk_ids = j.at("chunk_ids").get<std::vector<std::string>>();
    index.doc_lengths = j.at("doc_lengths").get<std::vector<std::uint32_t>>();
    if (index.chunk_ids.size() != index.doc_lengths.size()) {
        throw ValidationError("bm25 index: chunk_ids and doc_lengths disagree");
    }
    for (const auto& [term, rows] : j.at("postings").items()) {
        auto& list = index.postings[term];
        for (const json& row : rows) {
            const auto ordinal = row.at(0).get<std::uint32_t>();
            if (ordinal >= index.chunk_ids.size()) {
                throw ValidationError("bm25 index: posting ordinal out of range");
            }
            list.push_back({ordinal, row.at(1).get<std::uint32_t>()});
        }
    }
    return index;
}

}  // namespace mdf
