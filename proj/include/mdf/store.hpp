#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "mdf/bm25.hpp"
#include "mdf/chunker.hpp"
#include "mdf/hierarchy.hpp"
#include "mdf/layout.hpp"
#include "mdf/metrics.hpp"

namespace mdf {

namespace fs = std::filesystem;

inline std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
    return std::move(buf).str();
}

/// Write-temp-then-rename; no partially written artifact is ever visible.
inline void write_text_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed on '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename '" + tmp.string() + "' -> '" + path.string() + "': " +
                          ec.message());
}

namespace detail {

/// Format tags look like "mdf-chunks/1"; the number is the major version.
inline void check_format(const std::string& tag, std::string_view name, int supported_major,
                         const fs::path& path) {
    const std::size_t slash = tag.rfind('/');
    const std::string base = slash == std::string::npos ? tag : tag.substr(0, slash);
    int major = -1;
    if (slash != std::string::npos) {
        try {
            major = std::stoi(tag.substr(slash + 1));
        } catch (const std::exception&) {
            major = -1;
        }
    }
    if (base != name || major < 0) {
        throw VersionError("'" + path.string() + "': expected format '" + std::string(name) +
                           "/" + std::to_string(supported_major) + "', found '" + tag + "'");
    }
    if (major > supported_major) {
        throw VersionError("'" + path.string() + "': format '" + tag +
                           "' is newer than supported major " + std::to_string(supported_major));
    }
}

inline json parse_json(std::string_view bytes, const fs::path& path) {
    try {
        return json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path.string() + "': JSON parse error at byte " +
                         std::to_string(e.byte) + ": " + e.what());
    }
}

inline std::string format_tag(std::string_view name, int major) {
    return std::string(name) + "/" + std::to_string(major);
}

/// document_id -> filesystem-safe name (percent-encodes everything outside
/// [A-Za-z0-9._-]); injective, so distinct ids never collide.
inline std::string safe_file_name(std::string_view id) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (const char c : id) {
        const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                          (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (safe && !(c == '.' && out.empty())) {
            out += c;
        } else {
            out += '%';
            out += hex[(static_cast<unsigned char>(c) >> 4) & 0xF];
            out += hex[static_cast<unsigned char>(c) & 0xF];
        }
    }
    return out;
}

}  // namespace detail

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

/// Hash of sorted per-document hashes: stable under file reordering,
/// sensitive to any content edit.
inline std::string corpus_digest(std::vector<std::string> per_document_hashes) {
    std::sort(per_document_hashes.begin(), per_document_hashes.end());
    std::string joined;
    for (const std::string& h : per_document_hashes) joined += h;
    return sha256_hex(joined);
}

// --- chunks.jsonl ---

inline constexpr std::string_view kChunksFormat = "mdf-chunks";
inline constexpr int kChunksMajor = 1;

inline json chunk_to_json(const Chunk& chunk) {
    json out;
    out["chunk_id"] = chunk.chunk_id;
    out["document_id"] = chunk.document_id;
    out["text"] = chunk.text;
    out["source_node_ids"] = chunk.source_node_ids;
    out["split_index"] = chunk.split_index;
    out["token_count"] = chunk.token_count;
    if (chunk.oversize) out["oversize"] = true;
    return out;
}

inline Chunk chunk_from_json(const json& j) {
    Chunk chunk;
    chunk.chunk_id = j.at("chunk_id").get<std::string>();
    chunk.document_id = j.at("document_id").get<std::string>();
    chunk.text = j.at("text").get<std::string>();
    chunk.source_node_ids = j.at("source_node_ids").get<std::vector<std::string>>();
    chunk.split_index = j.at("split_index").get<int>();
    chunk.token_count = j.at("token_count").get<int>();
    chunk.oversize = j.value("oversize", false);
    return chunk;
}

inline void write_chunks(const fs::path& path, const std::vector<Chunk>& chunks) {
    if (chunks.empty()) {
        write_text_file(path, "");
        return;
    }
    std::string out = json({{"format", detail::format_tag(kChunksFormat, kChunksMajor)}}).dump();
    out += '\n';
    for (const Chunk& chunk : chunks) {
        out += chunk_to_json(chunk).dump();
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::vector<Chunk> read_chunks(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    std::vector<Chunk> chunks;
    std::istringstream in(bytes);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = detail::parse_json(line, path);
        if (!header_seen) {
            if (!j.is_object() || !j.contains("format")) {
                throw VersionError("'" + path.string() + "': missing format line");
            }
            detail::check_format(j.at("format").get<std::string>(), kChunksFormat, kChunksMajor,
                                 path);
            header_seen = true;
            continue;
        }
        chunks.push_back(chunk_from_json(j));
    }
    return chunks;
}

// --- trees/<doc>.json ---

inline constexpr std::string_view kTreeFormat = "mdf-tree";
inline constexpr int kTreeMajor = 1;

inline void write_tree(const fs::path& path, const DocumentTree& tree) {
    json out = tree_to_json(tree);
    json wrapped;
    wrapped["format"] = detail::format_tag(kTreeFormat, kTreeMajor);
    wrapped["document_id"] = out.at("document_id");
    wrapped["root"] = out.at("root");
    write_text_file(path, wrapped.dump(2) + "\n");
}

inline DocumentTree read_tree(const fs::path& path) {
    const json j = detail::parse_json(read_text_file(path), path);
    detail::check_format(j.at("format").get<std::string>(), kTreeFormat, kTreeMajor, path);
    return tree_from_json(j);
}

inline fs::path tree_file_path(const fs::path& trees_dir, const std::string& document_id) {
    return trees_dir / (detail::safe_file_name(document_id) + ".json");
}

// --- assignments ---

inline constexpr std::string_view kAssignmentsFormat = "mdf-assignments";
inline constexpr int kAssignmentsMajor = 1;

/// Bare {document_id: [entries]} map, the file-provider input format.
inline std::map<std::string, HierarchyAssignment> read_assignment_map(const fs::path& path) {
    const json j = detail::parse_json(read_text_file(path), path);
    const json& body = j.is_object() && j.contains("assignments") ? j.at("assignments") : j;
    if (j.is_object() && j.contains("format")) {
        detail::check_format(j.at("format").get<std::string>(), kAssignmentsFormat,
                             kAssignmentsMajor, path);
    }
    if (!body.is_object()) {
        throw ValidationError("'" + path.string() + "': expected a document_id -> entries map");
    }
    std::map<std::string, HierarchyAssignment> out;
    for (const auto& [document_id, entries] : body.items()) {
        out[document_id] = parse_assignment(entries.dump());
    }
    return out;
}

inline void write_assignments(const fs::path& path,
                              const std::map<std::string, HierarchyAssignment>& assignments) {
    json body = json::object();
    for (const auto& [document_id, assignment] : assignments) {
        body[document_id] = assignment_to_json(assignment);
    }
    json out;
    out["format"] = detail::format_tag(kAssignmentsFormat, kAssignmentsMajor);
    out["assignments"] = std::move(body);
    write_text_file(path, out.dump(2) + "\n");
}

// --- index.bin ---

inline constexpr std::string_view kIndexFormat = "mdf-bm25";
inline constexpr int kIndexMajor = 1;

inline void write_index(const fs::path& path, const Bm25Index& index) {
    json out = bm25_index_to_json(index);
    json wrapped;
    wrapped["format"] = detail::format_tag(kIndexFormat, kIndexMajor);
    for (auto& [key, value] : out.items()) wrapped[key] = std::move(value);
    write_text_file(path, wrapped.dump() + "\n");
}

inline Bm25Index read_index(const fs::path& path) {
    const json j = detail::parse_json(read_text_file(path), path);
    detail::check_format(j.at("format").get<std::string>(), kIndexFormat, kIndexMajor, path);
    return bm25_index_from_json(j);
}

// --- results.jsonl ---

inline constexpr std::string_view kResultsFormat = "mdf-results";
inline constexpr int kResultsMajor = 1;

inline void write_results(const fs::path& path, const std::vector<RetrievalResult>& results) {
    std::string out =
        json({{"format", detail::format_tag(kResultsFormat, kResultsMajor)}}).dump();
    out += '\n';
    for (const RetrievalResult& r : results) {
        json line;
        line["query_id"] = r.query_id;
        json hits = json::array();
        for (const RetrievalHit& hit : r.hits) {
            hits.push_back(json{{"chunk_id", hit.chunk_id}, {"score", hit.score}});
        }
        line["hits"] = std::move(hits);
        out += line.dump();
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::vector<RetrievalResult> read_results(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    std::vector<RetrievalResult> results;
    std::istringstream in(bytes);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = detail::parse_json(line, path);
        if (!header_seen) {
            detail::check_format(j.at("format").get<std::string>(), kResultsFormat, kResultsMajor,
                                 path);
            header_seen = true;
            continue;
        }
        RetrievalResult r;
        r.query_id = j.at("query_id").get<std::string>();
        for (const json& hit : j.at("hits")) {
            r.hits.push_back({hit.at("chunk_id").get<std::string>(),
                              hit.at("score").get<double>()});
        }
        results.push_back(std::move(r));
    }
    return results;
}

// --- qa.jsonl / predictions.jsonl (external input formats, no tag) ---

inline std::vector<QaRecord> read_qa(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    std::vector<QaRecord> out;
    std::istringstream in(bytes);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(qa_record_from_json(detail::parse_json(line, path)));
    }
    return out;
}

inline std::map<std::string, std::string> read_predictions(const fs::path& path) {
    const std::string bytes = read_text_file(path);
    std::map<std::string, std::string> out;
    std::istringstream in(bytes);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = detail::parse_json(line, path);
        out[j.at("query_id").get<std::string>()] = j.at("answer").get<std::string>();
    }
    return out;
}

// --- report.json ---

inline constexpr std::string_view kReportFormat = "mdf-report";
inline constexpr int kReportMajor = 1;

inline void write_report(const fs::path& path, const json& report) {
    json wrapped;
    wrapped["format"] = detail::format_tag(kReportFormat, kReportMajor);
    for (const auto& [key, value] : report.items()) wrapped[key] = value;
    write_text_file(path, wrapped.dump(2) + "\n");
}

inline json read_report(const fs::path& path) {
    json j = detail::parse_json(read_text_file(path), path);
    detail::check_format(j.at("format").get<std::string>(), kReportFormat, kReportMajor, path);
    j.erase("format");
    return j;
}

// --- manifest.json ---

inline constexpr std::string_view kManifestFormat = "mdf-manifest";
inline constexpr int kManifestMajor = 1;

struct RunManifest {
    std::string run_id;
    std::string created_at;  // ISO 8601 UTC
    ChunkConfig chunk_config;
    std::string provider_kind;
    double k1 = 1.2;
    double b = 0.75;
    int k = 4;
    int jobs = 1;
    std::string corpus_digest;
    std::map<std::string, std::string> outputs;  // artifact name -> path
    int fallback_count = 0;

    bool operator==(const RunManifest&) const = default;
};

inline json manifest_to_json(const RunManifest& m) {
    json out;
    out["run_id"] = m.run_id;
    out["created_at"] = m.created_at;
    json config;
    config["method"] = std::string(to_string(m.chunk_config.method));
    config["max_len"] = m.chunk_config.max_len;
    config["token_counter"] = m.chunk_config.token_counter;
    config["provider"] = m.provider_kind;
    config["k1"] = m.k1;
    config["b"] = m.b;
    config["k"] = m.k;
    config["jobs"] = m.jobs;
    out["config"] = std::move(config);
    out["corpus_digest"] = m.corpus_digest;
    out["outputs"] = m.outputs;
    out["fallback_count"] = m.fallback_count;
    return out;
}

inline RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    const json& config = j.at("config");
    m.chunk_config.method = chunk_method_from_string(config.at("method").get<std::string>());
    m.chunk_config.max_len = config.at("max_len").get<int>();
    m.chunk_config.token_counter = config.at("token_counter").get<std::string>();
    m.provider_kind = config.at("provider").get<std::string>();
    m.k1 = config.at("k1").get<double>();
    m.b = config.at("b").get<double>();
    m.k = config.at("k").get<int>();
    m.jobs = config.at("jobs").get<int>();
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.fallback_count = j.at("fallback_count").get<int>();
    return m;
}

/// Refuses to record paths that do not exist yet.
inline void write_manifest(const fs::path& path, const RunManifest& m) {
    for (const auto& [name, out_path] : m.outputs) {
        if (!fs::exists(out_path)) {
            throw IoError("manifest output '" + name + "' references missing path '" + out_path +
                          "'");
        }
    }
    json body = manifest_to_json(m);
    json wrapped;
    wrapped["format"] = detail::format_tag(kManifestFormat, kManifestMajor);
    for (auto& [key, value] : body.items()) wrapped[key] = std::move(value);
    write_text_file(path, wrapped.dump(2) + "\n");
}

inline RunManifest read_manifest(const fs::path& path) {
    const json j = detail::parse_json(read_text_file(path), path);
    detail::check_format(j.at("format").get<std::string>(), kManifestFormat, kManifestMajor, path);
    return manifest_from_json(j);
}

/// runs/<run_id>/ layout.
struct RunPaths {
    fs::path root;

    fs::path manifest() const { return root / "manifest.json"; }
    fs::path chunks() const { return root / "chunks.jsonl"; }
    fs::path trees_dir() const { return root / "trees"; }
    fs::path index() const { return root / "index.bin"; }
    fs::path results() const { return root / "results.jsonl"; }
    fs::path report() const { return root / "report.json"; }
};

}  // namespace mdf
