#pragma once

#include <cstdlib>
#include <map>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <httplib.h>

#include "mdf/hierarchy.hpp"
#include "mdf/layout.hpp"
#include "mdf/store.hpp"

namespace mdf {

enum class ProviderKind { Heuristic, File, LlmEndpoint };

inline std::string_view to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::Heuristic: return "heuristic";
        case ProviderKind::File: return "file";
        case ProviderKind::LlmEndpoint: return "llm";
    }
    return "heuristic";
}

inline ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "heuristic") return ProviderKind::Heuristic;
    if (s == "file") return ProviderKind::File;
    if (s == "llm") return ProviderKind::LlmEndpoint;
    throw ValidationError("unknown provider kind '" + std::string(s) + "'");
}

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Heuristic;
    std::string file_path;  // File
    std::string endpoint_url;  // LlmEndpoint
    std::string model_name;
    std::string api_key_env_var;
    double request_timeout_seconds = 30.0;
    int max_retries = 2;
    int max_concurrent_requests = 4;

    bool operator==(const ProviderConfig&) const = default;
};

inline void validate_provider_config(const ProviderConfig& config) {
    if (config.max_concurrent_requests < 1) {
        throw ValidationError("provider: max_concurrent_requests must be >= 1");
    }
    switch (config.kind) {
        case ProviderKind::Heuristic: return;
        case ProviderKind::File:
            if (config.file_path.empty()) {
                throw ValidationError("provider: file kind requires file_path");
            }
            return;
        case ProviderKind::LlmEndpoint:
            if (config.endpoint_url.empty()) {
                throw ValidationError("provider: llm kind requires endpoint_url");
            }
            if (config.model_name.empty()) {
                throw ValidationError("provider: llm kind requires model_name");
            }
            if (config.request_timeout_seconds <= 0) {
                throw ValidationError("provider: request_timeout_seconds must be > 0");
            }
            if (config.max_retries < 0) {
                throw ValidationError("provider: max_retries must be >= 0");
            }
            return;
    }
    throw ValidationError("provider: unknown kind");
}

inline constexpr std::string_view kDshpSystemPrompt =
    "You are an expert in analyzing section headers of documents and creating a hierarchical "
    "structure.\n"
    "The following is a list of 'section header' texts extracted from a document.\n"
    "\n"
    "For each item, determine its relationship with the parent section (parent-child "
    "relationship).\n"
    "\n"
    "If possible, follow standard document numbering rules, such as treating '3.1' as a child of "
    "'3' and '3.1.1' as a child of '3.1'.\n"
    "\n"
    "Even if there is no numeric pattern, infer hierarchy based on textual context.\n"
    "\n"
    "If an item is a top-level heading (i.e., the root node is its parent), set `parent` to "
    "null.\n"
    "\n"
    "Output format:\n"
    "\n"
    "json only.\n"
    "\n"
    "DO NOT include any other explanations or text.\n"
    "\n"
    "[\n"
    "\n"
    "{\"id\": \"<id from the original header_list>\", \"parent\": \"<id of the parent node or "
    "null if root>\"}\n"
    "\n"
    "]";

struct PromptBundle {
    std::string system_prompt;
    std::string user_payload;  // JSON array of header records
};

inline PromptBundle build_prompt(const HeaderList& headers) {
    if (headers.headers.empty()) {
        throw ValidationError("build_prompt: header list is empty, nothing to parse");
    }
    json payload = json::array();
    for (const Segment& h : headers.headers) {
        json record;
        record["id"] = h.id;
        record["text"] = h.text;
        record["page_number"] = h.bbox.page_number;
        record["top"] = h.bbox.top;
        record["left"] = h.bbox.left;
        payload.push_back(std::move(record));
    }
    PromptBundle bundle;
    bundle.system_prompt = std::string(kDshpSystemPrompt);
    bundle.user_payload = payload.dump(2);
    return bundle;
}

struct Resolution {
    HierarchyAssignment assignment;
    bool used_fallback = false;
};

namespace detail {

struct SemaphoreGuard {
    std::counting_semaphore<>& sem;
    explicit SemaphoreGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
    ~SemaphoreGuard() { sem.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;
};

/// "http://host:port/path" -> {"http://host:port", "/path"}.
inline std::pair<std::string, std::string> split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ValidationError("provider: endpoint_url '" + url + "' has no scheme");
    }
    const std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

inline void require_known_headers(const HierarchyAssignment& assignment,
                                  const std::unordered_set<std::string>& header_ids) {
    for (const AssignmentEntry& e : assignment.entries) {
        if (header_ids.count(e.id) == 0) {
            throw ValidationError("assignment id '" + e.id + "' is not a known header");
        }
    }
}

}  // namespace detail

/// One resolver per run; File assignments load eagerly, endpoint calls share
/// a max_concurrent_requests gate.
class DshpProvider {
  public:
    explicit DshpProvider(ProviderConfig config)
        : config_(std::move(config)),
          semaphore_(config_.max_concurrent_requests >= 1 ? config_.max_concurrent_requests : 1) {
        validate_provider_config(config_);
        if (config_.kind == ProviderKind::File) {
            file_assignments_ = read_assignment_map(config_.file_path);
        }
    }

    const ProviderConfig& config() const { return config_; }

    Resolution resolve(const HeaderList& headers, const std::string& document_id,
                       std::vector<std::string>* warnings = nullptr) {
        switch (config_.kind) {
            case ProviderKind::Heuristic: return {heuristic_hierarchy(headers), false};
            case ProviderKind::File: return resolve_from_file(headers, document_id);
            case ProviderKind::LlmEndpoint:
                return resolve_from_endpoint(headers, document_id, warnings);
        }
        throw ValidationError("provider: unknown kind");
    }

  private:
    Resolution resolve_from_file(const HeaderList& headers, const std::string& document_id) {
        const auto it = file_assignments_.find(document_id);
        if (it == file_assignments_.end()) {
            throw ValidationError("assignment file '" + config_.file_path +
                                  "' has no entry for document '" + document_id + "'");
        }
        std::unordered_set<std::string> header_ids;
        for (const Segment& h : headers.headers) header_ids.insert(h.id);
        detail::require_known_headers(it->second, header_ids);
        validate_assignment(it->second, header_ids);
        return {it->second, false};
    }

    Resolution resolve_from_endpoint(const HeaderList& headers, const std::string& document_id,
                                     std::vector<std::string>* warnings) {
        const auto warn = [&](const std::string& message) {
            if (warnings) warnings->push_back(message);
        };
        std::unordered_set<std::string> header_ids;
        for (const Segment& h : headers.headers) header_ids.insert(h.id);
        const PromptBundle prompt = build_prompt(headers);

        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            try {
                const std::string content = call_endpoint(prompt);
                HierarchyAssignment assignment = parse_assignment(content, header_ids);
                detail::require_known_headers(assignment, header_ids);
                return {std::move(assignment), false};
            } catch (const std::exception& e) {
                warn("document '" + document_id + "': endpoint attempt " +
                     std::to_string(attempt + 1) + " failed: " + e.what());
            }
        }
        warn("document '" + document_id + "': falling back to heuristic hierarchy");
        return {heuristic_hierarchy(headers), true};
    }

    std::string call_endpoint(const PromptBundle& prompt) {
        const auto [base, path] = detail::split_url(config_.endpoint_url);
        httplib::Client client(base);
        const auto secs = static_cast<time_t>(config_.request_timeout_seconds);
        const auto usecs = static_cast<time_t>(
            (config_.request_timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);

        httplib::Headers http_headers;
        if (!config_.api_key_env_var.empty()) {
            if (const char* key = std::getenv(config_.api_key_env_var.c_str())) {
                http_headers.emplace("Authorization", std::string("Bearer ") + key);
            }
        }

        json request;
        request["model"] = config_.model_name;
        request["messages"] = json::array({
            json{{"role", "system"}, {"content", prompt.system_prompt}},
            json{{"role", "user"}, {"content", prompt.user_payload}},
        });
        request["temperature"] = 0;

        detail::SemaphoreGuard guard(semaphore_);
        const httplib::Result res =
            client.Post(path, http_headers, request.dump(), "application/json");
        if (!res) {
            throw IoError("endpoint '" + config_.endpoint_url +
                          "': " + httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw IoError("endpoint '" + config_.endpoint_url + "': HTTP " +
                          std::to_string(res->status));
        }
        try {
            const json body = json::parse(res->body);
            return body.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception& e) {
            throw ParseError(std::string("endpoint response not understood: ") + e.what());
        }
    }

    ProviderConfig config_;
    std::counting_semaphore<> semaphore_;
    std::map<std::string, HierarchyAssignment> file_assignments_;
};

/// Single-document convenience wrapper.
inline Resolution resolve_hierarchy(const ProviderConfig& config, const HeaderList& headers,
                                    const std::string& document_id,
                                    std::vector<std::string>* warnings = nullptr) {
    DshpProvider provider(config);
    return provider.resolve(headers, document_id, warnings);
}

}  // namespace mdf
