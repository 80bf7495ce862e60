#pragma once

#include <algorithm>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdf/hierarchy.hpp"
#include "mdf/layout.hpp"
#include "mdf/text.hpp"

namespace mdf {

enum class ChunkMethod { MultiDocFusion, Length, Structure };

inline std::string_view to_string(ChunkMethod m) {
    switch (m) {
        case ChunkMethod::MultiDocFusion: return "multidocfusion";
        case ChunkMethod::Length: return "length";
        case ChunkMethod::Structure: return "structure";
    }
    return "multidocfusion";
}

inline ChunkMethod chunk_method_from_string(std::string_view s) {
    if (s == "multidocfusion") return ChunkMethod::MultiDocFusion;
    if (s == "length") return ChunkMethod::Length;
    if (s == "structure") return ChunkMethod::Structure;
    throw ValidationError("unknown chunk method '" + std::string(s) + "'");
}

/// Token counters produce spans, not just counts: splitting needs boundaries.
using TokenCounterFn = std::function<std::vector<TokenSpan>(std::string_view)>;

inline std::map<std::string, TokenCounterFn>& token_counter_registry() {
    static std::map<std::string, TokenCounterFn> registry = {
        {"whitespace", [](std::string_view s) { return whitespace_token_spans(s); }},
    };
    return registry;
}

inline void register_token_counter(const std::string& name, TokenCounterFn fn) {
    token_counter_registry()[name] = std::move(fn);
}

struct ChunkConfig {
    int max_len = 550;
    ChunkMethod method = ChunkMethod::MultiDocFusion;
    std::string token_counter = "whitespace";

    bool operator==(const ChunkConfig&) const = default;
};

inline TokenCounterFn resolve_token_counter(const ChunkConfig& config) {
    const auto& registry = token_counter_registry();
    const auto it = registry.find(config.token_counter);
    if (it == registry.end()) {
        throw ValidationError("no token counter named '" + config.token_counter + "'");
    }
    return it->second;
}

struct Chunk {
    std::string chunk_id;  // "<document_id>#<sequence>"
    std::string document_id;
    std::string text;
    std::vector<std::string> source_node_ids;
    int split_index = 0;  // 0 = not split, else 1-based piece number
    int token_count = 0;
    bool oversize = false;

    bool operator==(const Chunk&) const = default;
};

struct ChunkStats {
    int chunk_count = 0;
    double avg_chars = 0.0;
    double avg_tokens = 0.0;
};

namespace detail {

inline void require_max_len(const ChunkConfig& config) {
    if (config.max_len < 1) throw ValidationError("max_len must be >= 1");
}

inline std::string chunk_id_for(const std::string& document_id, std::size_t seq) {
    return document_id + "#" + std::to_string(seq);
}

/// Byte ranges of consecutive token windows, `width` tokens each, trimmed to
/// token boundaries (window spans first token begin to last token end).
inline std::vector<std::pair<std::size_t, std::size_t>> token_windows(
    const std::vector<TokenSpan>& spans, std::size_t width) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < spans.size(); i += width) {
        const std::size_t last = std::min(i + width, spans.size()) - 1;
        out.push_back({spans[i].begin, spans[last].end});
    }
    return out;
}

}  // namespace detail

/// Pre-order DFS chunking: every content node's chunk repeats the Markdown
/// heading path of its header ancestors; bodies that overflow max_len are
/// split at token boundaries into `text_split_<n> : ` pieces.
inline std::vector<Chunk> dfs_chunk(const DocumentTree& tree, const ChunkConfig& config,
                                    std::vector<std::string>* warnings = nullptr) {
    detail::require_max_len(config);
    if (config.method != ChunkMethod::MultiDocFusion) {
        throw ValidationError("dfs_chunk requires method multidocfusion");
    }
    const TokenCounterFn tokenize = resolve_token_counter(config);
    const std::size_t max_len = static_cast<std::size_t>(config.max_len);

    std::vector<Chunk> chunks;
    std::size_t seq = 0;
    std::vector<const TreeNode*> heading_path;

    const auto warn = [&](const std::string& message) {
        if (warnings) warnings->push_back(message);
    };

    // Renders the shallowest `keep` headings of the current path.
    const auto render_context = [&](std::size_t keep) {
        std::string ctx;
        for (std::size_t i = 0; i < keep; ++i) {
            if (i) ctx += '\n';
            ctx += std::string(i + 1, '#');
            ctx += ' ';
            ctx += heading_path[i]->text;
        }
        return ctx;
    };

    const auto push_chunk = [&](std::string text, const std::string& node_id, int split_index,
                                bool oversize) {
        Chunk c;
        c.chunk_id = detail::chunk_id_for(tree.document_id, seq++);
        c.document_id = tree.document_id;
        c.token_count = static_cast<int>(tokenize(text).size());
        c.text = std::move(text);
        c.source_node_ids = {node_id};
        c.split_index = split_index;
        c.oversize = oversize;
        chunks.push_back(std::move(c));
    };

    const auto emit = [&](const TreeNode& node) {
        const std::string& body = node.text;
        std::string ctx = render_context(heading_path.size());
        const auto with_context = [&](std::string_view piece) {
            if (ctx.empty()) return std::string(piece);
            std::string s = ctx;
            s += '\n';
            s += piece;
            return s;
        };

        const std::string full = with_context(body);
        if (tokenize(full).size() <= max_len) {
            push_chunk(full, node.id, 0, false);
            return;
        }

        // The split prefix "text_split_<n> : " costs two tokens per piece.
        std::size_t keep = heading_path.size();
        std::size_t ctx_tokens = tokenize(ctx).size();
        const auto capacity = [&]() {
            return static_cast<long long>(max_len) - static_cast<long long>(ctx_tokens) - 2;
        };
        bool trimmed = false;
        while (capacity() < 1 && keep > 1) {
            --keep;
            ctx = render_context(keep);
            ctx_tokens = tokenize(ctx).size();
            trimmed = true;
        }
        if (capacity() < 1 && keep == 1) {
            if (ctx_tokens > max_len) {
                // A single heading wider than the whole budget cannot be split
                // around; keep the chunk intact and flag it.
                warn("document '" + tree.document_id + "' node '" + node.id +
                     "': heading exceeds max_len, emitting oversize chunk");
                push_chunk(full, node.id, 0, true);
                return;
            }
            keep = 0;
            ctx = render_context(0);
            ctx_tokens = 0;
            trimmed = true;
        }
        if (capacity() < 1) {
            warn("document '" + tree.document_id + "' node '" + node.id +
                 "': max_len too small to split, emitting oversize chunk");
            push_chunk(full, node.id, 0, true);
            return;
        }
        if (trimmed) {
            warn("document '" + tree.document_id + "' node '" + node.id +
                 "': heading context trimmed to fit max_len");
            const std::string refit = with_context(body);
            if (tokenize(refit).size() <= max_len) {
                push_chunk(refit, node.id, 0, false);
                return;
            }
        }

        const std::size_t cap = static_cast<std::size_t>(capacity());
        const std::vector<TokenSpan> spans = tokenize(body);
        if (spans.size() <= cap) {
            // Whitespace-only overflow: nothing to split on.
            push_chunk(with_context(body), node.id, 0, false);
            return;
        }
        const std::size_t n_pieces = (spans.size() + cap - 1) / cap;
        for (std::size_t p = 0; p < n_pieces; ++p) {
            // Pieces cut at token begins so they concatenate back to `body`.
            const std::size_t begin = p == 0 ? 0 : spans[p * cap].begin;
            const std::size_t end =
                p + 1 == n_pieces ? body.size() : spans[(p + 1) * cap].begin;
            std::string piece = "text_split_" + std::to_string(p + 1) + " : ";
            piece.append(body, begin, end - begin);
            push_chunk(with_context(piece), node.id, static_cast<int>(p + 1), false);
        }
    };

    const auto walk = [&](auto&& self, const std::string& id) -> void {
        const TreeNode& node = tree.node(id);
        if (node.kind == NodeKind::General && !node.text.empty()) emit(node);
        const bool pushed = node.kind == NodeKind::Header;
        if (pushed) heading_path.push_back(&node);
        for (const std::string& child : node.children) self(self, child);
        if (pushed) heading_path.pop_back();
    };
    walk(walk, tree.root_id);
    return chunks;
}

/// Fixed-size windows over the whole document text, reading order, no
/// structural boundaries.
inline std::vector<Chunk> length_chunk(const AnnotatedLayout& layout, const ChunkConfig& config) {
    detail::require_max_len(config);
    if (config.method != ChunkMethod::Length) {
        throw ValidationError("length_chunk requires method length");
    }
    const TokenCounterFn tokenize = resolve_token_counter(config);

    const std::vector<Segment> ordered = reading_order_sort(layout.segments);
    std::string joined;
    std::vector<std::pair<std::size_t, const Segment*>> offsets;  // begin byte -> segment
    for (const Segment& seg : ordered) {
        if (!joined.empty()) joined += ' ';
        offsets.push_back({joined.size(), &seg});
        joined += seg.text;
    }
    const std::vector<TokenSpan> spans = tokenize(joined);
    const auto windows = detail::token_windows(spans, static_cast<std::size_t>(config.max_len));

    const auto segment_at = [&](std::size_t byte) {
        auto it = std::upper_bound(offsets.begin(), offsets.end(), byte,
                                   [](std::size_t b, const auto& p) { return b < p.first; });
        return std::prev(it)->second;
    };

    std::vector<Chunk> chunks;
    std::size_t next_token = 0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto [begin, end] = windows[w];
        Chunk c;
        c.chunk_id = detail::chunk_id_for(layout.document_id, w);
        c.document_id = layout.document_id;
        c.text = joined.substr(begin, end - begin);
        const std::size_t first = next_token;
        while (next_token < spans.size() && spans[next_token].end <= end) ++next_token;
        for (std::size_t t = first; t < next_token; ++t) {
            const std::string& id = segment_at(spans[t].begin)->id;
            if (c.source_node_ids.empty() || c.source_node_ids.back() != id) {
                c.source_node_ids.push_back(id);
            }
        }
        c.split_index = windows.size() == 1 ? 0 : static_cast<int>(w + 1);
        c.token_count = static_cast<int>(tokenize(c.text).size());
        chunks.push_back(std::move(c));
    }
    return chunks;
}

namespace detail {

/// Bracket tag for the structure baseline's rendering.
inline std::string_view bracket_tag(SegmentType t) {
    return t == SegmentType::SectionHeader ? std::string_view("Section") : to_string(t);
}

}  // namespace detail

/// Greedy packing of `[<Type>] <text>` renderings joined by " - "; segments
/// wider than the budget are windowed as in length_chunk.
inline std::vector<Chunk> structure_chunk(const AnnotatedLayout& layout,
                                          const ChunkConfig& config) {
    detail::require_max_len(config);
    if (config.method != ChunkMethod::Structure) {
        throw ValidationError("structure_chunk requires method structure");
    }
    const TokenCounterFn tokenize = resolve_token_counter(config);
    const std::size_t max_len = static_cast<std::size_t>(config.max_len);

    std::vector<Chunk> chunks;
    std::size_t seq = 0;
    std::string cur_text;
    std::vector<std::string> cur_ids;
    std::size_t cur_tokens = 0;

    const auto flush = [&](int split_index) {
        if (cur_ids.empty()) return;
        Chunk c;
        c.chunk_id = detail::chunk_id_for(layout.document_id, seq++);
        c.document_id = layout.document_id;
        c.token_count = static_cast<int>(tokenize(cur_text).size());
        c.text = std::move(cur_text);
        c.source_node_ids = std::move(cur_ids);
        c.split_index = split_index;
        chunks.push_back(std::move(c));
        cur_text.clear();
        cur_ids.clear();
        cur_tokens = 0;
    };

    for (const Segment& seg : reading_order_sort(layout.segments)) {
        std::string rendered = "[";
        rendered += detail::bracket_tag(seg.segment_type);
        rendered += "] ";
        rendered += seg.text;
        const std::vector<TokenSpan> spans = tokenize(rendered);

        if (spans.size() > max_len) {
            flush(0);
            const auto windows = detail::token_windows(spans, max_len);
            for (std::size_t w = 0; w < windows.size(); ++w) {
                cur_text = rendered.substr(windows[w].first, windows[w].second - windows[w].first);
                cur_ids = {seg.id};
                flush(static_cast<int>(w + 1));
            }
            continue;
        }
        // " - " between renderings costs one token for the bare dash.
        const std::size_t added = spans.size() + (cur_ids.empty() ? 0 : 1);
        if (!cur_ids.empty() && cur_tokens + added > max_len) flush(0);
        if (!cur_ids.empty()) cur_text += " - ";
        cur_text += rendered;
        cur_ids.push_back(seg.id);
        cur_tokens += cur_ids.size() == 1 ? spans.size() : added;
    }
    flush(0);
    return chunks;
}

inline std::vector<Chunk> chunk_layout(const AnnotatedLayout& layout, const DocumentTree* tree,
                                       const ChunkConfig& config,
                                       std::vector<std::string>* warnings = nullptr) {
    switch (config.method) {
        case ChunkMethod::MultiDocFusion:
            if (!tree) throw ValidationError("multidocfusion chunking requires a tree");
            return dfs_chunk(*tree, config, warnings);
        case ChunkMethod::Length: return length_chunk(layout, config);
        case ChunkMethod::Structure: return structure_chunk(layout, config);
    }
    throw ValidationError("unknown chunk method");
}

inline ChunkStats chunk_stats(const std::vector<Chunk>& chunks) {
    ChunkStats stats;
    stats.chunk_count = static_cast<int>(chunks.size());
    if (chunks.empty()) return stats;
    double chars = 0;
    double tokens = 0;
    for (const Chunk& c : chunks) {
        std::size_t pos = 0;
        std::size_t code_points = 0;
        while (pos < c.text.size()) {
            std::size_t len = 0;
            detail::decode_utf8(c.text, pos, len);
            pos += len;
            ++code_points;
        }
        chars += static_cast<double>(code_points);
        tokens += static_cast<double>(c.token_count);
    }
    stats.avg_chars = chars / static_cast<double>(chunks.size());
    stats.avg_tokens = tokens / static_cast<double>(chunks.size());
    return stats;
}

}  // namespace mdf
