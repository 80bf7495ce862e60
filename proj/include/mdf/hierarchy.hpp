#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mdf/layout.hpp"
#include "mdf/text.hpp"

namespace mdf {

struct AssignmentEntry {
    std::string id;
    std::optional<std::string> parent;  // nullopt = root

    bool operator==(const AssignmentEntry&) const = default;
};

/// Flat {id, parent-or-null} records, one per section header.
struct HierarchyAssignment {
    std::vector<AssignmentEntry> entries;

    bool operator==(const HierarchyAssignment&) const = default;
};

enum class NodeKind { FakeRoot, Header, General };

inline std::string_view to_string(NodeKind k) {
    switch (k) {
        case NodeKind::FakeRoot: return "fake_root";
        case NodeKind::Header: return "header";
        case NodeKind::General: return "general";
    }
    return "general";
}

inline NodeKind node_kind_from_string(std::string_view s) {
    if (s == "fake_root") return NodeKind::FakeRoot;
    if (s == "header") return NodeKind::Header;
    if (s == "general") return NodeKind::General;
    throw ValidationError("unknown node kind '" + std::string(s) + "'");
}

struct TreeNode {
    std::string id;
    NodeKind kind = NodeKind::General;
    std::optional<SegmentType> segment_type;  // nullopt for FakeRoot
    std::string text;
    std::vector<std::string> children;  // reading order
    int depth = 0;

    bool operator==(const TreeNode&) const = default;
};

/// Document Hierarchical Tree. The virtual root has the reserved empty id,
/// which cannot collide with segment ids (those are validated non-empty).
struct DocumentTree {
    std::string document_id;
    std::string root_id;
    std::map<std::string, TreeNode> nodes;

    const TreeNode& node(const std::string& id) const {
        const auto it = nodes.find(id);
        if (it == nodes.end()) throw ValidationError("tree has no node '" + id + "'");
        return it->second;
    }

    bool operator==(const DocumentTree&) const = default;
};

inline constexpr const char* kFakeRootId = "";

/// Pre-order DFS node ids, children in stored order, root first.
inline std::vector<std::string> pre_order_ids(const DocumentTree& tree) {
    std::vector<std::string> out;
    std::vector<const std::string*> stack = {&tree.root_id};
    while (!stack.empty()) {
        const std::string& id = *stack.back();
        stack.pop_back();
        const TreeNode& n = tree.node(id);
        out.push_back(id);
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(&*it);
    }
    return out;
}

namespace detail {

/// Checks id uniqueness, parent resolvability, and acyclicity. Parents may
/// reference entry ids or any id in `resolvable` (e.g. the header list).
inline void validate_assignment(const std::vector<AssignmentEntry>& entries,
                                const std::unordered_set<std::string>& resolvable) {
    std::unordered_map<std::string, const AssignmentEntry*> by_id;
    for (const AssignmentEntry& e : entries) {
        if (e.id.empty()) throw ValidationError("assignment entry with empty id");
        if (!by_id.emplace(e.id, &e).second) {
            throw ValidationError("duplicate assignment id '" + e.id + "'");
        }
    }
    for (const AssignmentEntry& e : entries) {
        if (e.parent && by_id.find(*e.parent) == by_id.end() && resolvable.count(*e.parent) == 0) {
            throw ValidationError("assignment entry '" + e.id + "' references unknown parent '" +
                                  *e.parent + "'");
        }
    }
    // Follow parent pointers; a chain leaving the entry set terminates.
    std::unordered_map<std::string, int> state;  // 0 unvisited, 1 in progress, 2 done
    for (const AssignmentEntry& e : entries) {
        std::vector<std::string> path;
        std::string cur = e.id;
        while (true) {
            const auto it = by_id.find(cur);
            if (it == by_id.end()) break;
            const int s = state[cur];
            if (s == 2) break;
            if (s == 1) {
                const auto start = std::find(path.begin(), path.end(), cur);
                std::string cycle;
                for (auto p = start; p != path.end(); ++p) {
                    if (!cycle.empty()) cycle += " -> ";
                    cycle += *p;
                }
                throw ValidationError("assignment contains a cycle: " + cycle + " -> " + cur);
            }
            state[cur] = 1;
            path.push_back(cur);
            if (!it->second->parent) break;
            cur = *it->second->parent;
        }
        for (const std::string& id : path) state[id] = 2;
    }
}

/// Leading dotted-number prefix ("3.1.2", optional trailing dot). Empty
/// result means the header is unnumbered. The number must be followed by
/// whitespace or end of text.
inline std::vector<long long> parse_dotted_number(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    std::vector<long long> parts;
    std::size_t cur = pos;
    while (cur < text.size()) {
        std::size_t digits_begin = cur;
        while (cur < text.size() && text[cur] >= '0' && text[cur] <= '9') ++cur;
        if (cur == digits_begin || cur - digits_begin > 18) return {};
        parts.push_back(std::stoll(std::string(text.substr(digits_begin, cur - digits_begin))));
        if (cur < text.size() && text[cur] == '.') {
            ++cur;
            if (cur < text.size() && text[cur] >= '0' && text[cur] <= '9') continue;
        }
        break;
    }
    if (parts.empty()) return {};
    if (cur < text.size()) {
        std::size_t len = 0;
        if (!is_unicode_space(decode_utf8(text, cur, len))) return {};
    }
    return parts;
}

}  // namespace detail

inline void validate_assignment(const HierarchyAssignment& assignment,
                                const std::unordered_set<std::string>& resolvable = {}) {
    detail::validate_assignment(assignment.entries, resolvable);
}

/// Extracts the first JSON array from text that may be wrapped in code fences
/// or chatter, then validates it as an assignment. Parents must resolve to an
/// entry id or a member of `resolvable`.
inline HierarchyAssignment parse_assignment(std::string_view bytes,
                                            const std::unordered_set<std::string>& resolvable = {}) {
    const std::size_t begin = bytes.find('[');
    const std::size_t end = bytes.rfind(']');
    if (begin == std::string_view::npos || end == std::string_view::npos || end < begin) {
        throw ParseError("assignment: no JSON array found in input");
    }
    json arr;
    try {
        arr = json::parse(bytes.substr(begin, end - begin + 1));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("assignment JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!arr.is_array()) throw ValidationError("assignment must be a JSON array");
    HierarchyAssignment out;
    std::size_t index = 0;
    for (const json& item : arr) {
        if (!item.is_object()) {
            throw ValidationError("assignment entry " + std::to_string(index) +
                                  ": must be a JSON object");
        }
        AssignmentEntry e;
        const auto id_it = item.find("id");
        if (id_it == item.end() || !id_it->is_string()) {
            throw ValidationError("assignment entry " + std::to_string(index) +
                                  ": missing string field 'id'");
        }
        e.id = id_it->get<std::string>();
        const auto parent_it = item.find("parent");
        if (parent_it == item.end()) {
            throw ValidationError("assignment entry " + std::to_string(index) +
                                  ": missing field 'parent'");
        }
        if (parent_it->is_null()) {
            e.parent = std::nullopt;
        } else if (parent_it->is_string()) {
            e.parent = parent_it->get<std::string>();
        } else {
            throw ValidationError("assignment entry " + std::to_string(index) +
                                  ": 'parent' must be a string or null");
        }
        out.entries.push_back(std::move(e));
        ++index;
    }
    validate_assignment(out, resolvable);
    return out;
}

inline json assignment_to_json(const HierarchyAssignment& assignment) {
    json arr = json::array();
    for (const AssignmentEntry& e : assignment.entries) {
        json item;
        item["id"] = e.id;
        item["parent"] = e.parent ? json(*e.parent) : json(nullptr);
        arr.push_back(std::move(item));
    }
    return arr;
}

/// Numbering-based fallback parser. "1.2" becomes a child of the most recent
/// "1"; when the exact parent numbering is missing, successively shorter
/// prefixes are tried. Unnumbered section headers attach to the most recent
/// header of any kind; titles and top-level numbers are roots.
inline HierarchyAssignment heuristic_hierarchy(const HeaderList& headers) {
    struct Seen {
        const Segment* seg;
        std::vector<long long> number;
    };
    std::vector<Seen> seen;
    HierarchyAssignment out;
    for (const Segment& header : headers.headers) {
        AssignmentEntry entry;
        entry.id = header.id;
        const std::vector<long long> number = detail::parse_dotted_number(header.text);
        if (header.segment_type == SegmentType::Title) {
            entry.parent = std::nullopt;
        } else if (!number.empty()) {
            for (std::size_t prefix_len = number.size() - 1; prefix_len >= 1; --prefix_len) {
                const auto want = std::vector<long long>(number.begin(),
                                                         number.begin() + prefix_len);
                for (auto it = seen.rbegin(); it != seen.rend(); ++it) {
                    if (it->number == want) {
                        entry.parent = it->seg->id;
                        break;
                    }
                }
                if (entry.parent) break;
            }
        } else {
            if (!seen.empty()) entry.parent = seen.back().seg->id;
        }
        seen.push_back({&header, number});
        out.entries.push_back(std::move(entry));
    }
    return out;
}

/// Builds the header tree under a virtual root. Headers the assignment does
/// not cover are adopted by the root rather than dropped.
inline DocumentTree build_header_tree(const std::string& document_id, const HeaderList& headers,
                                      const HierarchyAssignment& assignment) {
    std::unordered_set<std::string> header_ids;
    for (const Segment& h : headers.headers) header_ids.insert(h.id);
    for (const AssignmentEntry& e : assignment.entries) {
        if (header_ids.count(e.id) == 0) {
            throw ValidationError("assignment id '" + e.id + "' is not a header of document '" +
                                  document_id + "'");
        }
    }
    validate_assignment(assignment, header_ids);

    std::unordered_map<std::string, std::optional<std::string>> parent_of;
    for (const AssignmentEntry& e : assignment.entries) parent_of[e.id] = e.parent;

    DocumentTree tree;
    tree.document_id = document_id;
    tree.root_id = kFakeRootId;
    TreeNode root;
    root.id = kFakeRootId;
    root.kind = NodeKind::FakeRoot;
    tree.nodes.emplace(tree.root_id, std::move(root));

    for (const Segment& h : headers.headers) {
        TreeNode node;
        node.id = h.id;
        node.kind = NodeKind::Header;
        node.segment_type = h.segment_type;
        node.text = h.text;
        tree.nodes.emplace(h.id, std::move(node));
    }
    // Attach in reading order so every children list ends up in reading order.
    for (const Segment& h : headers.headers) {
        const auto it = parent_of.find(h.id);
        const std::string parent_id =
            (it != parent_of.end() && it->second) ? *it->second : std::string(kFakeRootId);
        tree.nodes.at(parent_id).children.push_back(h.id);
    }

    std::vector<std::pair<std::string, int>> stack = {{tree.root_id, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        TreeNode& n = tree.nodes.at(id);
        n.depth = depth;
        for (const std::string& child : n.children) stack.push_back({child, depth + 1});
    }
    return tree;
}

/// Scans segments in reading order, attaching each non-header segment as a
/// leaf of the most recently seen header (or the root before any header).
inline DocumentTree attach_general_nodes(DocumentTree tree, const AnnotatedLayout& layout) {
    const std::vector<Segment> ordered = reading_order_sort(layout.segments);
    std::unordered_map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < ordered.size(); ++i) rank.emplace(ordered[i].id, i);

    std::string current_header = tree.root_id;
    for (const Segment& seg : ordered) {
        if (is_header_type(seg.segment_type)) {
            if (tree.nodes.find(seg.id) == tree.nodes.end()) {
                throw ValidationError("tree for document '" + tree.document_id +
                                      "' is missing header '" + seg.id + "'");
            }
            current_header = seg.id;
            continue;
        }
        if (tree.nodes.find(seg.id) != tree.nodes.end()) {
            throw ValidationError("segment id '" + seg.id + "' already present in tree");
        }
        TreeNode node;
        node.id = seg.id;
        node.kind = NodeKind::General;
        node.segment_type = seg.segment_type;
        node.text = seg.text;
        tree.nodes.emplace(seg.id, std::move(node));
        tree.nodes.at(current_header).children.push_back(seg.id);
    }

    // General nodes were appended after the header children; restore reading
    // order within every sibling list.
    for (auto& [id, node] : tree.nodes) {
        std::stable_sort(node.children.begin(), node.children.end(),
                         [&](const std::string& a, const std::string& b) {
                             return rank.at(a) < rank.at(b);
                         });
    }

    std::vector<std::pair<std::string, int>> stack = {{tree.root_id, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        TreeNode& n = tree.nodes.at(id);
        n.depth = depth;
        for (const std::string& child : n.children) stack.push_back({child, depth + 1});
    }
    return tree;
}

/// Header edges of a tree as a flat assignment (parent null under the root).
inline HierarchyAssignment assignment_from_tree(const DocumentTree& tree) {
    HierarchyAssignment out;
    const auto walk = [&](auto&& self, const std::string& id,
                          const std::string& parent_id) -> void {
        const TreeNode& n = tree.node(id);
        if (n.kind == NodeKind::Header) {
            AssignmentEntry e;
            e.id = n.id;
            const bool root_parent = parent_id == tree.root_id;
            if (!root_parent) e.parent = parent_id;
            out.entries.push_back(std::move(e));
        }
        for (const std::string& child : n.children) self(self, child, id);
    };
    for (const std::string& child : tree.node(tree.root_id).children) {
        walk(walk, child, tree.root_id);
    }
    return out;
}

namespace detail {

inline json node_to_json(const DocumentTree& tree, const std::string& id) {
    const TreeNode& n = tree.node(id);
    json out;
    out["id"] = n.id;
    out["kind"] = std::string(to_string(n.kind));
    out["segment_type"] = n.segment_type ? json(std::string(to_string(*n.segment_type))) : json(nullptr);
    out["text"] = n.text;
    json children = json::array();
    for (const std::string& child : n.children) children.push_back(node_to_json(tree, child));
    out["children"] = std::move(children);
    return out;
}

inline void node_from_json(const json& j, DocumentTree& tree, int depth) {
    if (!j.is_object()) throw ValidationError("tree node must be a JSON object");
    TreeNode n;
    n.id = j.at("id").get<std::string>();
    n.kind = node_kind_from_string(j.at("kind").get<std::string>());
    const json& st = j.at("segment_type");
    if (!st.is_null()) n.segment_type = segment_type_from_string(st.get<std::string>());
    n.text = j.at("text").get<std::string>();
    n.depth = depth;
    for (const json& child : j.at("children")) {
        n.children.push_back(child.at("id").get<std::string>());
    }
    if (!tree.nodes.emplace(n.id, n).second) {
        throw ValidationError("tree has duplicate node id '" + n.id + "'");
    }
    for (const json& child : j.at("children")) node_from_json(child, tree, depth + 1);
}

}  // namespace detail

inline json tree_to_json(const DocumentTree& tree) {
    json out;
    out["document_id"] = tree.document_id;
    out["root"] = detail::node_to_json(tree, tree.root_id);
    return out;
}

inline DocumentTree tree_from_json(const json& j) {
    DocumentTree tree;
    tree.document_id = j.at("document_id").get<std::string>();
    const json& root = j.at("root");
    tree.root_id = root.at("id").get<std::string>();
    detail::node_from_json(root, tree, 0);
    if (tree.node(tree.root_id).kind != NodeKind::FakeRoot) {
        throw ValidationError("tree root must be the virtual root node");
    }
    return tree;
}

}  // namespace mdf
