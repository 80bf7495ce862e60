#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mdf/error.hpp"

namespace mdf {

using json = nlohmann::ordered_json;

enum class SegmentType {
    Title,
    SectionHeader,
    Text,
    Table,
    Figure,
    List,
    Caption,
    Other,
};

inline std::string_view to_string(SegmentType t) {
    switch (t) {
        case SegmentType::Title: return "Title";
        case SegmentType::SectionHeader: return "SectionHeader";
        case SegmentType::Text: return "Text";
        case SegmentType::Table: return "Table";
        case SegmentType::Figure: return "Figure";
        case SegmentType::List: return "List";
        case SegmentType::Caption: return "Caption";
        case SegmentType::Other: return "Other";
    }
    return "Other";
}

/// Unknown strings map to Other so layouts from any detector ingest cleanly.
inline SegmentType segment_type_from_string(std::string_view s) {
    if (s == "Title") return SegmentType::Title;
    if (s == "SectionHeader") return SegmentType::SectionHeader;
    if (s == "Text") return SegmentType::Text;
    if (s == "Table") return SegmentType::Table;
    if (s == "Figure") return SegmentType::Figure;
    if (s == "List") return SegmentType::List;
    if (s == "Caption") return SegmentType::Caption;
    return SegmentType::Other;
}

inline bool is_header_type(SegmentType t) {
    return t == SegmentType::Title || t == SegmentType::SectionHeader;
}

struct BoundingBox {
    int page_number = 0;
    int top = 0;
    int left = 0;
    int width = 0;
    int height = 0;

    /// Total reading-order key; ties beyond it keep input order.
    std::tuple<int, int, int> reading_order_key() const {
        return {page_number, top, left};
    }

    bool operator==(const BoundingBox&) const = default;
};

struct Segment {
    std::string id;
    SegmentType segment_type = SegmentType::Other;
    BoundingBox bbox;
    std::string text;

    bool operator==(const Segment&) const = default;
};

struct AnnotatedLayout {
    std::string document_id;
    std::vector<Segment> segments;

    bool operator==(const AnnotatedLayout&) const = default;
};

/// The Title / SectionHeader subsequence of a layout, in reading order.
struct HeaderList {
    std::vector<Segment> headers;
};

/// Stable sort by (page_number, top, left).
inline std::vector<Segment> reading_order_sort(std::vector<Segment> segments) {
    std::stable_sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
        return a.bbox.reading_order_key() < b.bbox.reading_order_key();
    });
    return segments;
}

inline HeaderList extract_header_list(const AnnotatedLayout& layout) {
    HeaderList out;
    for (const Segment& seg : layout.segments) {
        if (is_header_type(seg.segment_type)) out.headers.push_back(seg);
    }
    return out;
}

namespace detail {

inline int require_non_negative_int(const json& obj, const char* field, std::size_t index) {
    const auto it = obj.find(field);
    if (it == obj.end()) {
        throw ValidationError("segment " + std::to_string(index) + ": missing required field '" +
                              field + "'");
    }
    if (!it->is_number_integer()) {
        throw ValidationError("segment " + std::to_string(index) + ": field '" + field +
                              "' must be an integer");
    }
    const auto v = it->get<std::int64_t>();
    if (v < 0) {
        throw ValidationError("segment " + std::to_string(index) + ": field '" + field +
                              "' must be non-negative");
    }
    return static_cast<int>(v);
}

inline std::string require_string(const json& obj, const char* field, std::size_t index) {
    const auto it = obj.find(field);
    if (it == obj.end()) {
        throw ValidationError("segment " + std::to_string(index) + ": missing required field '" +
                              field + "'");
    }
    if (!it->is_string()) {
        throw ValidationError("segment " + std::to_string(index) + ": field '" + field +
                              "' must be a string");
    }
    return it->get<std::string>();
}

// OCR text is kept verbatim except for trailing newline normalization.
inline std::string strip_trailing_newlines(std::string text) {
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

}  // namespace detail

/// Validates field presence/types and layout invariants, then returns the
/// layout sorted into reading order.
inline AnnotatedLayout layout_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("layout root must be a JSON object");
    AnnotatedLayout layout;
    const auto id_it = doc.find("document_id");
    if (id_it == doc.end() || !id_it->is_string()) {
        throw ValidationError("layout: missing required string field 'document_id'");
    }
    layout.document_id = id_it->get<std::string>();
    if (layout.document_id.empty()) throw ValidationError("layout: document_id must be non-empty");

    const auto segs_it = doc.find("segments");
    if (segs_it == doc.end() || !segs_it->is_array()) {
        throw ValidationError("layout: missing required array field 'segments'");
    }

    std::unordered_set<std::string> seen_ids;
    std::size_t index = 0;
    for (const json& s : *segs_it) {
        if (!s.is_object()) {
            throw ValidationError("segment " + std::to_string(index) + ": must be a JSON object");
        }
        Segment seg;
        seg.id = detail::require_string(s, "id", index);
        if (seg.id.empty()) {
            throw ValidationError("segment " + std::to_string(index) + ": id must be non-empty");
        }
        if (!seen_ids.insert(seg.id).second) {
            throw ValidationError("duplicate segment id '" + seg.id + "'");
        }
        seg.segment_type = segment_type_from_string(detail::require_string(s, "segment_type", index));
        seg.bbox.page_number = detail::require_non_negative_int(s, "page_number", index);
        seg.bbox.top = detail::require_non_negative_int(s, "top", index);
        seg.bbox.left = detail::require_non_negative_int(s, "left", index);
        if (s.contains("width")) seg.bbox.width = detail::require_non_negative_int(s, "width", index);
        if (s.contains("height")) seg.bbox.height = detail::require_non_negative_int(s, "height", index);
        seg.text = detail::strip_trailing_newlines(detail::require_string(s, "text", index));
        layout.segments.push_back(std::move(seg));
        ++index;
    }
    layout.segments = reading_order_sort(std::move(layout.segments));
    return layout;
}

inline AnnotatedLayout parse_layout(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("layout JSON parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    return layout_from_json(doc);
}

inline json layout_to_json(const AnnotatedLayout& layout) {
    json doc;
    doc["document_id"] = layout.document_id;
    json segs = json::array();
    for (const Segment& seg : layout.segments) {
        json s;
        s["id"] = seg.id;
        s["segment_type"] = to_string(seg.segment_type);
        s["page_number"] = seg.bbox.page_number;
        s["top"] = seg.bbox.top;
        s["left"] = seg.bbox.left;
        if (seg.bbox.width != 0) s["width"] = seg.bbox.width;
        if (seg.bbox.height != 0) s["height"] = seg.bbox.height;
        s["text"] = seg.text;
        segs.push_back(std::move(s));
    }
    doc["segments"] = std::move(segs);
    return doc;
}

inline std::string serialize_layout(const AnnotatedLayout& layout) {
    return layout_to_json(layout).dump(2);
}

}  // namespace mdf
