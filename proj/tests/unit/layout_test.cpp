#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "mdf/error.hpp"
#include "mdf/layout.hpp"

#include "common/generators.hpp"

namespace {

mdf::Segment seg(std::string id, mdf::SegmentType type, int page, int top, int left,
                 std::string text = "") {
    mdf::Segment s;
    s.id = std::move(id);
    s.segment_type = type;
    s.bbox.page_number = page;
    s.bbox.top = top;
    s.bbox.left = left;
    s.text = std::move(text);
    return s;
}

}  // namespace

TEST_CASE("parse_layout accepts a minimal one-segment document") {
    const std::string doc = R"({"document_id":"d1","segments":[
        {"id":"1","segment_type":"Text","page_number":0,"top":10,"left":5,"text":"hi"}]})";
    const auto layout = mdf::parse_layout(doc);
    REQUIRE(layout.segments.size() == 1);
    CHECK(layout.document_id == "d1");
    CHECK(layout.segments[0].id == "1");
    CHECK(layout.segments[0].segment_type == mdf::SegmentType::Text);
    CHECK(layout.segments[0].text == "hi");
}

TEST_CASE("parse_layout rejects duplicate segment ids naming the id") {
    const std::string doc = R"({"document_id":"d","segments":[
        {"id":"a","segment_type":"Text","page_number":0,"top":0,"left":0,"text":""},
        {"id":"a","segment_type":"Text","page_number":0,"top":1,"left":0,"text":""}]})";
    try {
        mdf::parse_layout(doc);
        FAIL("expected a validation error");
    } catch (const mdf::ValidationError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }
}

TEST_CASE("parse_layout reports malformed JSON with a byte offset") {
    try {
        mdf::parse_layout("{\"document_id\": ");
        FAIL("expected a parse error");
    } catch (const mdf::ParseError& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("parse_layout names missing fields and the segment index") {
    const std::string doc = R"({"document_id":"d","segments":[
        {"id":"a","segment_type":"Text","top":0,"left":0,"text":""}]})";
    try {
        mdf::parse_layout(doc);
        FAIL("expected a validation error");
    } catch (const mdf::ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("page_number") != std::string::npos);
        CHECK(msg.find("0") != std::string::npos);
    }
}

TEST_CASE("parse_layout sorts segments into reading order") {
    const std::string doc = R"({"document_id":"d","segments":[
        {"id":"late","segment_type":"Text","page_number":1,"top":0,"left":0,"text":""},
        {"id":"early","segment_type":"Text","page_number":0,"top":999,"left":0,"text":""}]})";
    const auto layout = mdf::parse_layout(doc);
    REQUIRE(layout.segments.size() == 2);
    CHECK(layout.segments[0].id == "early");
    CHECK(layout.segments[1].id == "late");
}

TEST_CASE("parse_layout maps unknown segment types to Other") {
    const std::string doc = R"({"document_id":"d","segments":[
        {"id":"a","segment_type":"Formula","page_number":0,"top":0,"left":0,"text":""}]})";
    CHECK(mdf::parse_layout(doc).segments[0].segment_type == mdf::SegmentType::Other);
}

TEST_CASE("reading_order_sort orders by page, then top, then left") {
    SECTION("top within a page") {
        auto out = mdf::reading_order_sort(
            {seg("a", mdf::SegmentType::Text, 0, 200, 0), seg("b", mdf::SegmentType::Text, 0, 100, 0)});
        CHECK(out[0].id == "b");
        CHECK(out[1].id == "a");
    }
    SECTION("page dominates") {
        auto out = mdf::reading_order_sort(
            {seg("a", mdf::SegmentType::Text, 1, 0, 0), seg("b", mdf::SegmentType::Text, 0, 999, 0)});
        CHECK(out[0].id == "b");
    }
    SECTION("left breaks top ties") {
        auto out = mdf::reading_order_sort(
            {seg("a", mdf::SegmentType::Text, 0, 50, 300), seg("b", mdf::SegmentType::Text, 0, 50, 10)});
        CHECK(out[0].id == "b");
    }
}

TEST_CASE("reading_order_sort matches the lexicographic key on all small permutations") {
    // Four segments with some shared keys; every permutation must sort to a
    // stable arrangement that agrees with an independent lexicographic sort.
    std::vector<mdf::Segment> base = {
        seg("p", mdf::SegmentType::Text, 0, 10, 10), seg("q", mdf::SegmentType::Text, 0, 10, 10),
        seg("r", mdf::SegmentType::Text, 0, 5, 99), seg("s", mdf::SegmentType::Text, 1, 0, 0)};
    std::vector<std::size_t> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end());
    do {
        std::vector<mdf::Segment> input;
        for (auto i : order) input.push_back(base[i]);
        const auto sorted = mdf::reading_order_sort(input);

        std::vector<mdf::Segment> expect = input;
        std::stable_sort(expect.begin(), expect.end(),
                         [](const mdf::Segment& a, const mdf::Segment& b) {
                             return std::make_tuple(a.bbox.page_number, a.bbox.top, a.bbox.left) <
                                    std::make_tuple(b.bbox.page_number, b.bbox.top, b.bbox.left);
                         });
        REQUIRE(sorted.size() == expect.size());
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            INFO("position " << i);
            CHECK(sorted[i].id == expect[i].id);
        }
    } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("reading_order_sort is idempotent and a permutation of its input") {
    mdft::rng_t rng(7);
    for (int i = 0; i < 50; ++i) {
        auto layout = mdft::random_layout(rng, "doc");
        auto once = mdf::reading_order_sort(layout.segments);
        auto twice = mdf::reading_order_sort(once);
        CHECK(once == twice);
        auto ids_in = layout.segments;
        auto ids_out = once;
        auto by_id = [](const mdf::Segment& a, const mdf::Segment& b) { return a.id < b.id; };
        std::sort(ids_in.begin(), ids_in.end(), by_id);
        std::sort(ids_out.begin(), ids_out.end(), by_id);
        CHECK(ids_in == ids_out);
    }
}

TEST_CASE("extract_header_list keeps titles and section headers in order") {
    mdf::AnnotatedLayout layout;
    layout.document_id = "d";
    layout.segments = {seg("t", mdf::SegmentType::Title, 0, 0, 0),
                       seg("x", mdf::SegmentType::Text, 0, 10, 0),
                       seg("h", mdf::SegmentType::SectionHeader, 0, 20, 0)};
    const auto headers = mdf::extract_header_list(layout);
    REQUIRE(headers.headers.size() == 2);
    CHECK(headers.headers[0].id == "t");
    CHECK(headers.headers[1].id == "h");
}

TEST_CASE("extract_header_list yields empty for text-only layouts") {
    mdf::AnnotatedLayout layout;
    layout.document_id = "d";
    layout.segments = {seg("x", mdf::SegmentType::Text, 0, 0, 0)};
    CHECK(mdf::extract_header_list(layout).headers.empty());
}

TEST_CASE("extract_header_list is a subsequence of reading order") {
    mdft::rng_t rng(11);
    for (int i = 0; i < 50; ++i) {
        const auto layout = mdft::random_layout(rng, "doc");
        const auto headers = mdf::extract_header_list(layout).headers;
        std::size_t cursor = 0;
        for (const auto& h : headers) {
            while (cursor < layout.segments.size() && layout.segments[cursor].id != h.id) ++cursor;
            REQUIRE(cursor < layout.segments.size());
            ++cursor;
        }
    }
}

TEST_CASE("serialize then parse is the identity on valid layouts") {
    mdft::rng_t rng(13);
    for (int i = 0; i < 100; ++i) {
        const auto layout = mdft::random_layout(rng, "doc-" + std::to_string(i));
        const auto back = mdf::parse_layout(mdf::serialize_layout(layout));
        CHECK(back == layout);
    }
}

TEST_CASE("header extraction matches the reference document sample") {
    // Seven headers, ids 2, 5, 23, 37, 39, 44, 46, surrounded by body text.
    mdf::AnnotatedLayout layout;
    layout.document_id = "sample";
    int top = 0;
    auto add = [&](std::string id, mdf::SegmentType type, std::string text) {
        layout.segments.push_back(seg(std::move(id), type, top / 1000, top % 1000, 0, std::move(text)));
        top += 25;
    };
    add("2", mdf::SegmentType::Title, "CONGRESSIONAL BUDGET OFFICE COST ESTIMATE");
    add("3", mdf::SegmentType::Text, "body");
    add("5", mdf::SegmentType::SectionHeader, "SUMMARY");
    add("9", mdf::SegmentType::Text, "body");
    add("23", mdf::SegmentType::SectionHeader, "ESTIMATED COST TO THE FEDERAL GOVERNMENT");
    add("30", mdf::SegmentType::Text, "body");
    add("37", mdf::SegmentType::SectionHeader, "PAY-AS-YOU-GO CONSIDERATIONS");
    add("39", mdf::SegmentType::SectionHeader, "INCREASE IN LONG-TERM DIRECT SPENDING");
    add("44", mdf::SegmentType::SectionHeader, "MANDATES");
    add("46", mdf::SegmentType::SectionHeader, "PREVIOUS CBO ESTIMATE");

    const auto headers = mdf::extract_header_list(layout).headers;
    const std::vector<std::string> expect = {"2", "5", "23", "37", "39", "44", "46"};
    REQUIRE(headers.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(headers[i].id == expect[i]);
}
