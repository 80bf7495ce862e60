#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mdf/bm25.hpp"
#include "mdf/error.hpp"

#include "common/generators.hpp"
#include "common/oracles.hpp"

namespace {

std::vector<mdf::Chunk> corpus(const std::vector<std::string>& texts) {
    std::vector<mdf::Chunk> chunks;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        mdf::Chunk c;
        c.chunk_id = "doc#" + std::to_string(i);
        c.document_id = "doc";
        c.text = texts[i];
        chunks.push_back(std::move(c));
    }
    return chunks;
}

}  // namespace

TEST_CASE("build_bm25_index counts document frequencies and lengths") {
    const auto index = mdf::build_bm25_index(corpus({"a", "b", "a"}));
    CHECK(index.postings.at("a").size() == 2);
    CHECK(index.postings.at("b").size() == 1);
    CHECK(index.avg_doc_length == Catch::Approx(1.0));
    CHECK(index.n_docs() == 3);
}

TEST_CASE("a single chunk sets the average length to its own") {
    const auto index = mdf::build_bm25_index(corpus({"one two three four"}));
    CHECK(index.avg_doc_length == Catch::Approx(4.0));
}

TEST_CASE("idf matches the hand formula on a toy corpus") {
    const auto index = mdf::build_bm25_index(
        corpus({"cat sat", "dog ran", "cat ran", "bird flew", "cat dog bird"}));
    const double n = 5.0;
    for (const auto& [term, rows] : index.postings) {
        const double df = static_cast<double>(rows.size());
        const double want = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        CHECK_THAT(index.idf(term), Catch::Matchers::WithinAbs(want, 1e-9));
    }
    // absent terms take df = 0
    CHECK_THAT(index.idf("absent"),
               Catch::Matchers::WithinAbs(std::log((n + 0.5) / 0.5 + 1.0), 1e-9));
}

TEST_CASE("build_bm25_index validates parameters and corpus content") {
    CHECK_THROWS_AS(mdf::build_bm25_index(corpus({"a"}), 0.0, 0.75), mdf::ValidationError);
    CHECK_THROWS_AS(mdf::build_bm25_index(corpus({"a"}), 1.2, 1.5), mdf::ValidationError);
    CHECK_THROWS_AS(mdf::build_bm25_index(corpus({"a"}), 1.2, -0.1), mdf::ValidationError);
    CHECK_THROWS_AS(mdf::build_bm25_index({}), mdf::ValidationError);
    CHECK_THROWS_AS(mdf::build_bm25_index(corpus({"...", "  "})), mdf::ValidationError);
}

TEST_CASE("query finds the chunk holding a unique term") {
    const auto index = mdf::build_bm25_index(corpus({"cat sat", "dog ran", "cat ran"}));
    const auto result = mdf::query(index, "dog", 1);
    REQUIRE(result.hits.size() == 1);
    CHECK(result.hits[0].chunk_id == "doc#1");
    CHECK(result.hits[0].score > 0.0);
}

TEST_CASE("query returns nothing when the term is absent everywhere") {
    const auto index = mdf::build_bm25_index(corpus({"cat sat", "dog ran"}));
    CHECK(mdf::query(index, "zebra", 4).hits.empty());
    CHECK(mdf::query(index, "", 4).hits.empty());
}

TEST_CASE("query scores match the exhaustive formula on the toy corpus") {
    const std::vector<std::string> texts = {"cat sat", "dog ran", "cat ran"};
    const auto index = mdf::build_bm25_index(corpus(texts));
    const auto result = mdf::query(index, "cat ran", 3);

    std::vector<std::vector<std::string>> docs;
    for (const auto& t : texts) docs.push_back(mdft::ref_lower_tokens(t));
    const auto scores = mdft::ref_bm25_scores(docs, {"cat", "ran"}, 1.2, 0.75);
    const auto want = mdft::ref_bm25_rank({"doc#0", "doc#1", "doc#2"}, scores, 3);

    REQUIRE(result.hits.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(result.hits[i].chunk_id == want[i].first);
        CHECK_THAT(result.hits[i].score, Catch::Matchers::WithinAbs(want[i].second, 1e-9));
    }
}

TEST_CASE("query matches exhaustive evaluation on random corpora") {
    mdft::rng_t rng(73);
    for (int round = 0; round < 25; ++round) {
        const std::size_t n_chunks = mdft::pick(rng, 50) + 1;
        std::vector<std::string> texts;
        std::vector<std::vector<std::string>> docs;
        bool any_token = false;
        for (std::size_t i = 0; i < n_chunks; ++i) {
            const std::size_t len = mdft::pick(rng, 21);
            texts.push_back(mdft::random_sentence(rng, len));
            docs.push_back(mdft::ref_lower_tokens(texts.back()));
            any_token = any_token || len > 0;
        }
        if (!any_token) continue;
        const auto chunks = corpus(texts);
        const auto index = mdf::build_bm25_index(chunks);

        std::vector<std::string> ids;
        for (const auto& c : chunks) ids.push_back(c.chunk_id);

        for (int q = 0; q < 10; ++q) {
            std::vector<std::string> query_tokens;
            const std::size_t qn = mdft::pick(rng, 5) + 1;
            std::string question;
            for (std::size_t t = 0; t < qn; ++t) {
                query_tokens.push_back(mdft::random_word(rng));
                if (!question.empty()) question += ' ';
                question += query_tokens.back();
            }
            const int k = static_cast<int>(mdft::pick(rng, 6)) + 1;
            const auto result = mdf::query(index, question, k);
            const auto scores = mdft::ref_bm25_scores(docs, query_tokens, 1.2, 0.75);
            const auto want = mdft::ref_bm25_rank(ids, scores, static_cast<std::size_t>(k));
            REQUIRE(result.hits.size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                CHECK(result.hits[i].chunk_id == want[i].first);
                CHECK_THAT(result.hits[i].score,
                           Catch::Matchers::WithinAbs(want[i].second, 1e-9));
            }
        }
    }
}

TEST_CASE("duplicating a query term never lowers a score") {
    mdft::rng_t rng(79);
    for (int round = 0; round < 20; ++round) {
        std::vector<std::string> texts;
        for (std::size_t i = 0; i < mdft::pick(rng, 10) + 2; ++i) {
            texts.push_back(mdft::random_sentence(rng, mdft::pick(rng, 15) + 1));
        }
        const auto index = mdf::build_bm25_index(corpus(texts));
        const std::string term = mdft::random_word(rng);
        const auto once = mdf::query(index, term, 50);
        const auto twice = mdf::query(index, term + " " + term, 50);
        REQUIRE(once.hits.size() == twice.hits.size());
        for (std::size_t i = 0; i < once.hits.size(); ++i) {
            CHECK(twice.hits[i].score >= once.hits[i].score);
        }
        // per-occurrence contribution is exact doubling
        for (const auto& hit : twice.hits) {
            const auto match = std::find_if(once.hits.begin(), once.hits.end(),
                                            [&](const auto& h) { return h.chunk_id == hit.chunk_id; });
            REQUIRE(match != once.hits.end());
            CHECK(hit.score == 2.0 * match->score);
        }
    }
}

TEST_CASE("permuting the corpus changes no query outcome") {
    mdft::rng_t rng(83);
    std::vector<std::string> texts;
    for (int i = 0; i < 12; ++i) texts.push_back(mdft::random_sentence(rng, mdft::pick(rng, 12) + 1));
    auto chunks = corpus(texts);
    const auto index_a = mdf::build_bm25_index(chunks);
    std::shuffle(chunks.begin(), chunks.end(), rng);
    const auto index_b = mdf::build_bm25_index(chunks);

    for (int q = 0; q < 20; ++q) {
        const std::string question =
            mdft::random_word(rng) + " " + mdft::random_word(rng);
        const auto a = mdf::query(index_a, question, 12);
        const auto b = mdf::query(index_b, question, 12);
        REQUIRE(a.hits.size() == b.hits.size());
        for (std::size_t i = 0; i < a.hits.size(); ++i) {
            CHECK(a.hits[i].chunk_id == b.hits[i].chunk_id);
            CHECK_THAT(a.hits[i].score, Catch::Matchers::WithinAbs(b.hits[i].score, 1e-12));
        }
    }
}

TEST_CASE("equal scores break ties by ascending chunk id") {
    const auto index = mdf::build_bm25_index(corpus({"same words here", "same words here"}));
    const auto result = mdf::query(index, "same", 2);
    REQUIRE(result.hits.size() == 2);
    CHECK(result.hits[0].chunk_id == "doc#0");
    CHECK(result.hits[1].chunk_id == "doc#1");
    CHECK(result.hits[0].score == result.hits[1].score);
}

TEST_CASE("zero-scoring chunks never pad the hit list") {
    const auto index = mdf::build_bm25_index(corpus({"apple", "banana", "cherry"}));
    const auto result = mdf::query(index, "apple", 3);
    REQUIRE(result.hits.size() == 1);
    CHECK(result.hits[0].chunk_id == "doc#0");
}

TEST_CASE("query rejects a non-positive k") {
    const auto index = mdf::build_bm25_index(corpus({"a"}));
    CHECK_THROWS_AS(mdf::query(index, "a", 0), mdf::ValidationError);
}

TEST_CASE("the index round-trips through JSON") {
    mdft::rng_t rng(89);
    std::vector<std::string> texts;
    for (int i = 0; i < 10; ++i) texts.push_back(mdft::random_sentence(rng, mdft::pick(rng, 15) + 1));
    const auto index = mdf::build_bm25_index(corpus(texts), 1.5, 0.4);
    const auto back = mdf::bm25_index_from_json(mdf::bm25_index_to_json(index));
    CHECK(back.k1 == index.k1);
    CHECK(back.b == index.b);
    CHECK(back.avg_doc_length == index.avg_doc_length);
    CHECK(back.chunk_ids == index.chunk_ids);
    CHECK(back.doc_lengths == index.doc_lengths);
    CHECK(back.postings == index.postings);
    // a query through the round-tripped index is bit-identical
    const auto a = mdf::query(index, texts[0], 4);
    const auto b = mdf::query(back, texts[0], 4);
    REQUIRE(a.hits.size() == b.hits.size());
    for (std::size_t i = 0; i < a.hits.size(); ++i) {
        CHECK(a.hits[i].chunk_id == b.hits[i].chunk_id);
        CHECK(a.hits[i].score == b.hits[i].score);
    }
}

TEST_CASE("bm25 tokenization is case-insensitive with punctuation stripped") {
    const auto index = mdf::build_bm25_index(corpus({"The Cat, sat.", "dog"}));
    const auto result = mdf::query(index, "CAT!", 1);
    REQUIRE(result.hits.size() == 1);
    CHECK(result.hits[0].chunk_id == "doc#0");
}
