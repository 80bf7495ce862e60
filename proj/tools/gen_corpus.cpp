// Generates the bundled retrieval corpus: 30 manuals with three-level
// section hierarchies plus 60 QA records whose evidence spans a subsection
// boundary. Deterministic for a fixed seed; outputs layouts/*.json and
// qa.jsonl under the given directory.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "mdf/layout.hpp"
#include "mdf/metrics.hpp"
#include "mdf/store.hpp"

namespace fs = std::filesystem;

namespace {

using rng_t = std::mt19937_64;

const std::vector<std::string>& filler_pool() {
    static const std::vector<std::string> pool = {
        "panel",    "signal",   "module",  "inspect", "record",  "adjust",  "measure",
        "housing",  "bracket",  "sensor",  "output",  "input",   "current", "cycle",
        "release",  "rotate",   "mount",   "align",   "verify",  "remove",  "install",
        "primary",  "backup",   "manual",  "switch",  "cable",   "filter",  "intake",
        "exhaust",  "chamber",  "reading", "display", "status",  "power",   "ground",
        "terminal", "assembly", "service", "routine", "storage", "battery", "charge",
        "monitor",  "gauge",    "limit",   "range",   "select",  "confirm"};
    return pool;
}

/// Unique pronounceable words, indexed deterministically.
std::string coined_word(std::size_t n) {
    static const std::vector<std::string> syllables = {
        "ba", "cel", "dor", "fen", "gri", "hul", "jam", "kov", "lin", "mer",
        "nop", "pra", "qui", "ros", "tav", "urn", "vex", "wil", "xan", "zeb"};
    std::string w;
    w += syllables[n % syllables.size()];
    w += syllables[(n / syllables.size()) % syllables.size()];
    w += syllables[(n / (syllables.size() * syllables.size())) % syllables.size()];
    return w;
}

std::string filler_sentence(rng_t& rng, std::size_t tokens) {
    const auto& pool = filler_pool();
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::string s;
    for (std::size_t i = 0; i < tokens; ++i) {
        if (!s.empty()) s += ' ';
        s += pool[pick(rng)];
    }
    return s;
}

/// Splices `word` in after `at` tokens of `base`.
std::string with_word_at(const std::string& base, const std::string& word, std::size_t at) {
    std::size_t pos = 0;
    for (std::size_t seen = 0; seen < at && pos != std::string::npos; ++seen) {
        pos = base.find(' ', pos);
        if (pos != std::string::npos) ++pos;
    }
    if (pos == std::string::npos) return base + ' ' + word;
    std::string out = base;
    out.insert(pos, word + ' ');
    return out;
}

struct SubsectionRef {
    std::string first_body_id;   // carries its rare word near the end
    std::string last_body_id;    // carries its rare word near the start
    std::string rare_first;
    std::string rare_last;
    std::string heading_words;   // without the dotted number
};

struct SectionRef {
    std::string heading_words;
    std::vector<SubsectionRef> subsections;
};

struct DocRef {
    std::string document_id;
    std::vector<SectionRef> sections;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::cerr << "usage: mdf-gen-corpus <out-dir> [seed]\n";
        return 1;
    }
    const fs::path out_dir = argv[1];
    const unsigned long long seed = argc == 3 ? std::stoull(argv[2]) : 20260818ULL;
    rng_t rng(seed);
    fs::create_directories(out_dir / "layouts");

    std::size_t next_word = 0;
    const auto coin_pair = [&] {
        std::string w = coined_word(next_word++);
        w += ' ';
        w += coined_word(next_word++);
        return w;
    };

    std::uniform_int_distribution<std::size_t> body_len(590, 650);
    std::uniform_int_distribution<std::size_t> intro_len(90, 110);
    std::uniform_int_distribution<std::size_t> near(2, 9);

    std::vector<DocRef> docs;
    for (int d = 0; d < 30; ++d) {
        char doc_id[16];
        std::snprintf(doc_id, sizeof doc_id, "corpus-%02d", d);
        DocRef doc;
        doc.document_id = doc_id;

        mdf::AnnotatedLayout layout;
        layout.document_id = doc_id;
        int top = 0;
        int seg = 0;
        const auto add = [&](mdf::SegmentType type, std::string text) {
            mdf::Segment s;
            s.id = "s" + std::to_string(seg++);
            s.segment_type = type;
            s.text = std::move(text);
            s.bbox.page_number = top / 2200;
            s.bbox.top = top % 2200;
            s.bbox.left = 40;
            top += 180;
            return layout.segments.emplace_back(s).id;
        };

        add(mdf::SegmentType::Title, "OPERATIONS REFERENCE VOLUME " + std::to_string(d + 1));
        for (int s = 1; s <= 3; ++s) {
            SectionRef section;
            section.heading_words = coin_pair();
            add(mdf::SegmentType::SectionHeader,
                std::to_string(s) + " " + section.heading_words);
            add(mdf::SegmentType::Text, filler_sentence(rng, intro_len(rng)));
            for (int t = 1; t <= 3; ++t) {
                SubsectionRef sub;
                sub.heading_words = coin_pair();
                sub.rare_first = coined_word(next_word++);
                sub.rare_last = coined_word(next_word++);
                add(mdf::SegmentType::SectionHeader,
                    std::to_string(s) + "." + std::to_string(t) + " " + sub.heading_words);
                const std::size_t len_a = body_len(rng);
                sub.first_body_id =
                    add(mdf::SegmentType::Text,
                        with_word_at(filler_sentence(rng, len_a), sub.rare_first,
                                     len_a - near(rng)));
                const std::size_t len_b = body_len(rng);
                sub.last_body_id =
                    add(mdf::SegmentType::Text,
                        with_word_at(filler_sentence(rng, len_b), sub.rare_last, near(rng)));
                section.subsections.push_back(std::move(sub));
            }
            doc.sections.push_back(std::move(section));
        }
        mdf::write_text_file(out_dir / "layouts" / (doc.document_id + ".json"),
                             mdf::serialize_layout(layout));
        docs.push_back(std::move(doc));
    }

    // two boundary questions per document, over distinct (section, boundary) pairs
    std::string qa_lines;
    int query_n = 0;
    std::uniform_int_distribution<int> pick_section(0, 2);
    std::uniform_int_distribution<int> pick_boundary(0, 1);
    for (const DocRef& doc : docs) {
        std::vector<std::pair<int, int>> chosen;
        while (chosen.size() < 2) {
            const std::pair<int, int> c{pick_section(rng), pick_boundary(rng)};
            if (chosen.empty() || chosen[0] != c) chosen.push_back(c);
        }
        for (const auto& [s, t] : chosen) {
            const SectionRef& section = doc.sections[s];
            const SubsectionRef& before = section.subsections[t];
            const SubsectionRef& after = section.subsections[t + 1];
            mdf::QaRecord qa;
            qa.query_id = "q" + std::to_string(++query_n);
            qa.question = "Under " + section.heading_words + ", how does " +
                          before.heading_words + " hand over to " + after.heading_words +
                          " between " + before.rare_last + " and " + after.rare_first + "?";
            qa.gold_answers = {before.rare_last + " " + after.rare_first};
            qa.gold_evidence = {{doc.document_id, before.last_body_id, std::nullopt},
                                {doc.document_id, after.first_body_id, std::nullopt}};
            qa_lines += mdf::qa_record_to_json(qa).dump();
            qa_lines += '\n';
        }
    }
    mdf::write_text_file(out_dir / "qa.jsonl", qa_lines);
    std::cout << "wrote " << docs.size() << " layouts and " << query_n << " qa records to "
              << out_dir.string() << "\n";
    return 0;
}
