#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mdf/bm25.hpp"
#include "mdf/chunker.hpp"
#include "mdf/hierarchy.hpp"
#include "mdf/layout.hpp"
#include "mdf/text.hpp"

namespace mdf {

struct EvidenceRef {
    std::string document_id;
    std::optional<std::string> segment_id;
    std::optional<int> page_number;

    bool operator==(const EvidenceRef&) const = default;
};

struct QaRecord {
    std::string query_id;
    std::string question;
    std::vector<std::string> gold_answers;  // non-empty
    std::vector<EvidenceRef> gold_evidence;

    bool operator==(const QaRecord&) const = default;
};

struct RelevanceJudgment {
    std::string query_id;
    std::set<std::string> relevant_chunk_ids;
};

inline QaRecord qa_record_from_json(const json& j) {
    QaRecord qa;
    qa.query_id = j.at("query_id").get<std::string>();
    qa.question = j.at("question").get<std::string>();
    qa.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
    if (qa.gold_answers.empty()) {
        throw ValidationError("qa record '" + qa.query_id + "': gold_answers is empty");
    }
    if (j.contains("gold_evidence") && !j.at("gold_evidence").is_null()) {
        for (const json& e : j.at("gold_evidence")) {
            EvidenceRef ref;
            ref.document_id = e.at("document_id").get<std::string>();
            if (e.contains("segment_id") && !e.at("segment_id").is_null()) {
                ref.segment_id = e.at("segment_id").get<std::string>();
            }
            if (e.contains("page_number") && !e.at("page_number").is_null()) {
                ref.page_number = e.at("page_number").get<int>();
            }
            if (ref.segment_id.has_value() == ref.page_number.has_value()) {
                throw ValidationError("qa record '" + qa.query_id +
                                      "': evidence needs exactly one of segment_id, page_number");
            }
            qa.gold_evidence.push_back(std::move(ref));
        }
    }
    return qa;
}

inline json qa_record_to_json(const QaRecord& qa) {
    json out;
    out["query_id"] = qa.query_id;
    out["question"] = qa.question;
    out["gold_answers"] = qa.gold_answers;
    if (!qa.gold_evidence.empty()) {
        json evidence = json::array();
        for (const EvidenceRef& ref : qa.gold_evidence) {
            json e;
            e["document_id"] = ref.document_id;
            if (ref.segment_id) e["segment_id"] = *ref.segment_id;
            if (ref.page_number) e["page_number"] = *ref.page_number;
            evidence.push_back(std::move(e));
        }
        out["gold_evidence"] = std::move(evidence);
    }
    return out;
}

/// Per-corpus lookup: document -> segment -> page.
struct LayoutIndex {
    std::map<std::string, std::map<std::string, int>> pages;

    static LayoutIndex build(const std::vector<AnnotatedLayout>& layouts) {
        LayoutIndex index;
        for (const AnnotatedLayout& layout : layouts) {
            auto& doc = index.pages[layout.document_id];
            for (const Segment& seg : layout.segments) doc[seg.id] = seg.bbox.page_number;
        }
        return index;
    }
};

/// Evidence wins when present: a chunk is relevant iff its sources touch an
/// evidence segment or page. Without evidence, a normalized gold answer must
/// occur inside the normalized chunk text.
inline RelevanceJudgment label_relevance(const std::vector<Chunk>& chunks, const QaRecord& qa,
                                         const LayoutIndex& index) {
    RelevanceJudgment judgment;
    judgment.query_id = qa.query_id;

    if (!qa.gold_evidence.empty()) {
        for (const EvidenceRef& ref : qa.gold_evidence) {
            const auto doc = index.pages.find(ref.document_id);
            if (doc == index.pages.end()) {
                throw ValidationError("evidence document '" + ref.document_id + "' not in corpus");
            }
            if (ref.segment_id && doc->second.find(*ref.segment_id) == doc->second.end()) {
                throw ValidationError("evidence segment '" + *ref.segment_id +
                                      "' not in document '" + ref.document_id + "'");
            }
        }
        for (const Chunk& chunk : chunks) {
            const auto doc = index.pages.find(chunk.document_id);
            for (const EvidenceRef& ref : qa.gold_evidence) {
                if (chunk.document_id != ref.document_id) continue;
                bool hit = false;
                for (const std::string& source : chunk.source_node_ids) {
                    if (ref.segment_id) {
                        hit = source == *ref.segment_id;
                    } else if (doc != index.pages.end()) {
                        const auto seg = doc->second.find(source);
                        hit = seg != doc->second.end() && seg->second == *ref.page_number;
                    }
                    if (hit) break;
                }
                if (hit) {
                    judgment.relevant_chunk_ids.insert(chunk.chunk_id);
                    break;
                }
            }
        }
        return judgment;
    }

    std::vector<std::string> needles;
    for (const std::string& answer : qa.gold_answers) {
        std::string n = normalize_for_match(answer);
        if (!n.empty()) needles.push_back(std::move(n));
    }
    for (const Chunk& chunk : chunks) {
        const std::string haystack = normalize_for_match(chunk.text);
        for (const std::string& needle : needles) {
            if (haystack.find(needle) != std::string::npos) {
                judgment.relevant_chunk_ids.insert(chunk.chunk_id);
                break;
            }
        }
    }
    return judgment;
}

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

/// nullopt = query skipped (no relevant chunks exist).
inline std::optional<PrecisionRecall> precision_recall_at_k(const RetrievalResult& result,
                                                            const RelevanceJudgment& judgment,
                                                            int k) {
    if (k < 1) throw ValidationError("precision_recall_at_k: k must be >= 1");
    if (judgment.relevant_chunk_ids.empty()) return std::nullopt;
    std::size_t hits = 0;
    const std::size_t top = std::min<std::size_t>(result.hits.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < top; ++i) {
        if (judgment.relevant_chunk_ids.count(result.hits[i].chunk_id)) ++hits;
    }
    PrecisionRecall pr;
    pr.precision = static_cast<double>(hits) / static_cast<double>(k);
    pr.recall = static_cast<double>(hits) / static_cast<double>(judgment.relevant_chunk_ids.size());
    return pr;
}

inline std::optional<double> ndcg_at_k(const RetrievalResult& result,
                                       const RelevanceJudgment& judgment, int k) {
    if (k < 1) throw ValidationError("ndcg_at_k: k must be >= 1");
    if (judgment.relevant_chunk_ids.empty()) return std::nullopt;
    double dcg = 0.0;
    const std::size_t top = std::min<std::size_t>(result.hits.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < top; ++i) {
        if (judgment.relevant_chunk_ids.count(result.hits[i].chunk_id)) {
            dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    const std::size_t ideal =
        std::min<std::size_t>(judgment.relevant_chunk_ids.size(), static_cast<std::size_t>(k));
    double idcg = 0.0;
    for (std::size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    return dcg / idcg;
}

/// F1 over (id -> parent-or-null) edges.
inline double hierarchy_f1(const HierarchyAssignment& pred, const HierarchyAssignment& gold) {
    std::map<std::string, std::optional<std::string>> gold_edges;
    for (const AssignmentEntry& e : gold.entries) gold_edges[e.id] = e.parent;
    bool overlap = false;
    std::size_t matched = 0;
    for (const AssignmentEntry& e : pred.entries) {
        const auto it = gold_edges.find(e.id);
        if (it == gold_edges.end()) continue;
        overlap = true;
        if (it->second == e.parent) ++matched;
    }
    if (!overlap) throw ValidationError("hierarchy_f1: assignments share no ids");
    if (pred.entries.empty() || gold.entries.empty()) return 0.0;
    const double p = static_cast<double>(matched) / static_cast<double>(pred.entries.size());
    const double r = static_cast<double>(matched) / static_cast<double>(gold.entries.size());
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

namespace detail {

/// Zhang-Shasha working form: postorder labels, leftmost-leaf links, keyroots.
struct ZsTree {
    std::vector<std::string> labels;
    std::vector<int> lml;
    std::vector<int> keyroots;
};

inline ZsTree zs_prepare(const DocumentTree& tree) {
    ZsTree zs;
    std::vector<int> parent_of;
    const auto walk = [&](auto&& self, const std::string& id) -> int {
        const TreeNode& n = tree.node(id);
        int first_child = -1;
        for (const std::string& child : n.children) {
            const int c = self(self, child);
            if (first_child == -1) first_child = c;
        }
        const int me = static_cast<int>(zs.labels.size());
        zs.labels.push_back(std::string(to_string(n.kind)) + '\x1f' + normalize_label(n.text));
        zs.lml.push_back(first_child == -1 ? me : zs.lml[first_child]);
        return me;
    };
    walk(walk, tree.root_id);
    // Keyroots: nodes that are not the leftmost child of their parent (plus
    // the root), i.e. the highest node of each distinct leftmost-leaf chain.
    std::vector<bool> seen(zs.labels.size(), false);
    for (int i = static_cast<int>(zs.labels.size()) - 1; i >= 0; --i) {
        if (!seen[zs.lml[i]]) {
            seen[zs.lml[i]] = true;
            zs.keyroots.push_back(i);
        }
    }
    std::sort(zs.keyroots.begin(), zs.keyroots.end());
    return zs;
}

inline int zs_tree_distance(const ZsTree& a, const ZsTree& b) {
    const int n = static_cast<int>(a.labels.size());
    const int m = static_cast<int>(b.labels.size());
    std::vector<std::vector<int>> td(n, std::vector<int>(m, 0));
    std::vector<std::vector<int>> fd(n + 1, std::vector<int>(m + 1, 0));
    for (const int i : a.keyroots) {
        for (const int j : b.keyroots) {
            const int ioff = a.lml[i] - 1;
            const int joff = b.lml[j] - 1;
            const int rows = i - a.lml[i] + 2;
            const int cols = j - b.lml[j] + 2;
            fd[0][0] = 0;
            for (int di = 1; di < rows; ++di) fd[di][0] = fd[di - 1][0] + 1;
            for (int dj = 1; dj < cols; ++dj) fd[0][dj] = fd[0][dj - 1] + 1;
            for (int di = 1; di < rows; ++di) {
                for (int dj = 1; dj < cols; ++dj) {
                    const int pi = di + ioff;
                    const int pj = dj + joff;
                    if (a.lml[pi] == a.lml[i] && b.lml[pj] == b.lml[j]) {
                        const int rename = a.labels[pi] == b.labels[pj] ? 0 : 1;
                        fd[di][dj] = std::min({fd[di - 1][dj] + 1, fd[di][dj - 1] + 1,
                                               fd[di - 1][dj - 1] + rename});
                        td[pi][pj] = fd[di][dj];
                    } else {
                        fd[di][dj] = std::min({fd[di - 1][dj] + 1, fd[di][dj - 1] + 1,
                                               fd[a.lml[pi] - 1 - ioff][b.lml[pj] - 1 - joff] +
                                                   td[pi][pj]});
                    }
                }
            }
        }
    }
    return td[n - 1][m - 1];
}

}  // namespace detail

inline int tree_edit_distance(const DocumentTree& pred, const DocumentTree& gold) {
    return detail::zs_tree_distance(detail::zs_prepare(pred), detail::zs_prepare(gold));
}

/// 1 - TED/max(|T1|,|T2|), clamped to [0,1] (TED can exceed the larger size
/// for shape-disjoint trees).
inline double teds(const DocumentTree& pred, const DocumentTree& gold) {
    const double ted = static_cast<double>(tree_edit_distance(pred, gold));
    const double denom = static_cast<double>(std::max(pred.nodes.size(), gold.nodes.size()));
    return std::max(0.0, 1.0 - ted / denom);
}

namespace detail {

inline std::vector<char32_t> fold_code_points(std::string_view s) {
    std::vector<char32_t> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t len = 0;
        char32_t cp = decode_utf8(s, pos, len);
        if (cp >= U'A' && cp <= U'Z') cp += 0x20;
        out.push_back(cp);
        pos += len;
    }
    return out;
}

inline std::size_t levenshtein(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

/// Case-insensitive normalized Levenshtein similarity, 0.5 threshold, best
/// gold wins.
inline double anls(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw ValidationError("anls: golds must be non-empty");
    const std::vector<char32_t> pred = detail::fold_code_points(prediction);
    double best = 0.0;
    for (const std::string& g : golds) {
        const std::vector<char32_t> gold = detail::fold_code_points(g);
        const std::size_t longest = std::max(pred.size(), gold.size());
        const double similarity =
            longest == 0
                ? 1.0
                : 1.0 - static_cast<double>(detail::levenshtein(pred, gold)) /
                            static_cast<double>(longest);
        if (similarity >= 0.5) best = std::max(best, similarity);
    }
    return best;
}

/// Mean retrieval metrics at each cutoff, then the mean of those means.
/// Queries with empty judgments are counted as skipped, never scored.
struct RetrievalEval {
    std::map<int, double> precision;
    std::map<int, double> recall;
    std::map<int, double> ndcg;
    double avg_precision = 0.0;
    double avg_recall = 0.0;
    double avg_ndcg = 0.0;
    int scored = 0;
    int skipped = 0;
};

inline RetrievalEval evaluate_retrieval(const std::vector<QaRecord>& qa,
                                        const std::map<std::string, RetrievalResult>& results,
                                        const std::vector<Chunk>& chunks,
                                        const LayoutIndex& index,
                                        const std::vector<int>& ks = {1, 2, 3, 4}) {
    RetrievalEval eval;
    std::map<int, double> p_sum, r_sum, n_sum;
    for (const QaRecord& record : qa) {
        const RelevanceJudgment judgment = label_relevance(chunks, record, index);
        if (judgment.relevant_chunk_ids.empty()) {
            ++eval.skipped;
            continue;
        }
        ++eval.scored;
        RetrievalResult empty;
        const auto it = results.find(record.query_id);
        const RetrievalResult& result = it == results.end() ? empty : it->second;
        for (const int k : ks) {
            const auto pr = precision_recall_at_k(result, judgment, k);
            p_sum[k] += pr->precision;
            r_sum[k] += pr->recall;
            n_sum[k] += *ndcg_at_k(result, judgment, k);
        }
    }
    for (const int k : ks) {
        const double n = eval.scored == 0 ? 1.0 : static_cast<double>(eval.scored);
        eval.precision[k] = p_sum[k] / n;
        eval.recall[k] = r_sum[k] / n;
        eval.ndcg[k] = n_sum[k] / n;
        eval.avg_precision += eval.precision[k];
        eval.avg_recall += eval.recall[k];
        eval.avg_ndcg += eval.ndcg[k];
    }
    if (!ks.empty()) {
        const double nk = static_cast<double>(ks.size());
        eval.avg_precision /= nk;
        eval.avg_recall /= nk;
        eval.avg_ndcg /= nk;
    }
    return eval;
}

/// LCS F1 over lowercased whitespace tokens.
inline double rouge_l(std::string_view prediction, std::string_view gold) {
    const auto tokens = [](std::string_view s) {
        std::vector<std::string> out;
        for (const TokenSpan& span : whitespace_token_spans(s)) {
            out.push_back(ascii_lower(s.substr(span.begin, span.end - span.begin)));
        }
        return out;
    };
    const std::vector<std::string> p = tokens(prediction);
    const std::vector<std::string> g = tokens(gold);
    if (p.empty() || g.empty()) return 0.0;
    std::vector<std::size_t> prev(g.size() + 1, 0);
    std::vector<std::size_t> cur(g.size() + 1, 0);
    for (std::size_t i = 1; i <= p.size(); ++i) {
        for (std::size_t j = 1; j <= g.size(); ++j) {
            cur[j] = p[i - 1] == g[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[g.size()]);
    if (lcs == 0.0) return 0.0;
    const double precision = lcs / static_cast<double>(p.size());
    const double recall = lcs / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace mdf
