#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mdf/bm25.hpp"
#include "mdf/chunker.hpp"
#include "mdf/hierarchy.hpp"
#include "mdf/layout.hpp"
#include "mdf/metrics.hpp"
#include "mdf/provider.hpp"
#include "mdf/store.hpp"

namespace mdf {

/// Effective settings for one invocation; config-file values fill in any
/// field the command line left untouched.
struct CliOptions {
    std::string method = "multidocfusion";
    int max_len = 550;
    std::string token_counter = "whitespace";
    std::string provider = "heuristic";
    std::string provider_file;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var = "MDF_API_KEY";
    double timeout_seconds = 30.0;
    int max_retries = 2;
    int max_concurrent_requests = 4;
    int k = 4;
    double k1 = 1.2;
    double b = 0.75;
    int jobs = 1;
    std::string out_dir = "runs/run";
};

inline void apply_config_file(CliOptions& opts, const json& config,
                              const std::set<std::string>& explicit_flags) {
    if (!config.is_object()) throw ValidationError("config file must hold a JSON object");
    const auto take = [&](const char* key, auto& slot) {
        if (config.contains(key) && explicit_flags.count(key) == 0) {
            config.at(key).get_to(slot);
        }
    };
    take("method", opts.method);
    take("max_len", opts.max_len);
    take("token_counter", opts.token_counter);
    take("provider", opts.provider);
    take("provider_file", opts.provider_file);
    take("endpoint_url", opts.endpoint_url);
    take("model_name", opts.model_name);
    take("api_key_env_var", opts.api_key_env_var);
    take("timeout_seconds", opts.timeout_seconds);
    take("max_retries", opts.max_retries);
    take("max_concurrent_requests", opts.max_concurrent_requests);
    take("k", opts.k);
    take("k1", opts.k1);
    take("b", opts.b);
    take("jobs", opts.jobs);
    take("out", opts.out_dir);
    for (const auto& [key, value] : config.items()) {
        static const std::set<std::string> known = {
            "method", "max_len", "token_counter", "provider", "provider_file", "endpoint_url",
            "model_name", "api_key_env_var", "timeout_seconds", "max_retries",
            "max_concurrent_requests", "k", "k1", "b", "jobs", "out"};
        if (known.count(key) == 0) {
            throw ValidationError("config file: unknown key '" + key + "'");
        }
    }
}

inline ChunkConfig chunk_config_from(const CliOptions& opts) {
    ChunkConfig config;
    config.max_len = opts.max_len;
    config.method = chunk_method_from_string(opts.method);
    config.token_counter = opts.token_counter;
    return config;
}

inline ProviderConfig provider_config_from(const CliOptions& opts) {
    ProviderConfig config;
    config.kind = provider_kind_from_string(opts.provider);
    config.file_path = opts.provider_file;
    config.endpoint_url = opts.endpoint_url;
    config.model_name = opts.model_name;
    config.api_key_env_var = opts.api_key_env_var;
    config.request_timeout_seconds = opts.timeout_seconds;
    config.max_retries = opts.max_retries;
    config.max_concurrent_requests = opts.max_concurrent_requests;
    return config;
}

namespace detail {

inline std::string iso_utc_now() {
    const std::time_t t =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline int status_code(std::size_t processed, std::size_t failed) {
    if (failed == 0) return 0;
    return processed > 0 ? 2 : 1;
}

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(count, jobs < 1 ? 1 : static_cast<std::size_t>(jobs));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (std::thread& t : pool) t.join();
}

inline std::vector<fs::path> json_files_sorted(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace detail

struct LayoutBatch {
    std::vector<AnnotatedLayout> layouts;  // sorted by document_id
    std::vector<std::string> errors;
    std::string digest;  // over all input files, failed ones included
};

inline LayoutBatch load_layout_dir(const fs::path& dir) {
    LayoutBatch batch;
    std::vector<std::string> hashes;
    std::set<std::string> seen_ids;
    for (const fs::path& path : detail::json_files_sorted(dir)) {
        std::string bytes;
        try {
            bytes = read_text_file(path);
        } catch (const std::exception& e) {
            batch.errors.push_back(e.what());
            continue;
        }
        hashes.push_back(sha256_hex(bytes));
        try {
            AnnotatedLayout layout = parse_layout(bytes);
            if (!seen_ids.insert(layout.document_id).second) {
                throw ValidationError("duplicate document_id '" + layout.document_id + "'");
            }
            batch.layouts.push_back(std::move(layout));
        } catch (const std::exception& e) {
            batch.errors.push_back("'" + path.string() + "': " + e.what());
        }
    }
    std::sort(batch.layouts.begin(), batch.layouts.end(),
              [](const AnnotatedLayout& a, const AnnotatedLayout& b) {
                  return a.document_id < b.document_id;
              });
    batch.digest = corpus_digest(std::move(hashes));
    return batch;
}

struct TreeBatch {
    std::vector<DocumentTree> trees;  // sorted by document_id
    std::vector<std::string> errors;
    std::string digest;
};

inline TreeBatch load_tree_dir(const fs::path& dir) {
    TreeBatch batch;
    std::vector<std::string> hashes;
    for (const fs::path& path : detail::json_files_sorted(dir)) {
        try {
            const std::string bytes = read_text_file(path);
            hashes.push_back(sha256_hex(bytes));
            batch.trees.push_back(
                tree_from_json(detail::parse_json(bytes, path)));
        } catch (const std::exception& e) {
            batch.errors.push_back("'" + path.string() + "': " + e.what());
        }
    }
    std::sort(batch.trees.begin(), batch.trees.end(),
              [](const DocumentTree& a, const DocumentTree& b) {
                  return a.document_id < b.document_id;
              });
    batch.digest = corpus_digest(std::move(hashes));
    return batch;
}

/// Read-modify-write of <out>/manifest.json; the first recorded corpus
/// digest and creation time stick for the life of the run directory.
inline void update_manifest(const CliOptions& opts, const std::string& digest,
                            const std::map<std::string, std::string>& new_outputs,
                            std::optional<int> fallback_count = std::nullopt) {
    const RunPaths paths{opts.out_dir};
    RunManifest m;
    if (fs::exists(paths.manifest())) {
        m = read_manifest(paths.manifest());
    } else {
        m.run_id = fs::path(opts.out_dir).filename().string();
        m.created_at = detail::iso_utc_now();
    }
    m.chunk_config = chunk_config_from(opts);
    m.provider_kind = opts.provider;
    m.k1 = opts.k1;
    m.b = opts.b;
    m.k = opts.k;
    m.jobs = opts.jobs;
    if (m.corpus_digest.empty()) m.corpus_digest = digest;
    for (const auto& [name, path] : new_outputs) m.outputs[name] = path;
    if (fallback_count) m.fallback_count = *fallback_count;
    write_manifest(paths.manifest(), m);
}

// --- tree ---

inline int cmd_tree(const std::string& layout_dir, const CliOptions& opts, std::ostream& out,
                    std::ostream& err) {
    const LayoutBatch batch = load_layout_dir(layout_dir);
    for (const std::string& e : batch.errors) err << "error: " << e << "\n";
    if (batch.layouts.empty() && batch.errors.empty()) {
        err << "error: no documents in '" << layout_dir << "'\n";
        return 1;
    }
    if (batch.layouts.empty()) return 1;

    DshpProvider provider(provider_config_from(opts));
    const RunPaths paths{opts.out_dir};
    fs::create_directories(paths.trees_dir());

    std::vector<std::string> doc_errors(batch.layouts.size());
    std::vector<std::vector<std::string>> doc_warnings(batch.layouts.size());
    std::atomic<int> fallbacks{0};
    std::atomic<std::size_t> succeeded{0};

    detail::parallel_for(batch.layouts.size(), opts.jobs, [&](std::size_t i) {
        const AnnotatedLayout& layout = batch.layouts[i];
        try {
            const HeaderList headers = extract_header_list(layout);
            HierarchyAssignment assignment;
            if (!headers.headers.empty()) {
                Resolution resolution =
                    provider.resolve(headers, layout.document_id, &doc_warnings[i]);
                if (resolution.used_fallback) fallbacks.fetch_add(1);
                assignment = std::move(resolution.assignment);
            }
            DocumentTree tree = attach_general_nodes(
                build_header_tree(layout.document_id, headers, assignment), layout);
            write_tree(tree_file_path(paths.trees_dir(), layout.document_id), tree);
            succeeded.fetch_add(1);
        } catch (const std::exception& e) {
            doc_errors[i] = "document '" + layout.document_id + "': " + e.what();
        }
    });

    std::size_t failed = batch.errors.size();
    for (std::size_t i = 0; i < batch.layouts.size(); ++i) {
        for (const std::string& w : doc_warnings[i]) err << "warning: " << w << "\n";
        if (!doc_errors[i].empty()) {
            err << "error: " << doc_errors[i] << "\n";
            ++failed;
        }
    }
    update_manifest(opts, batch.digest, {{"trees", paths.trees_dir().string()}},
                    fallbacks.load());
    out << "trees written: " << succeeded.load() << "  fallbacks: " << fallbacks.load() << "\n";
    return detail::status_code(succeeded.load(), failed);
}

// --- chunk ---

inline std::string format_stats_table(const std::string& method, const ChunkStats& stats) {
    std::ostringstream os;
    os << std::left << std::setw(16) << "method" << std::right << std::setw(10) << "avg_chars"
       << std::setw(12) << "avg_tokens" << std::setw(8) << "chunks" << "\n";
    os << std::left << std::setw(16) << method << std::right << std::setw(10) << std::fixed
       << std::setprecision(2) << stats.avg_chars << std::setw(12) << stats.avg_tokens
       << std::setw(8) << stats.chunk_count << "\n";
    return os.str();
}

inline int cmd_chunk(const std::string& input_dir, const CliOptions& opts, std::ostream& out,
                     std::ostream& err) {
    const ChunkConfig config = chunk_config_from(opts);
    const RunPaths paths{opts.out_dir};

    std::vector<Chunk> all_chunks;
    std::size_t processed = 0;
    std::size_t failed = 0;
    std::string digest;

    const auto chunk_documents = [&](auto& items, const auto& chunk_one) {
        std::vector<std::vector<Chunk>> per_doc(items.size());
        std::vector<std::string> doc_errors(items.size());
        std::vector<std::vector<std::string>> doc_warnings(items.size());
        detail::parallel_for(items.size(), opts.jobs, [&](std::size_t i) {
            try {
                per_doc[i] = chunk_one(items[i], &doc_warnings[i]);
            } catch (const std::exception& e) {
                doc_errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < items.size(); ++i) {
            for (const std::string& w : doc_warnings[i]) err << "warning: " << w << "\n";
            if (!doc_errors[i].empty()) {
                err << "error: " << doc_errors[i] << "\n";
                ++failed;
                continue;
            }
            ++processed;
            all_chunks.insert(all_chunks.end(), per_doc[i].begin(), per_doc[i].end());
        }
    };

    if (config.method == ChunkMethod::MultiDocFusion) {
        TreeBatch batch = load_tree_dir(input_dir);
        for (const std::string& e : batch.errors) err << "error: " << e << "\n";
        failed += batch.errors.size();
        digest = batch.digest;
        chunk_documents(batch.trees,
                        [&](const DocumentTree& tree, std::vector<std::string>* warnings) {
                            return dfs_chunk(tree, config, warnings);
                        });
    } else {
        LayoutBatch batch = load_layout_dir(input_dir);
        for (const std::string& e : batch.errors) err << "error: " << e << "\n";
        failed += batch.errors.size();
        digest = batch.digest;
        chunk_documents(batch.layouts,
                        [&](const AnnotatedLayout& layout, std::vector<std::string>*) {
                            return config.method == ChunkMethod::Length
                                       ? length_chunk(layout, config)
                                       : structure_chunk(layout, config);
                        });
    }

    if (processed == 0) {
        err << "error: no documents chunked from '" << input_dir << "'\n";
        return 1;
    }
    write_chunks(paths.chunks(), all_chunks);
    update_manifest(opts, digest, {{"chunks", paths.chunks().string()}});
    out << format_stats_table(opts.method, chunk_stats(all_chunks));
    return detail::status_code(processed, failed);
}

// --- index ---

inline int cmd_index(const std::string& chunks_path, const CliOptions& opts, std::ostream& out,
                     std::ostream& err) {
    try {
        const std::vector<Chunk> chunks = read_chunks(chunks_path);
        const Bm25Index index = build_bm25_index(chunks, opts.k1, opts.b);
        const RunPaths paths{opts.out_dir};
        write_index(paths.index(), index);
        update_manifest(opts, sha256_hex(read_text_file(chunks_path)),
                        {{"index", paths.index().string()}});
        out << "indexed chunks: " << index.n_docs() << "  terms: " << index.postings.size()
            << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- retrieve ---

inline int cmd_retrieve(const std::string& index_path, const std::string& qa_path,
                        const CliOptions& opts, std::ostream& out, std::ostream& err) {
    try {
        const Bm25Index index = read_index(index_path);
        const std::vector<QaRecord> qa = read_qa(qa_path);
        std::vector<RetrievalResult> results;
        results.reserve(qa.size());
        for (const QaRecord& record : qa) {
            results.push_back(query(index, record.question, opts.k, record.query_id));
        }
        const RunPaths paths{opts.out_dir};
        write_results(paths.results(), results);
        update_manifest(opts, sha256_hex(read_text_file(index_path)),
                        {{"results", paths.results().string()}});
        out << "queries answered: " << results.size() << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- eval ---

struct EvalArgs {
    std::string results_path;
    std::string qa_path;
    std::string chunks_path;
    std::string layouts_dir;      // needed when qa records carry evidence
    std::string gold_trees_dir;   // enables TEDS / hierarchy F1
    std::string pred_trees_dir;   // defaults to <out>/trees
    std::string predictions_path; // enables ANLS / ROUGE-L
};

inline json build_report(const CliOptions& opts, const RunManifest* manifest,
                         const RetrievalEval& retrieval,
                         const std::optional<std::pair<double, double>>& hierarchy,
                         int trees_scored, const std::optional<std::pair<double, double>>& answers,
                         int predictions_scored) {
    json report;
    json config;
    config["method"] = manifest ? std::string(to_string(manifest->chunk_config.method))
                                : opts.method;
    config["provider"] = manifest ? manifest->provider_kind : opts.provider;
    config["max_len"] = manifest ? manifest->chunk_config.max_len : opts.max_len;
    config["k1"] = manifest ? manifest->k1 : opts.k1;
    config["b"] = manifest ? manifest->b : opts.b;
    config["k"] = manifest ? manifest->k : opts.k;
    report["config"] = std::move(config);
    report["fallback_count"] = manifest ? manifest->fallback_count : 0;
    report["queries"] = json{{"scored", retrieval.scored}, {"skipped", retrieval.skipped}};

    json per_k = json::object();
    for (const auto& [k, p] : retrieval.precision) {
        per_k[std::to_string(k)] = json{{"precision", p},
                                        {"recall", retrieval.recall.at(k)},
                                        {"ndcg", retrieval.ndcg.at(k)}};
    }
    report["retrieval"] = json{{"per_k", std::move(per_k)},
                               {"average",
                                json{{"precision", retrieval.avg_precision},
                                     {"recall", retrieval.avg_recall},
                                     {"ndcg", retrieval.avg_ndcg}}}};
    if (hierarchy) {
        report["hierarchy"] = json{{"teds", hierarchy->first},
                                   {"hierarchy_f1", hierarchy->second},
                                   {"documents", trees_scored}};
    }
    if (answers) {
        report["answers"] = json{{"anls", answers->first},
                                 {"rouge_l", answers->second},
                                 {"predictions", predictions_scored}};
    }
    return report;
}

inline std::string format_report_table(const json& report) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << std::left << std::setw(6) << "k" << std::right << std::setw(10) << "precision"
       << std::setw(10) << "recall" << std::setw(10) << "ndcg" << "\n";
    const json& per_k = report.at("retrieval").at("per_k");
    for (const auto& [k, row] : per_k.items()) {
        os << std::left << std::setw(6) << k << std::right << std::setw(10)
           << row.at("precision").get<double>() << std::setw(10)
           << row.at("recall").get<double>() << std::setw(10) << row.at("ndcg").get<double>()
           << "\n";
    }
    const json& avg = report.at("retrieval").at("average");
    os << std::left << std::setw(6) << "avg" << std::right << std::setw(10)
       << avg.at("precision").get<double>() << std::setw(10) << avg.at("recall").get<double>()
       << std::setw(10) << avg.at("ndcg").get<double>() << "\n";
    const json& queries = report.at("queries");
    os << "queries scored: " << queries.at("scored").get<int>()
       << "  skipped: " << queries.at("skipped").get<int>() << "\n";
    if (report.contains("hierarchy")) {
        const json& h = report.at("hierarchy");
        os << "teds: " << h.at("teds").get<double>()
           << "  hierarchy_f1: " << h.at("hierarchy_f1").get<double>()
           << "  documents: " << h.at("documents").get<int>() << "\n";
    }
    if (report.contains("answers")) {
        const json& a = report.at("answers");
        os << "anls: " << a.at("anls").get<double>()
           << "  rouge_l: " << a.at("rouge_l").get<double>()
           << "  predictions: " << a.at("predictions").get<int>() << "\n";
    }
    return os.str();
}

inline int cmd_eval(const EvalArgs& args, const CliOptions& opts, std::ostream& out,
                    std::ostream& err) {
    const RunPaths paths{opts.out_dir};
    std::size_t failed = 0;
    try {
        const std::vector<RetrievalResult> result_list = read_results(args.results_path);
        std::map<std::string, RetrievalResult> results;
        for (const RetrievalResult& r : result_list) results[r.query_id] = r;
        const std::vector<QaRecord> qa = read_qa(args.qa_path);
        const std::vector<Chunk> chunks = read_chunks(args.chunks_path);

        LayoutIndex layout_index;
        if (!args.layouts_dir.empty()) {
            const LayoutBatch batch = load_layout_dir(args.layouts_dir);
            for (const std::string& e : batch.errors) err << "error: " << e << "\n";
            failed += batch.errors.size();
            layout_index = LayoutIndex::build(batch.layouts);
        } else {
            for (const QaRecord& record : qa) {
                if (!record.gold_evidence.empty()) {
                    err << "error: qa record '" << record.query_id
                        << "' carries evidence; pass --layouts to resolve it\n";
                    return 1;
                }
            }
        }

        const RetrievalEval retrieval = evaluate_retrieval(qa, results, chunks, layout_index);

        std::optional<std::pair<double, double>> hierarchy;
        int trees_scored = 0;
        if (!args.gold_trees_dir.empty()) {
            const fs::path pred_dir =
                args.pred_trees_dir.empty() ? paths.trees_dir() : fs::path(args.pred_trees_dir);
            double teds_sum = 0;
            double f1_sum = 0;
            for (const fs::path& gold_path : detail::json_files_sorted(args.gold_trees_dir)) {
                try {
                    const DocumentTree gold = read_tree(gold_path);
                    const fs::path pred_path = tree_file_path(pred_dir, gold.document_id);
                    if (!fs::exists(pred_path)) {
                        throw IoError("no predicted tree for document '" + gold.document_id +
                                      "' under '" + pred_dir.string() + "'");
                    }
                    const DocumentTree pred = read_tree(pred_path);
                    teds_sum += teds(pred, gold);
                    f1_sum += hierarchy_f1(assignment_from_tree(pred),
                                           assignment_from_tree(gold));
                    ++trees_scored;
                } catch (const std::exception& e) {
                    err << "error: " << e.what() << "\n";
                    ++failed;
                }
            }
            if (trees_scored > 0) {
                hierarchy = {{teds_sum / trees_scored, f1_sum / trees_scored}};
            }
        }

        std::optional<std::pair<double, double>> answers;
        int predictions_scored = 0;
        if (!args.predictions_path.empty()) {
            const std::map<std::string, std::string> predictions =
                read_predictions(args.predictions_path);
            double anls_sum = 0;
            double rouge_sum = 0;
            for (const QaRecord& record : qa) {
                const auto it = predictions.find(record.query_id);
                if (it == predictions.end()) continue;
                anls_sum += anls(it->second, record.gold_answers);
                double best_rouge = 0;
                for (const std::string& gold : record.gold_answers) {
                    best_rouge = std::max(best_rouge, rouge_l(it->second, gold));
                }
                rouge_sum += best_rouge;
                ++predictions_scored;
            }
            if (predictions_scored > 0) {
                answers = {{anls_sum / predictions_scored, rouge_sum / predictions_scored}};
            }
        }

        std::optional<RunManifest> manifest;
        if (fs::exists(paths.manifest())) manifest = read_manifest(paths.manifest());
        const json report =
            build_report(opts, manifest ? &*manifest : nullptr, retrieval, hierarchy,
                         trees_scored, answers, predictions_scored);
        write_report(paths.report(), report);
        update_manifest(opts, sha256_hex(read_text_file(args.results_path)),
                        {{"report", paths.report().string()}});
        out << format_report_table(report);
        return detail::status_code(1, failed);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- stats ---

inline int cmd_stats(const std::string& chunks_path, const CliOptions& opts, std::ostream& out,
                     std::ostream& err) {
    try {
        const std::vector<Chunk> chunks = read_chunks(chunks_path);
        std::string method = opts.method;
        const fs::path manifest = fs::path(chunks_path).parent_path() / "manifest.json";
        if (fs::exists(manifest)) {
            try {
                method = std::string(to_string(read_manifest(manifest).chunk_config.method));
            } catch (const std::exception&) {
                // the label falls back to the flag; the statistics stand alone
            }
        }
        out << format_stats_table(method, chunk_stats(chunks));
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- pipeline ---

inline int cmd_pipeline(const std::string& layout_dir, const std::string& qa_path,
                        const EvalArgs& extras, const CliOptions& opts, std::ostream& out,
                        std::ostream& err) {
    const RunPaths paths{opts.out_dir};
    const int tree_rc = cmd_tree(layout_dir, opts, out, err);
    if (tree_rc == 1) return 1;
    const std::string chunk_input =
        chunk_method_from_string(opts.method) == ChunkMethod::MultiDocFusion
            ? paths.trees_dir().string()
            : layout_dir;
    const int chunk_rc = cmd_chunk(chunk_input, opts, out, err);
    if (chunk_rc == 1) return 1;
    const int index_rc = cmd_index(paths.chunks().string(), opts, out, err);
    if (index_rc == 1) return 1;
    const int retrieve_rc = cmd_retrieve(paths.index().string(), qa_path, opts, out, err);
    if (retrieve_rc == 1) return 1;
    EvalArgs eval_args = extras;
    eval_args.results_path = paths.results().string();
    eval_args.qa_path = qa_path;
    eval_args.chunks_path = paths.chunks().string();
    if (eval_args.layouts_dir.empty()) eval_args.layouts_dir = layout_dir;
    const int eval_rc = cmd_eval(eval_args, opts, out, err);
    if (eval_rc == 1) return 1;
    return std::max({tree_rc, chunk_rc, index_rc, retrieve_rc, eval_rc});
}

}  // namespace mdf
