#include <iostream>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "mdf/cli.hpp"

namespace {

struct Args {
    mdf::CliOptions opts;
    std::string config_path;
    std::string input_a;
    std::string input_b;
    std::string input_c;
    mdf::EvalArgs eval;
};

void add_common_flags(CLI::App& cmd, Args& args, std::map<std::string, CLI::Option*>& tracked) {
    tracked["method"] = cmd.add_option("--method", args.opts.method, "Chunking method")
                            ->check(CLI::IsMember({"multidocfusion", "length", "structure"}));
    tracked["max_len"] = cmd.add_option("--max-len", args.opts.max_len, "Chunk token budget");
    tracked["token_counter"] =
        cmd.add_option("--token-counter", args.opts.token_counter, "Registered token counter");
    tracked["provider"] = cmd.add_option("--provider", args.opts.provider, "Hierarchy provider")
                              ->check(CLI::IsMember({"heuristic", "file", "llm"}));
    tracked["provider_file"] =
        cmd.add_option("--provider-file", args.opts.provider_file, "Assignment map (file provider)");
    tracked["endpoint_url"] =
        cmd.add_option("--endpoint-url", args.opts.endpoint_url, "Chat completion endpoint");
    tracked["model_name"] = cmd.add_option("--model", args.opts.model_name, "Endpoint model name");
    tracked["api_key_env_var"] = cmd.add_option("--api-key-env", args.opts.api_key_env_var,
                                                "Env var holding the bearer token");
    tracked["timeout_seconds"] =
        cmd.add_option("--timeout", args.opts.timeout_seconds, "Endpoint timeout, seconds");
    tracked["max_retries"] = cmd.add_option("--retries", args.opts.max_retries, "Endpoint retries");
    tracked["max_concurrent_requests"] = cmd.add_option(
        "--max-concurrent", args.opts.max_concurrent_requests, "In-flight endpoint requests");
    tracked["k"] = cmd.add_option("--k", args.opts.k, "Top-k retrieval cutoff");
    tracked["k1"] = cmd.add_option("--k1", args.opts.k1, "BM25 k1");
    tracked["b"] = cmd.add_option("--b", args.opts.b, "BM25 b");
    tracked["jobs"] = cmd.add_option("--jobs", args.opts.jobs, "Parallel documents");
    tracked["out"] = cmd.add_option("--out", args.opts.out_dir, "Run output directory");
    cmd.add_option("--config", args.config_path, "JSON config file (flags win)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchy-aware document chunking and retrieval toolkit"};
    app.require_subcommand(1);

    Args args;
    std::map<const CLI::App*, std::map<std::string, CLI::Option*>> tracked;

    CLI::App* tree = app.add_subcommand("tree", "Build document trees from layouts");
    tree->add_option("layout-dir", args.input_a, "Directory of layout JSON files")->required();

    CLI::App* chunk = app.add_subcommand("chunk", "Chunk trees or layouts");
    chunk->add_option("input-dir", args.input_a,
                      "Trees dir (multidocfusion) or layouts dir (baselines)")
        ->required();

    CLI::App* index = app.add_subcommand("index", "Build the BM25 index");
    index->add_option("chunks", args.input_a, "chunks.jsonl path")->required();

    CLI::App* retrieve = app.add_subcommand("retrieve", "Run queries against an index");
    retrieve->add_option("index", args.input_a, "index.bin path")->required();
    retrieve->add_option("qa", args.input_b, "qa.jsonl path")->required();

    CLI::App* eval = app.add_subcommand("eval", "Score retrieval results");
    eval->add_option("results", args.eval.results_path, "results.jsonl path")->required();
    eval->add_option("qa", args.eval.qa_path, "qa.jsonl path")->required();
    eval->add_option("chunks", args.eval.chunks_path, "chunks.jsonl path")->required();
    eval->add_option("--layouts", args.eval.layouts_dir, "Layout dir (resolves evidence)");
    eval->add_option("--gold-trees", args.eval.gold_trees_dir, "Gold tree dir (enables TEDS/F1)");
    eval->add_option("--pred-trees", args.eval.pred_trees_dir,
                     "Predicted tree dir (default <out>/trees)");
    eval->add_option("--predictions", args.eval.predictions_path,
                     "Predictions jsonl (enables ANLS/ROUGE-L)");

    CLI::App* pipeline = app.add_subcommand("pipeline", "tree + chunk + index + retrieve + eval");
    pipeline->add_option("layout-dir", args.input_a, "Directory of layout JSON files")->required();
    pipeline->add_option("qa", args.input_b, "qa.jsonl path")->required();
    pipeline->add_option("--gold-trees", args.eval.gold_trees_dir,
                         "Gold tree dir (enables TEDS/F1)");
    pipeline->add_option("--predictions", args.eval.predictions_path,
                         "Predictions jsonl (enables ANLS/ROUGE-L)");

    CLI::App* stats = app.add_subcommand("stats", "Report chunk statistics");
    stats->add_option("chunks", args.input_a, "chunks.jsonl path")->required();

    for (CLI::App* cmd : {tree, chunk, index, retrieve, eval, pipeline, stats}) {
        add_common_flags(*cmd, args, tracked[cmd]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    const CLI::App* active = nullptr;
    for (const CLI::App* cmd : {tree, chunk, index, retrieve, eval, pipeline, stats}) {
        if (cmd->parsed()) active = cmd;
    }

    try {
        if (!args.config_path.empty() && active) {
            std::set<std::string> explicit_flags;
            for (const auto& [key, opt] : tracked[active]) {
                if (opt->count() > 0) explicit_flags.insert(key);
            }
            const mdf::json config = mdf::json::parse(mdf::read_text_file(args.config_path));
            mdf::apply_config_file(args.opts, config, explicit_flags);
        }

        if (tree->parsed()) return mdf::cmd_tree(args.input_a, args.opts, std::cout, std::cerr);
        if (chunk->parsed()) return mdf::cmd_chunk(args.input_a, args.opts, std::cout, std::cerr);
        if (index->parsed()) return mdf::cmd_index(args.input_a, args.opts, std::cout, std::cerr);
        if (retrieve->parsed()) {
            return mdf::cmd_retrieve(args.input_a, args.input_b, args.opts, std::cout, std::cerr);
        }
        if (eval->parsed()) return mdf::cmd_eval(args.eval, args.opts, std::cout, std::cerr);
        if (pipeline->parsed()) {
            return mdf::cmd_pipeline(args.input_a, args.input_b, args.eval, args.opts, std::cout,
                                     std::cerr);
        }
        if (stats->parsed()) return mdf::cmd_stats(args.input_a, args.opts, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
