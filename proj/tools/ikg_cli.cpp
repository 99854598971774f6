// Command-line front end: schema init, enrollment, benchmark, export, and
// fixture recording. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ikg/ikg.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ikg::ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<uint8_t> read_bytes(const std::string& path) {
    std::string s = read_file(path);
    return {s.begin(), s.end()};
}

void write_file(const std::string& path, const std::string& content) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ikg::ConfigError("cannot write file: " + path);
    f << content;
}

struct BackendFlags {
    std::string fixtures_dir;
    std::string vlm_endpoint;  // host:port
    std::string llm_endpoint;
    std::string vlm_model = "vlm";
    std::string llm_model = "llm";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--fixtures", fixtures_dir, "Replay fixtures directory (offline mode)");
        cmd->add_option("--vlm-endpoint", vlm_endpoint, "VLM server host:port");
        cmd->add_option("--llm-endpoint", llm_endpoint, "LLM server host:port");
        cmd->add_option("--vlm-model", vlm_model, "VLM model identifier");
        cmd->add_option("--llm-model", llm_model, "LLM model identifier");
    }

    std::shared_ptr<ikg::ModelBackend> make(const std::string& endpoint, const std::string& model,
                                            std::shared_ptr<ikg::FixtureStore>& store) const {
        if (!fixtures_dir.empty() && !endpoint.empty()) {
            throw ikg::ConfigError("give either --fixtures or an endpoint per backend, not both");
        }
        if (!fixtures_dir.empty()) {
            if (!store) store = std::make_shared<ikg::FixtureStore>(fs::path(fixtures_dir));
            return std::make_shared<ikg::ReplayBackend>(store, model);
        }
        if (endpoint.empty()) {
            throw ikg::ConfigError("backend needs --fixtures or an endpoint");
        }
        auto colon = endpoint.rfind(':');
        if (colon == std::string::npos) throw ikg::ConfigError("endpoint must be host:port");
        ikg::HttpBackend::Config cfg;
        cfg.host = endpoint.substr(0, colon);
        cfg.port = std::stoi(endpoint.substr(colon + 1));
        cfg.model = model;
        return std::make_shared<ikg::HttpBackend>(cfg);
    }

    ikg::Backends make_backends() const {
        std::shared_ptr<ikg::FixtureStore> store;
        ikg::Backends b;
        b.vlm = make(vlm_endpoint, vlm_model, store);
        b.llm = make(llm_endpoint, llm_model, store);
        return b;
    }
};

void log_event(const nlohmann::ordered_json& j) { std::cerr << j.dump() << "\n"; }

int cmd_schema_init(const std::string& out_path, bool use_default, bool use_auto,
                    const std::string& manual_file, const BackendFlags& backends) {
    ikg::PropertySchema schema;
    if (use_default) {
        schema = ikg::default_schema();
    } else if (use_auto || !manual_file.empty()) {
        std::shared_ptr<ikg::FixtureStore> store;
        auto llm = backends.make(backends.llm_endpoint, backends.llm_model, store);
        if (use_auto) {
            schema = ikg::induce_schema(ikg::IdentifyMode::Auto, {}, *llm);
        } else {
            std::vector<std::string> names;
            for (const auto& line : ikg::util::split(read_file(manual_file), '\n')) {
                auto t = ikg::util::trim(line);
                if (!t.empty()) names.push_back(t);
            }
            schema = ikg::induce_schema(ikg::IdentifyMode::Manual, names, *llm);
        }
    } else {
        throw CLI::ValidationError("schema init", "one of --default, --auto, --manual required");
    }
    write_file(out_path, ikg::serialize_schema(schema));
    log_event({{"event", "schema_written"}, {"path", out_path}});
    return 0;
}

int cmd_enroll(const std::string& schema_path, const std::string& inventory_path,
               const std::string& records_dir, const std::string& mode_name, int jobs,
               std::vector<std::string> images, const std::string& manifest,
               const BackendFlags& backends) {
    auto mode = ikg::enroll_mode_from_string(mode_name);
    if (!mode) throw ikg::ConfigError("unknown mode: " + mode_name);
    if (!manifest.empty()) {
        for (const auto& line : ikg::util::split(read_file(manifest), '\n')) {
            auto t = ikg::util::trim(line);
            if (!t.empty()) images.push_back(ikg::util::split(t, '\t')[0]);
        }
    }
    if (images.empty()) throw ikg::ConfigError("no images given");

    ikg::PropertySchema schema = ikg::parse_schema(read_file(schema_path));
    ikg::EnrollmentConfig config;
    config.mode = *mode;
    ikg::Pipeline pipeline(schema, backends.make_backends(), config);

    ikg::InventoryGraph inventory;
    if (fs::exists(inventory_path)) inventory = ikg::load_graph(read_file(inventory_path));

    std::mutex merge_mutex;
    std::atomic<size_t> next{0};
    std::vector<std::string> failures(images.size());
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < images.size(); i = next.fetch_add(1)) {
            const auto& path = images[i];
            try {
                auto bytes = read_bytes(path);
                auto [rec, sub] = pipeline.run_cycle(bytes, path);
                {
                    std::lock_guard lock(merge_mutex);
                    ikg::merge_subgraph(inventory, sub);
                    if (!records_dir.empty()) {
                        write_file((fs::path(records_dir) /
                                    (fs::path(path).stem().string() + ".json")).string(),
                                   rec.to_json().dump(2) + "\n");
                    }
                }
                nlohmann::ordered_json ev{{"event", "enrolled"}, {"image", path}};
                std::map<std::string, double> stage_seconds;
                for (const auto& t : rec.transcripts) stage_seconds[t.stage] += t.seconds;
                ev["stage_seconds"] = stage_seconds;
                log_event(ev);
            } catch (const std::exception& e) {
                failures[i] = e.what();
                log_event({{"event", "enroll_failed"}, {"image", path}, {"error", e.what()}});
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    write_file(inventory_path, ikg::save_graph(inventory));
    int failed = 0;
    for (size_t i = 0; i < images.size(); ++i) {
        if (!failures[i].empty()) {
            ++failed;
            std::cerr << "FAILED " << images[i] << ": " << failures[i] << "\n";
        }
    }
    std::cout << (images.size() - failed) << "/" << images.size() << " images enrolled, inventory "
              << inventory.node_count() << " nodes / " << inventory.edge_count() << " edges\n";
    return failed == 0 ? 0 : 1;
}

int cmd_benchmark(const std::string& schema_path, const std::string& annotations_path,
                  const std::vector<std::string>& mode_names, const std::string& out_json,
                  const std::string& out_text, const BackendFlags& backends) {
    ikg::PropertySchema schema = ikg::parse_schema(read_file(schema_path));
    std::vector<ikg::EnrollmentConfig> modes;
    for (const auto& name : mode_names) {
        auto mode = ikg::enroll_mode_from_string(name);
        if (!mode) throw ikg::ConfigError("unknown mode: " + name);
        ikg::EnrollmentConfig c;
        c.mode = *mode;
        modes.push_back(c);
    }
    auto dataset = ikg::load_annotations(annotations_path, schema);
    auto table = ikg::run_benchmark(dataset, modes, schema, backends.make_backends());
    if (!out_json.empty()) write_file(out_json, table.to_json().dump(2) + "\n");
    if (!out_text.empty()) write_file(out_text, table.render_text());
    std::cout << table.render_text();
    return 0;
}

int cmd_export(const std::string& inventory_path, const std::string& format,
               const std::string& out_path) {
    ikg::InventoryGraph g = ikg::load_graph(read_file(inventory_path));
    ikg::ExportFormat fmt;
    if (format == "graphml") fmt = ikg::ExportFormat::PropertyGraphXml;
    else if (format == "statements") fmt = ikg::ExportFormat::GraphStatements;
    else throw ikg::ConfigError("unknown export format: " + format);
    std::string text = ikg::export_graph(g, fmt);
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
    return 0;
}

int cmd_record_fixture(const std::string& fixtures_dir, const std::string& model,
                       const std::string& file) {
    nlohmann::json j = nlohmann::json::parse(read_file(file));
    ikg::ChatExchange ex;
    for (const auto& t : j.at("turns")) {
        std::string role = t.at("role").get<std::string>();
        if (role == "system") ex.system(t.at("content").get<std::string>());
        else if (role == "user") ex.user(t.at("content").get<std::string>());
        else ex.assistant(t.at("content").get<std::string>());
    }
    if (j.contains("options")) {
        const auto& o = j["options"];
        ex.options.temperature = o.value("temperature", 0.0);
        ex.options.n_samples = o.value("n_samples", 1);
        if (o.contains("top_k")) ex.options.top_k = o["top_k"].get<int>();
    }
    ikg::FixtureStore store{fs::path(fixtures_dir)};
    auto key = ikg::record_fixture(store, model, ex,
                                   j.at("replies").get<std::vector<std::string>>());
    std::cout << key << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Product knowledge-graph construction from images"};
    app.require_subcommand(1);

    // schema init
    auto* schema_cmd = app.add_subcommand("schema", "Schema operations")->require_subcommand(1);
    auto* init = schema_cmd->add_subcommand("init", "Create a schema file");
    std::string schema_out = "schema.json", manual_file;
    bool use_default = false, use_auto = false;
    init->add_option("--out", schema_out, "Output schema path");
    init->add_flag("--default", use_default, "Write the built-in default schema");
    init->add_flag("--auto", use_auto, "Induce the schema with the LLM backend");
    init->add_option("--manual", manual_file, "Type a property list from this file");
    BackendFlags init_backends;
    init_backends.add_to(init);

    // enroll
    auto* enroll = app.add_subcommand("enroll", "Enroll product images into an inventory");
    std::string enroll_schema, inventory_path = "inventory.json", records_dir, manifest;
    std::string mode_name = "full";
    int jobs = 1;
    std::vector<std::string> images;
    enroll->add_option("--schema", enroll_schema, "Schema file")->required();
    enroll->add_option("--inventory", inventory_path, "Inventory graph file (created if missing)");
    enroll->add_option("--records-dir", records_dir, "Directory for enrollment records");
    enroll->add_option("--mode", mode_name, "full | no-reasoning | no-multi-turn");
    enroll->add_option("--jobs", jobs, "Concurrent enrollments")->check(CLI::PositiveNumber);
    enroll->add_option("--manifest", manifest, "File listing one image path per line");
    enroll->add_option("images", images, "Image files");
    BackendFlags enroll_backends;
    enroll_backends.add_to(enroll);

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "Score modes against annotations");
    std::string bench_schema, annotations, out_json, out_text;
    std::vector<std::string> bench_modes = {"baseline", "baseline-schema", "no-reasoning",
                                            "no-multi-turn", "ours"};
    bench->add_option("--schema", bench_schema, "Schema file")->required();
    bench->add_option("--annotations", annotations, "Annotation file (one JSON per line)")
        ->required();
    bench->add_option("--modes", bench_modes, "Mode rows to evaluate");
    bench->add_option("--out-json", out_json, "Structured table output path");
    bench->add_option("--out-text", out_text, "Plain-text table output path");
    BackendFlags bench_backends;
    bench_backends.add_to(bench);

    // export
    auto* exp = app.add_subcommand("export", "Export the inventory graph");
    std::string exp_inventory, exp_format = "graphml", exp_out;
    exp->add_option("--inventory", exp_inventory, "Inventory graph file")->required();
    exp->add_option("--format", exp_format, "graphml | statements");
    exp->add_option("--out", exp_out, "Output path (stdout if omitted)");

    // record-fixture
    auto* recf = app.add_subcommand("record-fixture", "Store replies for an exchange");
    std::string recf_dir, recf_model, recf_file;
    recf->add_option("--fixtures", recf_dir, "Fixtures directory")->required();
    recf->add_option("--model", recf_model, "Model identifier")->required();
    recf->add_option("--file", recf_file, "JSON file with turns/options/replies")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (init->parsed()) {
            return cmd_schema_init(schema_out, use_default, use_auto, manual_file, init_backends);
        }
        if (enroll->parsed()) {
            return cmd_enroll(enroll_schema, inventory_path, records_dir, mode_name, jobs, images,
                              manifest, enroll_backends);
        }
        if (bench->parsed()) {
            return cmd_benchmark(bench_schema, annotations, bench_modes, out_json, out_text,
                                 bench_backends);
        }
        if (exp->parsed()) return cmd_export(exp_inventory, exp_format, exp_out);
        if (recf->parsed()) return cmd_record_fixture(recf_dir, recf_model, recf_file);
    } catch (const ikg::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
