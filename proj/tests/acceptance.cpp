// Acceptance gate: one self-contained check per release criterion, one
// PASS/FAIL line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

#include "ikg/ikg.hpp"
#include "support/oracle_backend.hpp"
#include "support/pattern_gen.hpp"
#include "support/test_util.hpp"

using namespace ikg;

namespace {

int failures = 0;

void criterion(const std::string& name, const std::function<void()>& body) {
    try {
        body();
        std::cout << "PASS: " << name << "\n";
    } catch (const std::exception& e) {
        ++failures;
        std::cout << "FAIL: " << name << " (" << e.what() << ")\n";
    }
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(what);
}

template <typename T>
void require_eq(const T& got, const T& want, const std::string& what) {
    if (!(got == want)) {
        std::ostringstream ss;
        ss << what << ": got " << got << ", want " << want;
        throw std::runtime_error(ss.str());
    }
}

double close(double a, double b) { return std::abs(a - b) <= 1e-12; }

// ---- criterion bodies -------------------------------------------------------

void metric_oracle() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> gt_dist(0.1, 20.0);
    std::uniform_real_distribution<double> factor(0.5, 1.5);
    const std::vector<std::string> labels = {"Electronics", "Fashion", "Pet Products", "Others"};

    for (int c = 0; c < 200; ++c) {
        size_t n = 1 + rng() % 12;
        double threshold = (c % 2) ? 0.05 : 0.01;
        std::vector<EvalPair> numeric, categorical;
        for (size_t i = 0; i < n; ++i) {
            double gt = gt_dist(rng);
            TypedValue pred;
            switch (rng() % 4) {
                case 0: pred = TypedValue::absent(); break;
                case 1: pred = TypedValue::of_real(gt * (1.0 + threshold)); break;  // boundary
                case 2: pred = TypedValue::of_real(gt); break;
                default: pred = TypedValue::of_real(gt * factor(rng)); break;
            }
            numeric.push_back({"Weight", pred, TypedValue::of_real(gt)});
            TypedValue lp = (rng() % 5 == 0)
                                ? TypedValue::absent()
                                : TypedValue::of_text(labels[rng() % labels.size()]);
            categorical.push_back({"Category", lp, TypedValue::of_text(labels[rng() % labels.size()])});
        }
        // independent recount
        size_t num_correct = 0, cat_correct = 0;
        for (const auto& p : numeric) {
            if (p.predicted.is_numeric() &&
                std::abs(p.predicted.as_real() - p.ground_truth.as_real()) /
                        p.ground_truth.as_real() < threshold) {
                ++num_correct;
            }
        }
        for (const auto& p : categorical) {
            if (!p.predicted.is_absent() &&
                util::iequals(p.predicted.text, p.ground_truth.text)) {
                ++cat_correct;
            }
        }
        require_eq(accuracy_at(threshold, numeric),
                   round_percent(100.0 * static_cast<double>(num_correct) / numeric.size()),
                   "accuracy_at recount");
        require_eq(categorical_accuracy(categorical),
                   round_percent(100.0 * static_cast<double>(cat_correct) / categorical.size()),
                   "categorical_accuracy recount");
    }
    // explicit strict-boundary case: error exactly at the threshold is incorrect
    std::vector<EvalPair> boundary = {
        {"Weight", TypedValue::of_real(105.0), TypedValue::of_real(100.0)}};
    require_eq(accuracy_at(0.05, boundary), 0.0, "boundary e == threshold");
}

void error_ratio_units() {
    require(close(error_ratio(1.05, 1.0), 0.05), "error_ratio(1.05, 1.0) != 0.05");
    require_eq(error_ratio(1.0, 1.0), 0.0, "error_ratio(1.0, 1.0)");
    require_eq(error_ratio(0.0, 2.0), 1.0, "error_ratio(0.0, 2.0)");
    require(std::isinf(error_ratio(TypedValue::absent(), 1.0)), "absent must score infinite");
}

void constraint_soundness() {
    PropertySchema schema = default_schema();
    auto constraint = compile_constraint(schema);
    std::regex re(constraint.rendered_pattern);
    test::PatternGen gen(schema, 424242);
    for (int i = 0; i < 1000; ++i) {
        std::string s = gen.generate();
        require(std::regex_match(s, re), "generated string rejected by the pattern: " + s);
        validate_output(s, schema);  // throws on failure

        auto m = gen.mutate(s);
        bool rejected = false;
        try {
            validate_output(m.text, schema);
        } catch (const ValidationError& e) {
            rejected = true;
            require(e.kind() == m.expected && e.field() == m.field,
                    "wrong error variant for mutation of field " + m.field);
        }
        require(rejected, "mutation accepted: " + m.text);
    }
}

void default_schema_fidelity() {
    PropertySchema s = default_schema();
    validate_schema(s);
    require_eq(s.root_property.name, std::string("Product Name"), "root property");
    require_eq(s.properties.size(), size_t{7}, "non-root property count");
    auto choices_count = [&](const char* name) {
        return s.find(name)->data_type.choices.size();
    };
    require_eq(choices_count("Category"), size_t{16}, "Category choices");
    require_eq(choices_count("Primary Package Color"), size_t{21}, "Color choices");
    require_eq(choices_count("Package Material"), size_t{13}, "Material choices");
    require_eq(choices_count("Package Shape"), size_t{11}, "Shape choices");
    require_eq(*s.find("Price")->unit, std::string("USD"), "Price unit");
    require_eq(*s.find("Weight")->unit, std::string("kg"), "Weight unit");
    require(s.anchor() && s.anchor()->name == "Category", "Category must be the anchor");
    for (const char* name : {"Category", "Primary Package Color", "Package Material",
                             "Package Shape"}) {
        require(s.find(name)->data_type.choices.back() == "Others",
                std::string(name) + " must end with Others");
    }
}

ProductSubgraph random_subgraph(std::mt19937_64& rng, size_t index) {
    auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
    static const std::vector<std::string> categories = {"Food and Beverages", "Electronics",
                                                        "Pet Products", "Fashion"};
    static const std::vector<std::string> mids = {"Chocolate", "Candy", "Cables", "Dog Toys",
                                                  "Snacks", "Shoes"};
    static const std::vector<std::string> colors = {"Red", "Blue", "Brown", "Green", "White"};
    ProductSubgraph sub;
    sub.root = NodeKey::make("Product " + std::to_string(index), NodeKind::Product);
    std::string category = pick(categories);
    sub.property_edges.push_back(
        {sub.root, NodeKey::make(category, NodeKind::PropertyValue), "Category", {}, {}});
    sub.property_edges.push_back({sub.root, NodeKey::make(pick(colors), NodeKind::PropertyValue),
                                  "Primary Package Color", {}, {}});
    std::vector<NodeKey> chain = {sub.root, NodeKey::make(pick(mids), NodeKind::CategoryNode),
                                  NodeKey::make(category, NodeKind::PropertyValue)};
    sub.hierarchy_chains.push_back(chain);
    return sub;
}

void merge_properties() {
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        std::mt19937_64 rng(seed);
        std::vector<ProductSubgraph> subs;
        for (size_t i = 0; i < 50; ++i) subs.push_back(random_subgraph(rng, i));

        InventoryGraph once;
        for (const auto& s : subs) merge_subgraph(once, s);

        InventoryGraph twice;
        for (const auto& s : subs) merge_subgraph(twice, s);
        for (const auto& s : subs) merge_subgraph(twice, s);
        require(graph_equal(once, twice), "idempotence violated");

        auto shuffled = subs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        InventoryGraph permuted;
        for (const auto& s : shuffled) merge_subgraph(permuted, s);
        require(graph_equal(once, permuted), "permutation insensitivity violated");

        std::set<std::pair<int, std::string>> seen;
        for (const auto& [id, rec] : once.nodes()) {
            require(seen.insert({static_cast<int>(rec.kind), rec.normalized}).second,
                    "duplicate (normalized, kind) pair: " + rec.normalized);
        }
    }
}

Backends chocolate_backends() {
    auto oracle =
        std::make_shared<test::OracleBackend>("oracle-model", test::chocolate_products());
    return {oracle, oracle};
}

void hierarchy_example() {
    Pipeline pipeline(default_schema(), chocolate_backends());
    auto chains = pipeline.expand_hierarchy("Dark Chocolate Bar", "Food and Beverages");
    std::vector<std::vector<std::string>> want = {
        {"Dark Chocolate Bar", "Dark Chocolate", "Chocolate", "Food and Beverages"}};
    require(chains == want, "expansion chain mismatch");
}

std::shared_ptr<FixtureStore> record_chocolate_fixtures() {
    auto store = std::make_shared<FixtureStore>();
    auto oracle =
        std::make_shared<test::OracleBackend>("oracle-model", test::chocolate_products());
    auto recording = std::make_shared<RecordingBackend>(oracle, store);
    Pipeline pipeline(default_schema(), {recording, recording});
    InventoryGraph scratch;
    for (size_t i = 0; i < 3; ++i) pipeline.enroll(test::make_product_image(i), scratch);
    return store;
}

void end_to_end_replay() {
    auto store = record_chocolate_fixtures();
    auto enroll_all = [&](InventoryGraph& g) {
        auto replay = std::make_shared<ReplayBackend>(store, "oracle-model");
        Pipeline pipeline(default_schema(), {replay, replay});
        for (size_t i = 0; i < 3; ++i) pipeline.enroll(test::make_product_image(i), g);
    };
    InventoryGraph run1, run2;
    enroll_all(run1);
    enroll_all(run2);

    // pre-computed: 3 products + 17 property values + 5 category nodes,
    // 21 property edges + 8 distinct is_a edges
    require_eq(run1.products().size(), size_t{3}, "product count");
    require_eq(run1.node_count(), size_t{25}, "node count");
    require_eq(run1.edge_count(), size_t{29}, "edge count");
    require(save_graph(run1) == save_graph(run2), "two replay runs differ byte-wise");

    std::string before = save_graph(run1);
    enroll_all(run1);  // re-enrollment must add nothing
    require_eq(run1.node_count(), size_t{25}, "node count after re-enrollment");
    require_eq(run1.edge_count(), size_t{29}, "edge count after re-enrollment");
    require(save_graph(run1) == before, "re-enrollment changed the document");
}

void scaling() {
    const size_t n = 1000;
    auto products = test::perfect_products(n);
    auto store = std::make_shared<FixtureStore>();
    {
        auto oracle = std::make_shared<test::OracleBackend>("oracle-model", products);
        auto recording = std::make_shared<RecordingBackend>(oracle, store);
        Pipeline pipeline(default_schema(), {recording, recording});
        InventoryGraph scratch;
        for (size_t i = 0; i < n; ++i) pipeline.enroll(test::make_product_image(i), scratch);
    }

    auto replay = std::make_shared<ReplayBackend>(store, "oracle-model");
    Pipeline pipeline(default_schema(), {replay, replay});
    InventoryGraph inventory;
    // warm-up outside the timed window (regex/allocator caches)
    {
        InventoryGraph throwaway;
        pipeline.enroll(test::make_product_image(0), throwaway);
    }
    std::vector<double> seconds(n);
    for (size_t i = 0; i < n; ++i) {
        auto bytes = test::make_product_image(i);
        auto t0 = std::chrono::steady_clock::now();
        pipeline.enroll(bytes, inventory);
        auto t1 = std::chrono::steady_clock::now();
        seconds[i] = std::chrono::duration<double>(t1 - t0).count();
    }
    auto mean = [&](size_t from, size_t to) {
        double s = 0;
        for (size_t i = from; i < to; ++i) s += seconds[i];
        return s / static_cast<double>(to - from);
    };
    double early = mean(0, 10), late = mean(n - 10, n);
    std::ostringstream detail;
    detail << "mean(1-10) = " << early * 1e3 << " ms, mean(991-1000) = " << late * 1e3 << " ms";
    require(late <= 2.0 * early, "late enrollments slower than 2x early: " + detail.str());

    // identical subgraphs cost identical graph operations at any inventory
    // size; the fresh product's neighbors already exist in both inventories,
    // so even the hit/insert breakdown must match
    InventoryGraph small;
    for (size_t i = 0; i < 10; ++i) pipeline.enroll(test::make_product_image(i), small);
    ProductSubgraph fresh;
    fresh.root = NodeKey::make("Fresh Product", NodeKind::Product);
    fresh.property_edges.push_back(
        {fresh.root, NodeKey::make("Electronics", NodeKind::PropertyValue), "Category", {}, {}});
    fresh.property_edges.push_back({fresh.root,
                                    NodeKey::make("White", NodeKind::PropertyValue),
                                    "Primary Package Color", {}, {}});
    fresh.hierarchy_chains.push_back({fresh.root,
                                      NodeKey::make("Group 0", NodeKind::CategoryNode),
                                      NodeKey::make("Electronics", NodeKind::PropertyValue)});
    small.reset_counters();
    inventory.reset_counters();
    merge_subgraph(small, fresh);
    auto ops_small = small.counters();
    merge_subgraph(inventory, fresh);
    require(ops_small == inventory.counters(),
            "graph operation counts differ between small and large inventories");
}

void benchmark_harness() {
    test::TmpDir tmp;
    auto products = test::perfect_products(5);
    std::vector<AnnotationRecord> dataset;
    for (size_t i = 0; i < products.size(); ++i) {
        std::string path = tmp.file("p" + std::to_string(i) + ".ppm");
        test::write_bytes(path, test::make_product_image(i));
        const auto& p = products[i];
        dataset.push_back({path, p.category, p.color, p.material, p.shape, p.weight_kg});
    }
    std::vector<EnrollmentConfig> modes;
    for (EnrollMode m : {EnrollMode::BaselineZeroShot, EnrollMode::BaselineSchema,
                         EnrollMode::NoReasoning, EnrollMode::NoMultiTurn, EnrollMode::Full}) {
        EnrollmentConfig c;
        c.mode = m;
        modes.push_back(c);
    }
    auto replay_table = [&](test::OracleOptions options) {
        auto store = std::make_shared<FixtureStore>();
        {
            Backends rec{std::make_shared<RecordingBackend>(
                             std::make_shared<test::OracleBackend>("oracle-model", products,
                                                                   options),
                             store),
                         nullptr};
            rec.llm = rec.vlm;
            run_benchmark(dataset, modes, default_schema(), rec);
        }
        auto replay = std::make_shared<ReplayBackend>(store, "oracle-model");
        return run_benchmark(dataset, modes, default_schema(), {replay, replay});
    };

    auto perfect = replay_table({});
    for (size_t r = 0; r < perfect.rows.size(); ++r) {
        for (size_t c = 0; c < perfect.columns.size(); ++c) {
            const auto& cell = perfect.cells[r][c];
            if (cell.percent != 100.0 || cell.correct != cell.denominator) {
                throw std::runtime_error("perfect oracle cell not 100.00: row " + perfect.rows[r] +
                                         ", column " + perfect.columns[c]);
            }
        }
    }

    test::OracleOptions planted;
    planted.planted_category_errors = {2};  // 4 of 5 products stay correct
    auto table = replay_table(planted);
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cat = table.cells[r][3];
        bool enrollment_row = table.rows[r].rfind("ours", 0) == 0;
        double want = enrollment_row ? 80.0 : 100.0;  // the error is planted in the
                                                      // constrained output only
        if (cat.percent != want) {
            throw std::runtime_error("planted-error Category cell for " + table.rows[r] +
                                     ": got " + std::to_string(cat.percent));
        }
        if (enrollment_row && !(cat.correct == 4 && cat.incorrect == 1 && cat.absent == 0)) {
            throw std::runtime_error("planted-error tallies wrong for " + table.rows[r]);
        }
    }
}

void persistence() {
    auto store = record_chocolate_fixtures();
    auto replay = std::make_shared<ReplayBackend>(store, "oracle-model");
    Pipeline pipeline(default_schema(), {replay, replay});
    InventoryGraph g;
    for (size_t i = 0; i < 3; ++i) pipeline.enroll(test::make_product_image(i), g);

    std::string doc = save_graph(g);
    InventoryGraph loaded = load_graph(doc);
    require(graph_equal(g, loaded), "load(save(G)) != G");
    require(save_graph(loaded) == doc, "save(load(save(G))) not byte-identical");
    require(export_graphml(g) == export_graphml(loaded), "GraphML double-export differs");
    require(export_statements(g) == export_statements(loaded), "statement double-export differs");
}

}  // namespace

int main() {
    criterion("metric oracle agrees with brute-force recounts (200 cases)", metric_oracle);
    criterion("relative-error unit values", error_ratio_units);
    criterion("constraint soundness and rejection (1000 + 1000 samples)", constraint_soundness);
    criterion("default schema fidelity", default_schema_fidelity);
    criterion("merge idempotence, permutation insensitivity, index soundness", merge_properties);
    criterion("hierarchical expansion produces the reference chain", hierarchy_example);
    criterion("end-to-end replay reproduces the inventory byte-for-byte", end_to_end_replay);
    criterion("enrollment cost stays flat as the inventory grows", scaling);
    criterion("benchmark table: perfect 100.00 cells and planted 80.00", benchmark_harness);
    criterion("persistence round-trip and double-export identity", persistence);

    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
