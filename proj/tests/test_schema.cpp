#include <catch2/catch_amalgamated.hpp>

#include "ikg/schema.hpp"
#include "ikg/schema_induction.hpp"
#include "support/oracle_backend.hpp"

using namespace ikg;

TEST_CASE("default schema matches the published property list") {
    PropertySchema s = default_schema();
    REQUIRE_NOTHROW(validate_schema(s));

    CHECK(s.root_property.name == "Product Name");
    CHECK(s.root_property.data_type.kind == TypeKind::Str);
    REQUIRE(s.properties.size() == 7);

    const PropertySpec* category = s.find("Category");
    REQUIRE(category);
    CHECK(category->data_type.choices.size() == 16);
    CHECK(category->data_type.choices.back() == "Others");
    CHECK(category->hierarchy_anchor);
    CHECK(s.anchor() == category);

    CHECK(s.find("Primary Package Color")->data_type.choices.size() == 21);
    CHECK(s.find("Package Material")->data_type.choices.size() == 13);
    CHECK(s.find("Package Shape")->data_type.choices.size() == 11);
    CHECK(s.find("Weight")->unit == "kg");
    CHECK(s.find("Price")->unit == "USD");
}

TEST_CASE("schema document round-trip") {
    PropertySchema s = default_schema();
    std::string text = serialize_schema(s);
    PropertySchema back = parse_schema(text);
    CHECK(back == s);
    // serialize is canonical
    CHECK(serialize_schema(back) == text);
}

TEST_CASE("schema parse rejects invariant violations") {
    PropertySchema s = default_schema();
    SECTION("duplicate property names") {
        s.properties.push_back({"brand", {TypeKind::Str, {}}, std::nullopt, false});
        CHECK_THROWS_AS(serialize_schema(s), SchemaInvariantViolation);
    }
    SECTION("numeric property without unit") {
        auto j = nlohmann::ordered_json::parse(serialize_schema(s));
        REQUIRE(j["properties"].back()["name"] == "Weight");
        j["properties"].back().erase("unit");
        CHECK_THROWS_AS(parse_schema(j.dump()), SchemaInvariantViolation);
    }
    SECTION("choices not ending in Others") {
        s.properties[0].data_type.choices.pop_back();
        CHECK_THROWS_AS(serialize_schema(s), SchemaInvariantViolation);
    }
    SECTION("two hierarchy anchors") {
        s.find("Package Shape");
        s.properties[6].hierarchy_anchor = true;  // Weight: also wrong kind
        CHECK_THROWS_AS(serialize_schema(s), SchemaInvariantViolation);
    }
    SECTION("malformed document") {
        CHECK_THROWS_AS(parse_schema("{not json"), SchemaParseError);
    }
}

TEST_CASE("identify_properties") {
    SECTION("manual dedup is case-insensitive, first spelling wins") {
        auto out = identify_properties(IdentifyMode::Manual, {"Brand", "brand", "Weight"}, nullptr);
        CHECK(out == std::vector<std::string>{"Brand", "Weight"});
    }
    SECTION("manual passthrough") {
        auto out = identify_properties(IdentifyMode::Manual, {"Category", "Price"}, nullptr);
        CHECK(out == std::vector<std::string>{"Category", "Price"});
    }
    SECTION("manual with empty seed list") {
        CHECK_THROWS_AS(identify_properties(IdentifyMode::Manual, {}, nullptr), InvalidInput);
    }
    SECTION("auto parses the model's list") {
        auto store = std::make_shared<FixtureStore>();
        ReplayBackend llm(store, "llm");
        ChatExchange ex;
        ex.user(prompts::identify_properties());
        llm.record(ex, {"Category, Brand, Price"});
        auto out = identify_properties(IdentifyMode::Auto, {}, &llm);
        CHECK(out == std::vector<std::string>{"Category", "Brand", "Price"});
    }
    SECTION("auto with empty replies fails after one retry") {
        auto store = std::make_shared<FixtureStore>();
        ReplayBackend llm(store, "llm");
        ChatExchange ex;
        ex.user(prompts::identify_properties());
        llm.record(ex, {"   "});
        CHECK_THROWS_AS(identify_properties(IdentifyMode::Auto, {}, &llm), EmptyResult);
    }
}

TEST_CASE("infer_data_type") {
    auto store = std::make_shared<FixtureStore>();
    ReplayBackend llm(store, "llm");
    auto scored = [&](const std::string& property, std::vector<double> scores) {
        ChatExchange ex;
        ex.user(prompts::data_type(property));
        llm.record_scores(ex, {"int", "float", "str", "choices"}, scores);
    };
    SECTION("argmax over scores") {
        scored("Weight", {0.1, 0.6, 0.2, 0.1});
        CHECK(infer_data_type("Weight", llm).kind == TypeKind::Float);
        scored("Brand", {0.1, 0.1, 0.7, 0.1});
        CHECK(infer_data_type("Brand", llm).kind == TypeKind::Str);
    }
    SECTION("ties break str before choices") {
        scored("Category", {0.0, 0.0, 0.5, 0.5});
        CHECK(infer_data_type("Category", llm).kind == TypeKind::Str);
    }
    SECTION("sampling fallback maps keywords") {
        ChatExchange ex;
        ex.user(prompts::data_type("Color"));
        llm.record(ex, {"I would say choices fits best."});
        auto dt = infer_data_type("Color", llm);
        CHECK(dt.kind == TypeKind::Choices);
        CHECK(dt.choices.empty());  // placeholder until generate_choices
    }
    SECTION("unparseable label after retry") {
        ChatExchange ex;
        ex.user(prompts::data_type("Mystery"));
        llm.record(ex, {"no idea"});
        CHECK_THROWS_AS(infer_data_type("Mystery", llm), UnparseableTypeLabel);
    }
    SECTION("deterministic given a deterministic backend") {
        scored("Price", {0.2, 0.5, 0.2, 0.1});
        CHECK(infer_data_type("Price", llm).kind == infer_data_type("Price", llm).kind);
    }
}

TEST_CASE("infer_unit") {
    auto store = std::make_shared<FixtureStore>();
    ReplayBackend llm(store, "llm");
    auto with_reply = [&](const std::string& property, const std::string& reply) {
        ChatExchange ex;
        ex.user(prompts::unit(property));
        llm.record(ex, {reply});
    };
    with_reply("Weight", "kg");
    with_reply("Price", "USD");
    with_reply("Height", " cm tall");
    with_reply("Void", "   ");
    CHECK(infer_unit("Weight", llm) == "kg");
    CHECK(infer_unit("Price", llm) == "USD");
    CHECK(infer_unit("Height", llm) == "cm");
    CHECK_THROWS_AS(infer_unit("Void", llm), EmptyUnit);
}

TEST_CASE("generate_choices") {
    auto store = std::make_shared<FixtureStore>();
    ReplayBackend llm(store, "llm");
    auto with_reply = [&](const std::string& property, const std::string& reply) {
        ChatExchange ex;
        ex.user(prompts::choices(property));
        llm.record(ex, {reply});
    };
    SECTION("appends the catch-all") {
        with_reply("Package Shape", "Rectangular, Cylindrical, Flat");
        CHECK(generate_choices("Package Shape", llm) ==
              std::vector<std::string>{"Rectangular", "Cylindrical", "Flat", "Others"});
    }
    SECTION("dedup plus catch-all already present") {
        with_reply("Color", "Red, red, Blue, Others");
        CHECK(generate_choices("Color", llm) == std::vector<std::string>{"Red", "Blue", "Others"});
    }
    SECTION("'Other' canonicalized to 'Others'") {
        with_reply("Material", "Plastic, Paper, Other");
        CHECK(generate_choices("Material", llm) ==
              std::vector<std::string>{"Plastic", "Paper", "Others"});
    }
    SECTION("category fixture reproduces the default list") {
        std::string labels;
        auto expected = default_schema().find("Category")->data_type.choices;
        for (size_t i = 0; i + 1 < expected.size(); ++i) {
            if (i) labels += ", ";
            labels += expected[i];
        }
        with_reply("Category", labels);
        auto out = generate_choices("Category", llm);
        CHECK(out.size() == 16);
        CHECK(out == expected);
    }
    SECTION("too few distinct labels") {
        with_reply("Dull", "Gray");
        CHECK_THROWS_AS(generate_choices("Dull", llm), TooFewChoices);
    }
}
