#pragma once

#include <string>
#include <vector>

namespace ikg::prompts {

// Frozen prompt templates, keyed by stage. Fixture keys hash the full prompt
// text, so any edit here invalidates recorded fixtures; bump the version
// alongside such edits.
inline constexpr const char* kVersion = "v1";

inline std::string identify_properties() {
    return "List the most important properties when describing an e-commerce product. "
           "Respond with a comma-separated list of property names only.";
}

inline std::string data_type(const std::string& property) {
    return "What is the most suitable data type for the product property \"" + property +
           "\"? Answer with exactly one of: int, float, str, choices.";
}

// The continuation after "5 " is read as the unit of measurement.
inline std::string unit(const std::string& property) {
    return property + " of a product could be 5 ";
}

inline std::string choices(const std::string& property) {
    return "Generate diverse distinct choices for the product property \"" + property +
           "\" that can generalize to most products. "
           "Respond with a comma-separated list of choice labels only.";
}

inline std::string extract_turn1(const std::string& schema_text) {
    return "Describe the product shown in the image in detail, including any text visible on "
           "the packaging. Make sure the description covers the following properties:\n" +
           schema_text;
}

inline std::string extract_turn2() {
    return "Provide additional details about the product that were not covered in your previous "
           "answer, including fine print, packaging appearance, and any other visual cues.";
}

inline std::string reasoning_request(const std::vector<std::string>& descriptions,
                                     const std::string& schema_text) {
    std::string out =
        "Below are text descriptions of a product extracted from its image.\n\n";
    for (size_t i = 0; i < descriptions.size(); ++i) {
        out += "Description " + std::to_string(i + 1) + ":\n" + descriptions[i] + "\n\n";
    }
    out += "Analyze the descriptions step by step and work out the value of every property in "
           "this schema, converting numeric values to the schema's units where needed:\n" +
           schema_text;
    return out;
}

inline std::string constrained_request(const std::string& schema_text) {
    return "Now output the product properties as a single JSON object that follows exactly this "
           "schema:\n" + schema_text;
}

inline std::string constrained_only_request(const std::vector<std::string>& descriptions,
                                            const std::string& schema_text) {
    std::string out =
        "Below are text descriptions of a product extracted from its image.\n\n";
    for (size_t i = 0; i < descriptions.size(); ++i) {
        out += "Description " + std::to_string(i + 1) + ":\n" + descriptions[i] + "\n\n";
    }
    out += "Output the product properties as a single JSON object that follows exactly this "
           "schema:\n" + schema_text;
    return out;
}

inline std::string constrained_retry(const std::string& error_text) {
    return "Your previous output was invalid: " + error_text +
           "\nOutput the corrected JSON object.";
}

inline std::string expansion(const std::string& product, const std::string& innermost) {
    return "The product \"" + product + "\" belongs to the category \"" + innermost +
           "\". Propose exactly one intermediate category that sits between the product and \"" +
           innermost + "\", more specific than \"" + innermost +
           "\" but more general than the product. Respond with the category name only.";
}

inline std::string baseline_triples(const std::vector<std::string>& predicates,
                                    const std::string& schema_text, bool with_schema) {
    std::string out;
    if (with_schema) {
        out += "The product properties follow this schema:\n" + schema_text + "\n";
    }
    out += "Generate knowledge graph triples for the product shown in the image, using the "
           "product name as the subject. Use these property names as the list of predicates: ";
    for (size_t i = 0; i < predicates.size(); ++i) {
        if (i) out += ", ";
        out += predicates[i];
    }
    out += ".\nRespond with one triple per line in the form: subject | predicate | object";
    return out;
}

}  // namespace ikg::prompts
