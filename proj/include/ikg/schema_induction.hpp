#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ikg/errors.hpp"
#include "ikg/model_client.hpp"
#include "ikg/prompts.hpp"
#include "ikg/schema.hpp"
#include "ikg/util.hpp"

namespace ikg {

enum class IdentifyMode { Auto, Manual };

namespace detail {

inline std::vector<std::string> dedup_ci(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& it : items) {
        bool seen = false;
        for (const auto& o : out) {
            if (util::iequals(o, it)) {
                seen = true;
                break;
            }
        }
        if (!seen) out.push_back(it);  // first spelling wins
    }
    return out;
}

}  // namespace detail

// Returns the deduplicated, order-preserving property name list. Manual mode
// passes the seed list through; Auto mode asks the LLM once and retries once
// if nothing parseable comes back.
inline std::vector<std::string> identify_properties(IdentifyMode mode,
                                                    const std::vector<std::string>& seed_list,
                                                    ModelBackend* llm) {
    if (mode == IdentifyMode::Manual) {
        if (seed_list.empty()) throw InvalidInput("manual mode requires a non-empty seed list");
        return detail::dedup_ci(seed_list);
    }
    if (!llm) throw InvalidInput("auto mode requires an LLM backend");
    ChatExchange ex;
    ex.user(prompts::identify_properties());
    ex.options.temperature = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto names = detail::dedup_ci(util::split_list(llm->complete(ex).at(0)));
        if (!names.empty()) return names;
    }
    throw EmptyResult("model produced no parseable property names");
}

// Argmax over the four type labels. Uses per-label scores when the backend
// exposes them; otherwise samples at temperature 0 and maps the reply to the
// nearest keyword. Ties break in the fixed order int < float < str < choices.
inline DataType infer_data_type(const std::string& property_name, ModelBackend& llm) {
    if (property_name.empty()) throw InvalidInput("property name must be non-empty");
    static const std::array<std::pair<std::string, TypeKind>, 4> kLabels = {{
        {"int", TypeKind::Int},
        {"float", TypeKind::Float},
        {"str", TypeKind::Str},
        {"choices", TypeKind::Choices},
    }};
    ChatExchange ex;
    ex.user(prompts::data_type(property_name));
    ex.options.temperature = 0.0;

    std::vector<std::string> label_names;
    for (const auto& [name, _] : kLabels) label_names.push_back(name);
    if (auto scores = llm.score_labels(ex, label_names)) {
        size_t best = 0;
        for (size_t i = 1; i < kLabels.size(); ++i) {
            if ((*scores)[i] > (*scores)[best]) best = i;  // strict: first wins ties
        }
        TypeKind kind = kLabels[best].second;
        return {kind, {}};
    }

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = util::to_lower(llm.complete(ex).at(0));
        size_t best_pos = std::string::npos;
        std::optional<TypeKind> best;
        for (const auto& [name, kind] : kLabels) {
            size_t pos = reply.find(name);
            if (pos != std::string::npos && pos < best_pos) {
                best_pos = pos;
                best = kind;
            }
        }
        if (best) return {*best, {}};
    }
    throw UnparseableTypeLabel("model emitted none of int/float/str/choices for \"" +
                               property_name + "\"");
}

// First whitespace-delimited token of the continuation after the "... could
// be 5 " prompt, stripped of edge punctuation.
inline std::string infer_unit(const std::string& property_name, ModelBackend& llm) {
    ChatExchange ex;
    ex.user(prompts::unit(property_name));
    ex.options.temperature = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply = util::trim(llm.complete(ex).at(0));
        std::string token;
        for (char c : reply) {
            if (std::isspace(static_cast<unsigned char>(c))) break;
            token += c;
        }
        size_t b = 0, e = token.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(token[e - 1]))) --e;
        token = token.substr(b, e - b);
        if (!token.empty()) return token;
    }
    throw EmptyUnit("model produced no unit token for \"" + property_name + "\"");
}

// Distinct choice labels plus the catch-all "Others" as the final label.
// "Other"/"Others" in model output is canonicalized to "Others".
inline std::vector<std::string> generate_choices(const std::string& property_name,
                                                 ModelBackend& llm) {
    ChatExchange ex;
    ex.user(prompts::choices(property_name));
    ex.options.temperature = 0.0;
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto raw = util::split_list(llm.complete(ex).at(0));
        for (auto& label : raw) {
            if (util::iequals(label, "Other") || util::iequals(label, "Others")) {
                label = kCatchAllLabel;
            }
        }
        auto labels = detail::dedup_ci(raw);
        if (labels.size() < 2) continue;
        std::erase_if(labels, [](const std::string& l) { return l == kCatchAllLabel; });
        labels.push_back(kCatchAllLabel);
        return labels;
    }
    throw TooFewChoices("model produced fewer than 2 distinct choices for \"" + property_name +
                        "\"");
}

// Full automatic schema induction: identify properties, then type each one
// and fill in its unit or choice list. The first choices-typed property whose
// name mentions "categor" becomes the hierarchy anchor.
inline PropertySchema induce_schema(IdentifyMode mode, const std::vector<std::string>& seed_list,
                                    ModelBackend& llm) {
    PropertySchema schema;
    schema.root_property = {"Product Name", {TypeKind::Str, {}}, std::nullopt, false};
    bool anchor_set = false;
    for (const auto& name : identify_properties(mode, seed_list, &llm)) {
        if (util::iequals(name, schema.root_property.name)) continue;
        PropertySpec spec;
        spec.name = name;
        spec.data_type = infer_data_type(name, llm);
        if (spec.data_type.is_numeric()) {
            spec.unit = infer_unit(name, llm);
        } else if (spec.data_type.kind == TypeKind::Choices) {
            spec.data_type.choices = generate_choices(name, llm);
            if (!anchor_set && util::to_lower(name).find("categor") != std::string::npos) {
                spec.hierarchy_anchor = true;
                anchor_set = true;
            }
        }
        schema.properties.push_back(std::move(spec));
    }
    validate_schema(schema);
    return schema;
}

}  // namespace ikg
