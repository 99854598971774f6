#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/errors.hpp"
#include "ikg/util.hpp"

namespace ikg {

// Catch-all label appended to every choice list.
inline constexpr const char* kCatchAllLabel = "Others";

enum class TypeKind { Int, Float, Str, Choices };

inline const char* to_string(TypeKind k) {
    switch (k) {
        case TypeKind::Int: return "int";
        case TypeKind::Float: return "float";
        case TypeKind::Str: return "str";
        case TypeKind::Choices: return "choices";
    }
    return "?";
}

inline std::optional<TypeKind> type_kind_from_string(std::string_view s) {
    if (s == "int") return TypeKind::Int;
    if (s == "float") return TypeKind::Float;
    if (s == "str") return TypeKind::Str;
    if (s == "choices") return TypeKind::Choices;
    return std::nullopt;
}

struct DataType {
    TypeKind kind = TypeKind::Str;
    // Present iff kind == Choices. Non-empty, case-insensitively distinct,
    // last label is the catch-all. An empty list is a placeholder produced by
    // type inference before the choices are generated; schema validation
    // rejects it.
    std::vector<std::string> choices;

    bool is_numeric() const { return kind == TypeKind::Int || kind == TypeKind::Float; }

    bool operator==(const DataType&) const = default;
};

struct PropertySpec {
    std::string name;
    DataType data_type;
    std::optional<std::string> unit;  // present iff numeric
    bool hierarchy_anchor = false;

    bool operator==(const PropertySpec&) const = default;
};

struct PropertySchema {
    PropertySpec root_property;                // the product-name property, kind Str
    std::vector<PropertySpec> properties;      // non-root properties, in order

    bool operator==(const PropertySchema&) const = default;

    // All properties including root, root first.
    std::vector<const PropertySpec*> all_properties() const {
        std::vector<const PropertySpec*> out;
        out.push_back(&root_property);
        for (const auto& p : properties) out.push_back(&p);
        return out;
    }

    const PropertySpec* find(std::string_view name) const {
        if (util::iequals(root_property.name, name)) return &root_property;
        for (const auto& p : properties) {
            if (util::iequals(p.name, name)) return &p;
        }
        return nullptr;
    }

    // The single Choices property whose value terminates hierarchy chains.
    const PropertySpec* anchor() const {
        for (const auto& p : properties) {
            if (p.hierarchy_anchor) return &p;
        }
        return nullptr;
    }
};

// Throws SchemaInvariantViolation on the first broken invariant.
inline void validate_schema(const PropertySchema& schema) {
    auto check_spec = [](const PropertySpec& p) {
        if (p.name.empty()) throw SchemaInvariantViolation("property with empty name");
        if (util::contains_control_chars(p.name)) {
            throw SchemaInvariantViolation("property name contains control characters: " + p.name);
        }
        if (p.data_type.kind == TypeKind::Choices) {
            if (p.data_type.choices.empty()) {
                throw SchemaInvariantViolation("choices list empty for " + p.name);
            }
            if (!util::iequals(p.data_type.choices.back(), kCatchAllLabel)) {
                throw SchemaInvariantViolation("choices for " + p.name +
                                               " must end with \"Others\"");
            }
            for (size_t i = 0; i < p.data_type.choices.size(); ++i) {
                for (size_t j = i + 1; j < p.data_type.choices.size(); ++j) {
                    if (util::iequals(p.data_type.choices[i], p.data_type.choices[j])) {
                        throw SchemaInvariantViolation("duplicate choice label \"" +
                                                       p.data_type.choices[i] + "\" in " + p.name);
                    }
                }
            }
        } else if (!p.data_type.choices.empty()) {
            throw SchemaInvariantViolation("choices list on non-choices property " + p.name);
        }
        if (p.data_type.is_numeric() != p.unit.has_value()) {
            throw SchemaInvariantViolation("unit must be present iff numeric: " + p.name);
        }
        if (p.unit && util::trim(*p.unit).empty()) {
            throw SchemaInvariantViolation("empty unit on " + p.name);
        }
    };

    if (schema.root_property.data_type.kind != TypeKind::Str) {
        throw SchemaInvariantViolation("root property must be str");
    }
    if (schema.root_property.hierarchy_anchor) {
        throw SchemaInvariantViolation("root property cannot be the hierarchy anchor");
    }
    check_spec(schema.root_property);

    int anchors = 0;
    for (const auto& p : schema.properties) {
        check_spec(p);
        if (p.hierarchy_anchor) {
            ++anchors;
            if (p.data_type.kind != TypeKind::Choices) {
                throw SchemaInvariantViolation("hierarchy anchor must have kind choices: " +
                                               p.name);
            }
        }
    }
    if (anchors > 1) throw SchemaInvariantViolation("more than one hierarchy anchor");

    auto all = schema.all_properties();
    for (size_t i = 0; i < all.size(); ++i) {
        for (size_t j = i + 1; j < all.size(); ++j) {
            if (util::iequals(all[i]->name, all[j]->name)) {
                throw SchemaInvariantViolation("duplicate property name: " + all[j]->name);
            }
        }
    }
}

// The fully automatic schema used by default: 8 properties, Category is the
// hierarchy anchor.
inline PropertySchema default_schema() {
    PropertySchema s;
    s.root_property = {"Product Name", {TypeKind::Str, {}}, std::nullopt, false};
    s.properties = {
        {"Category",
         {TypeKind::Choices,
          {"Electronics", "Fashion", "Home and Kitchen", "Beauty and Personal Care",
           "Food and Beverages", "Sports and Outdoors", "Baby and Kids Products",
           "Health and Wellness", "Automotive", "Arts and Crafts", "Pet Products",
           "Office and School Supplies", "Industrial and Scientific", "Musical Instruments",
           "Toys and Games", "Others"}},
         std::nullopt,
         true},
        {"Brand", {TypeKind::Str, {}}, std::nullopt, false},
        {"Price", {TypeKind::Float, {}}, "USD", false},
        {"Primary Package Color",
         {TypeKind::Choices,
          {"White", "Black", "Gray", "Beige", "Brown", "Tan", "Green", "Red", "Blue", "Yellow",
           "Light Blue", "Pink", "Baby Blue", "Mint Green", "Silver", "Gold", "Copper", "Purple",
           "Orange", "Turquoise", "Others"}},
         std::nullopt,
         false},
        {"Package Material",
         {TypeKind::Choices,
          {"Plastic", "Paper", "Cardboard", "Glass", "Metal", "Wood", "Fabric", "Foam", "Bamboo",
           "Bioplastic", "Molded Pulp", "Corrugated", "Others"}},
         std::nullopt,
         false},
        {"Package Shape",
         {TypeKind::Choices,
          {"Rectangular", "Cylindrical", "Spherical", "Oval", "Triangular", "Irregular", "Flat",
           "Tubular", "Conical", "Geometric", "Others"}},
         std::nullopt,
         false},
        {"Weight", {TypeKind::Float, {}}, "kg", false},
    };
    return s;
}

// ---- schema file round-trip ------------------------------------------------
//
// Format: JSON with top-level `root_property` and `properties`; each property
// has `name`, `type` in {int,float,str,choices}, optional `unit`, optional
// `choices`, optional `hierarchy_anchor`.

namespace detail {

inline nlohmann::ordered_json spec_to_json(const PropertySpec& p) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["type"] = to_string(p.data_type.kind);
    if (p.unit) j["unit"] = *p.unit;
    if (p.data_type.kind == TypeKind::Choices) j["choices"] = p.data_type.choices;
    if (p.hierarchy_anchor) j["hierarchy_anchor"] = true;
    return j;
}

inline PropertySpec spec_from_json(const nlohmann::json& j) {
    PropertySpec p;
    if (!j.is_object()) throw SchemaParseError("property entry is not an object");
    if (!j.contains("name") || !j["name"].is_string()) {
        throw SchemaParseError("property entry missing string field 'name'");
    }
    p.name = j["name"].get<std::string>();
    if (!j.contains("type") || !j["type"].is_string()) {
        throw SchemaParseError("property '" + p.name + "' missing string field 'type'");
    }
    auto kind = type_kind_from_string(j["type"].get<std::string>());
    if (!kind) {
        throw SchemaParseError("property '" + p.name + "' has unknown type '" +
                               j["type"].get<std::string>() + "'");
    }
    p.data_type.kind = *kind;
    if (j.contains("unit")) {
        if (!j["unit"].is_string()) throw SchemaParseError("'unit' must be a string: " + p.name);
        p.unit = j["unit"].get<std::string>();
    }
    if (j.contains("choices")) {
        if (!j["choices"].is_array()) {
            throw SchemaParseError("'choices' must be an array: " + p.name);
        }
        for (const auto& c : j["choices"]) {
            if (!c.is_string()) throw SchemaParseError("choice labels must be strings: " + p.name);
            p.data_type.choices.push_back(c.get<std::string>());
        }
    }
    if (j.contains("hierarchy_anchor")) {
        if (!j["hierarchy_anchor"].is_boolean()) {
            throw SchemaParseError("'hierarchy_anchor' must be boolean: " + p.name);
        }
        p.hierarchy_anchor = j["hierarchy_anchor"].get<bool>();
    }
    return p;
}

}  // namespace detail

inline std::string serialize_schema(const PropertySchema& schema) {
    validate_schema(schema);
    nlohmann::ordered_json j;
    j["root_property"] = detail::spec_to_json(schema.root_property);
    j["properties"] = nlohmann::ordered_json::array();
    for (const auto& p : schema.properties) j["properties"].push_back(detail::spec_to_json(p));
    return j.dump(2) + "\n";
}

inline PropertySchema parse_schema(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaParseError(e.what());
    }
    if (!j.is_object() || !j.contains("root_property") || !j.contains("properties") ||
        !j["properties"].is_array()) {
        throw SchemaParseError("schema document needs 'root_property' and 'properties' array");
    }
    PropertySchema s;
    s.root_property = detail::spec_from_json(j["root_property"]);
    for (const auto& p : j["properties"]) s.properties.push_back(detail::spec_from_json(p));
    validate_schema(s);
    return s;
}

}  // namespace ikg
