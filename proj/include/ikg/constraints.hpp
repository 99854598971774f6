#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/errors.hpp"
#include "ikg/schema.hpp"
#include "ikg/util.hpp"

namespace ikg {

enum class Provenance { Constrained, BaselineTriples };

// One typed property value. Text holds both free-form strings and canonical
// choice labels; Raw holds lenient baseline values that failed typing but are
// kept for scoring.
struct TypedValue {
    enum class Kind { Absent, Int, Real, Text, Raw };
    Kind kind = Kind::Absent;
    long long int_value = 0;
    double real_value = 0.0;
    std::string text;

    static TypedValue absent() { return {}; }
    static TypedValue of_int(long long v) { return {Kind::Int, v, 0.0, {}}; }
    static TypedValue of_real(double v) { return {Kind::Real, 0, v, {}}; }
    static TypedValue of_text(std::string s) { return {Kind::Text, 0, 0.0, std::move(s)}; }
    static TypedValue raw(std::string s) { return {Kind::Raw, 0, 0.0, std::move(s)}; }

    bool is_absent() const { return kind == Kind::Absent; }
    bool is_numeric() const { return kind == Kind::Int || kind == Kind::Real; }
    double as_real() const { return kind == Kind::Int ? static_cast<double>(int_value) : real_value; }

    bool operator==(const TypedValue&) const = default;
};

struct PropertyAssignment {
    struct Entry {
        std::string name;
        TypedValue value;
        Provenance provenance = Provenance::Constrained;
    };
    std::vector<Entry> entries;  // schema order, root first

    const TypedValue* find(std::string_view name) const {
        for (const auto& e : entries) {
            if (util::iequals(e.name, name)) return &e.value;
        }
        return nullptr;
    }
};

struct GenerationConstraint {
    std::vector<std::pair<std::string, std::string>> field_patterns;  // (name, value pattern)
    std::string rendered_pattern;  // anchored, full-object match
};

namespace detail {

inline std::string regex_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out += '\\';
        out += c;
    }
    return out;
}

// JSON numbers: no leading zeros, so every matched string parses strictly.
inline constexpr const char* kIntPattern = "-?(0|[1-9][0-9]*)";
inline constexpr const char* kFloatPattern = "-?(0|[1-9][0-9]*)(\\.[0-9]+)?";
// Printable ASCII minus quote and backslash: every matched string is a valid
// JSON string needing no escapes.
inline constexpr const char* kStrPattern = "\"[\\x20-\\x21\\x23-\\x5b\\x5d-\\x7e]{1,512}\"";

inline std::string value_pattern(const DataType& t) {
    switch (t.kind) {
        case TypeKind::Int: return kIntPattern;
        case TypeKind::Float: return kFloatPattern;
        case TypeKind::Str: return kStrPattern;
        case TypeKind::Choices: {
            std::string alt;
            for (const auto& c : t.choices) {
                if (!alt.empty()) alt += '|';
                alt += regex_escape(c);
            }
            return "\"(" + alt + ")\"";
        }
    }
    return kStrPattern;
}

}  // namespace detail

// Compiles the schema into a single regular expression matching exactly one
// JSON object with the schema's fields in schema order. Whitespace between
// tokens is tolerated.
inline GenerationConstraint compile_constraint(const PropertySchema& schema) {
    validate_schema(schema);
    const char* ws = "[ \\t\\n\\r]*";
    GenerationConstraint out;
    std::string p = "^";
    p += ws;
    p += "\\{";
    bool first = true;
    for (const auto* spec : schema.all_properties()) {
        std::string vp = detail::value_pattern(spec->data_type);
        out.field_patterns.emplace_back(spec->name, vp);
        if (!first) p += ",";
        first = false;
        p += ws;
        p += "\"" + detail::regex_escape(spec->name) + "\"";
        p += ws;
        p += ":";
        p += ws;
        p += "(" + vp + ")";
        p += ws;
    }
    p += "\\}";
    p += ws;
    p += "$";
    out.rendered_pattern = p;
    return out;
}

// Strict parse of model output into a PropertyAssignment. Lenient mode keeps
// mistyped and out-of-choice values as raw text so the baseline can be scored
// on everything it produced.
inline PropertyAssignment validate_output(const std::string& raw, const PropertySchema& schema,
                                          bool lenient = false) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(ValidationErrorKind::MalformedObject, "", e.what());
    }
    if (!j.is_object()) {
        throw ValidationError(ValidationErrorKind::MalformedObject, "",
                              "output is not a single object literal");
    }

    auto specs = schema.all_properties();
    for (const auto& [key, _] : j.items()) {
        if (!schema.find(key)) {
            if (lenient) continue;
            throw ValidationError(ValidationErrorKind::ExtraField, key,
                                  "unexpected field \"" + key + "\"");
        }
    }

    PropertyAssignment out;
    for (const auto* spec : specs) {
        // key lookup is exact; constrained output always uses canonical names
        if (!j.contains(spec->name)) {
            if (lenient) {
                out.entries.push_back({spec->name, TypedValue::absent(),
                                       Provenance::BaselineTriples});
                continue;
            }
            throw ValidationError(ValidationErrorKind::MissingField, spec->name,
                                  "missing field \"" + spec->name + "\"");
        }
        const auto& v = j[spec->name];
        TypedValue tv;
        switch (spec->data_type.kind) {
            case TypeKind::Int: {
                if (v.is_number_integer()) {
                    tv = TypedValue::of_int(v.get<long long>());
                } else if (lenient) {
                    tv = TypedValue::raw(v.is_string() ? v.get<std::string>() : v.dump());
                } else {
                    throw ValidationError(ValidationErrorKind::TypeMismatch, spec->name,
                                          "field \"" + spec->name + "\": expected int, got " +
                                              std::string(v.type_name()));
                }
                break;
            }
            case TypeKind::Float: {
                if (v.is_number()) {
                    tv = TypedValue::of_real(v.get<double>());
                } else if (lenient) {
                    // salvage numeric strings like "1.1 lb" -> raw
                    tv = TypedValue::raw(v.is_string() ? v.get<std::string>() : v.dump());
                } else {
                    throw ValidationError(ValidationErrorKind::TypeMismatch, spec->name,
                                          "field \"" + spec->name + "\": expected float, got " +
                                              std::string(v.type_name()));
                }
                break;
            }
            case TypeKind::Str: {
                if (v.is_string()) {
                    tv = TypedValue::of_text(v.get<std::string>());
                } else if (lenient) {
                    tv = TypedValue::raw(v.dump());
                } else {
                    throw ValidationError(ValidationErrorKind::TypeMismatch, spec->name,
                                          "field \"" + spec->name + "\": expected string, got " +
                                              std::string(v.type_name()));
                }
                break;
            }
            case TypeKind::Choices: {
                if (!v.is_string()) {
                    if (lenient) {
                        tv = TypedValue::raw(v.dump());
                        break;
                    }
                    throw ValidationError(ValidationErrorKind::TypeMismatch, spec->name,
                                          "field \"" + spec->name + "\": expected choice label, got " +
                                              std::string(v.type_name()));
                }
                std::string got = v.get<std::string>();
                const std::string* canon = nullptr;
                for (const auto& c : spec->data_type.choices) {
                    if (util::iequals(c, got)) {
                        canon = &c;
                        break;
                    }
                }
                if (canon) {
                    tv = TypedValue::of_text(*canon);
                } else if (lenient) {
                    tv = TypedValue::raw(got);
                } else {
                    std::string allowed;
                    for (const auto& c : spec->data_type.choices) {
                        if (!allowed.empty()) allowed += ", ";
                        allowed += c;
                    }
                    throw ValidationError(ValidationErrorKind::UnknownChoice, spec->name,
                                          "field \"" + spec->name + "\": \"" + got +
                                              "\" is not one of [" + allowed + "]");
                }
                break;
            }
        }
        out.entries.push_back({spec->name, tv,
                               lenient ? Provenance::BaselineTriples : Provenance::Constrained});
    }
    return out;
}

// Human-readable schema rendering used to augment prompts. Deterministic.
inline std::string schema_prompt_text(const PropertySchema& schema) {
    validate_schema(schema);
    std::string out;
    for (const auto* spec : schema.all_properties()) {
        out += spec->name;
        out += ": ";
        out += to_string(spec->data_type.kind);
        if (spec->unit) out += " (" + *spec->unit + ")";
        if (spec->data_type.kind == TypeKind::Choices) {
            out += " [";
            bool first = true;
            for (const auto& c : spec->data_type.choices) {
                if (!first) out += ", ";
                first = false;
                out += c;
            }
            out += "]";
        }
        out += "\n";
    }
    return out;
}

}  // namespace ikg
