#pragma once

// Pattern-directed random generation of constraint-conformant output, plus
// single-field mutations. Test-side oracle: builds strings from the schema
// directly, independent of validate_output.

#include <random>
#include <string>
#include <vector>

#include "ikg/errors.hpp"
#include "ikg/schema.hpp"

namespace ikg::test {

class PatternGen {
public:
    PatternGen(const PropertySchema& schema, uint64_t seed) : schema_(schema), rng_(seed) {}

    std::string generate() {
        std::string out = ws() + "{";
        bool first = true;
        for (const auto* spec : schema_.all_properties()) {
            if (!first) out += ",";
            first = false;
            out += ws() + "\"" + spec->name + "\"" + ws() + ":" + ws() + value(*spec) + ws();
        }
        out += "}" + ws();
        return out;
    }

    // Applies one of four corruption kinds to a conformant string; returns
    // the mutated text and the error variant a strict validator must report.
    struct Mutation {
        std::string text;
        ValidationErrorKind expected;
        std::string field;
    };

    Mutation mutate(const std::string& conformant) {
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(conformant);
        // pick a field suitable for the chosen mutation kind
        for (int tries = 0; tries < 64; ++tries) {
            int kind = pick(4);
            const PropertySpec* spec = pick_spec();
            switch (kind) {
                case 0: {  // delete a field
                    j.erase(spec->name);
                    return {j.dump(), ValidationErrorKind::MissingField, spec->name};
                }
                case 1: {  // rename a field
                    std::string renamed = spec->name + "_x";
                    j[renamed] = j[spec->name];
                    j.erase(spec->name);
                    return {j.dump(), ValidationErrorKind::ExtraField, renamed};
                }
                case 2: {  // numeric value replaced with a word
                    if (!spec->data_type.is_numeric()) continue;
                    j[spec->name] = "heavy";
                    return {j.dump(), ValidationErrorKind::TypeMismatch, spec->name};
                }
                case 3: {  // choice replaced with a non-member label
                    if (spec->data_type.kind != TypeKind::Choices) continue;
                    j[spec->name] = "NotARealChoiceLabel";
                    return {j.dump(), ValidationErrorKind::UnknownChoice, spec->name};
                }
            }
        }
        j.erase(schema_.root_property.name);
        return {j.dump(), ValidationErrorKind::MissingField, schema_.root_property.name};
    }

private:
    int pick(int n) { return static_cast<int>(rng_() % static_cast<uint64_t>(n)); }

    const PropertySpec* pick_spec() {
        auto all = schema_.all_properties();
        return all[static_cast<size_t>(pick(static_cast<int>(all.size())))];
    }

    std::string ws() {
        static const char* options[] = {"", " ", "  ", "\n", " \n "};
        return options[pick(5)];
    }

    std::string digits_no_leading_zero() {
        int len = 1 + pick(6);
        std::string out;
        out += static_cast<char>('1' + pick(9));
        for (int i = 1; i < len; ++i) out += static_cast<char>('0' + pick(10));
        return out;
    }

    std::string value(const PropertySpec& spec) {
        switch (spec.data_type.kind) {
            case TypeKind::Int: {
                if (pick(8) == 0) return "0";
                return (pick(2) ? "-" : "") + digits_no_leading_zero();
            }
            case TypeKind::Float: {
                std::string out = pick(8) == 0 ? "0" : digits_no_leading_zero();
                if (pick(2)) {
                    out += ".";
                    int len = 1 + pick(4);
                    for (int i = 0; i < len; ++i) out += static_cast<char>('0' + pick(10));
                }
                return (pick(4) == 0 ? "-" : "") + out;
            }
            case TypeKind::Str: {
                int len = 1 + pick(48);
                std::string out = "\"";
                for (int i = 0; i < len; ++i) {
                    char c;
                    do {
                        c = static_cast<char>(0x20 + pick(0x7f - 0x20));
                    } while (c == '"' || c == '\\');
                    out += c;
                }
                out += "\"";
                return out;
            }
            case TypeKind::Choices: {
                const auto& cs = spec.data_type.choices;
                return "\"" + cs[static_cast<size_t>(pick(static_cast<int>(cs.size())))] + "\"";
            }
        }
        return "\"x\"";
    }

    const PropertySchema& schema_;
    std::mt19937_64 rng_;
};

}  // namespace ikg::test
