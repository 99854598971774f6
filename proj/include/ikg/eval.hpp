#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/errors.hpp"
#include "ikg/pipeline.hpp"
#include "ikg/schema.hpp"
#include "ikg/util.hpp"

namespace ikg {

// The five annotated properties. weight_kg may be absent; the other labels
// must be members of the active schema's choice lists.
struct AnnotationRecord {
    std::string image_path;
    std::string category;
    std::string primary_package_color;
    std::string package_material;
    std::string package_shape;
    std::optional<double> weight_kg;
};

struct EvalPair {
    std::string property;
    TypedValue predicted;     // may be absent
    TypedValue ground_truth;  // always present
};

// Benchmark percentage formatting: 2 decimals, round half-up.
inline double round_percent(double v) { return std::floor(v * 100.0 + 0.5) / 100.0; }

// Relative error |pred - gt| / gt; absent predictions score infinite error.
inline double error_ratio(const TypedValue& pred, double gt) {
    if (gt <= 0) throw InvalidInput("ground-truth value must be positive");
    if (!pred.is_numeric()) return std::numeric_limits<double>::infinity();
    return std::abs(pred.as_real() - gt) / gt;
}

inline double error_ratio(double pred, double gt) {
    return error_ratio(TypedValue::of_real(pred), gt);
}

// Percentage of pairs with error ratio strictly below the threshold.
inline double accuracy_at(double threshold, const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw EmptyPairs("accuracy_at needs at least one pair");
    if (threshold <= 0) throw InvalidInput("threshold must be positive");
    size_t correct = 0;
    for (const auto& p : pairs) {
        if (error_ratio(p.predicted, p.ground_truth.as_real()) < threshold) ++correct;
    }
    return round_percent(100.0 * static_cast<double>(correct) / pairs.size());
}

// Exact match on canonical labels, case-insensitive; absent counts incorrect.
inline double categorical_accuracy(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw EmptyPairs("categorical_accuracy needs at least one pair");
    size_t correct = 0;
    for (const auto& p : pairs) {
        if ((p.predicted.kind == TypedValue::Kind::Text ||
             p.predicted.kind == TypedValue::Kind::Raw) &&
            util::iequals(p.predicted.text, p.ground_truth.text)) {
            ++correct;
        }
    }
    return round_percent(100.0 * static_cast<double>(correct) / pairs.size());
}

// ---- annotation file --------------------------------------------------------
// One JSON record per line: image, category, primary_package_color,
// package_material, package_shape, weight_kg (optional, > 0).

inline std::vector<AnnotationRecord> parse_annotations(const std::string& text,
                                                       const PropertySchema& schema) {
    auto require_member = [&](const std::string& property, const std::string& label, int line) {
        const PropertySpec* spec = schema.find(property);
        if (!spec || spec->data_type.kind != TypeKind::Choices) {
            throw ConfigError("schema has no choices property named " + property);
        }
        for (const auto& c : spec->data_type.choices) {
            if (util::iequals(c, label)) return c;
        }
        throw DocumentParseError("line " + std::to_string(line) + ": \"" + label +
                                 "\" is not a valid " + property + " label");
    };
    std::vector<AnnotationRecord> out;
    int line_no = 0;
    for (const auto& line : util::split(text, '\n')) {
        ++line_no;
        if (util::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DocumentParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        AnnotationRecord rec;
        try {
            rec.image_path = j.at("image").get<std::string>();
            rec.category = require_member("Category", j.at("category").get<std::string>(), line_no);
            rec.primary_package_color = require_member(
                "Primary Package Color", j.at("primary_package_color").get<std::string>(), line_no);
            rec.package_material = require_member(
                "Package Material", j.at("package_material").get<std::string>(), line_no);
            rec.package_shape = require_member(
                "Package Shape", j.at("package_shape").get<std::string>(), line_no);
            if (j.contains("weight_kg") && !j["weight_kg"].is_null()) {
                double w = j["weight_kg"].get<double>();
                if (w <= 0) {
                    throw DocumentParseError("line " + std::to_string(line_no) +
                                             ": weight_kg must be positive");
                }
                rec.weight_kg = w;
            }
        } catch (const nlohmann::json::exception& e) {
            throw DocumentParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<AnnotationRecord> load_annotations(const std::string& path,
                                                      const PropertySchema& schema) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open annotation file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_annotations(text, schema);
}

// ---- benchmark table --------------------------------------------------------

struct MetricsCell {
    double percent = 0.0;
    int correct = 0;
    int incorrect = 0;
    int absent = 0;
    int denominator = 0;
};

struct MetricsTable {
    std::vector<std::string> rows;     // mode names
    std::vector<std::string> columns;  // property columns
    std::vector<std::vector<MetricsCell>> cells;  // [row][column]

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["columns"] = columns;
        j["rows"] = nlohmann::ordered_json::array();
        for (size_t r = 0; r < rows.size(); ++r) {
            nlohmann::ordered_json jr;
            jr["method"] = rows[r];
            jr["cells"] = nlohmann::ordered_json::array();
            for (const auto& c : cells[r]) {
                jr["cells"].push_back({{"percent", c.percent},
                                       {"correct", c.correct},
                                       {"incorrect", c.incorrect},
                                       {"absent", c.absent},
                                       {"denominator", c.denominator}});
            }
            j["rows"].push_back(jr);
        }
        return j;
    }

    std::string render_text() const {
        auto fmt = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            return std::string(buf);
        };
        std::vector<size_t> widths;
        widths.push_back(std::string("Method").size());
        for (const auto& r : rows) widths[0] = std::max(widths[0], r.size());
        for (size_t c = 0; c < columns.size(); ++c) {
            size_t w = columns[c].size();
            for (size_t r = 0; r < rows.size(); ++r) w = std::max(w, fmt(cells[r][c].percent).size());
            widths.push_back(w);
        }
        auto pad = [](const std::string& s, size_t w) {
            return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
        };
        std::string out = pad("Method", widths[0]);
        for (size_t c = 0; c < columns.size(); ++c) out += "  " + pad(columns[c], widths[c + 1]);
        out += "\n";
        for (size_t r = 0; r < rows.size(); ++r) {
            out += pad(rows[r], widths[0]);
            for (size_t c = 0; c < columns.size(); ++c) {
                out += "  " + pad(fmt(cells[r][c].percent), widths[c + 1]);
            }
            out += "\n";
        }
        return out;
    }
};

inline const std::vector<std::string>& benchmark_columns() {
    static const std::vector<std::string> cols = {
        "Primary Package Color", "Package Shape",     "Package Material",
        "Category",              "Weight (Acc@0.01)", "Weight (Acc@0.05)",
    };
    return cols;
}

// Enrolls every image under every mode and scores the five annotated
// properties. Per-image model failures are scored as absent predictions and
// never dropped from denominators.
inline MetricsTable run_benchmark(const std::vector<AnnotationRecord>& dataset,
                                  const std::vector<EnrollmentConfig>& modes,
                                  const PropertySchema& schema, const Backends& backends) {
    if (dataset.empty()) throw ConfigError("benchmark dataset is empty");
    if (modes.empty()) throw ConfigError("benchmark needs at least one mode");

    MetricsTable table;
    table.columns = benchmark_columns();

    auto predicted_number = [](const TypedValue* v) -> TypedValue {
        if (!v) return TypedValue::absent();
        if (v->is_numeric()) return *v;
        if (v->kind == TypedValue::Kind::Raw) {
            // baseline values like "1.1 lb": score the leading number as-is
            try {
                size_t used = 0;
                double d = std::stod(v->text, &used);
                if (used > 0) return TypedValue::of_real(d);
            } catch (const std::exception&) {
            }
        }
        return TypedValue::absent();
    };
    auto predicted_label = [](const TypedValue* v) -> TypedValue {
        if (v && (v->kind == TypedValue::Kind::Text || v->kind == TypedValue::Kind::Raw)) return *v;
        return TypedValue::absent();
    };

    for (const auto& config : modes) {
        table.rows.push_back(to_string(config.mode));
        Pipeline pipeline(schema, backends, config);
        InventoryGraph inventory;

        std::vector<EvalPair> color, shape, material, category, weight;
        for (const auto& rec : dataset) {
            PropertyAssignment assignment;
            try {
                std::ifstream f(rec.image_path, std::ios::binary);
                if (!f) throw ConfigError("cannot open image " + rec.image_path);
                std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                           std::istreambuf_iterator<char>());
                if (config.mode == EnrollMode::BaselineZeroShot ||
                    config.mode == EnrollMode::BaselineSchema) {
                    assignment = pipeline.baseline_extract(
                        bytes, config.mode == EnrollMode::BaselineSchema);
                } else {
                    assignment = pipeline.enroll(bytes, inventory, rec.image_path).assignment;
                }
            } catch (const Error&) {
                // scored as all-absent, never dropped
            }
            color.push_back({"Primary Package Color",
                             predicted_label(assignment.find("Primary Package Color")),
                             TypedValue::of_text(rec.primary_package_color)});
            shape.push_back({"Package Shape", predicted_label(assignment.find("Package Shape")),
                             TypedValue::of_text(rec.package_shape)});
            material.push_back({"Package Material",
                                predicted_label(assignment.find("Package Material")),
                                TypedValue::of_text(rec.package_material)});
            category.push_back({"Category", predicted_label(assignment.find("Category")),
                                TypedValue::of_text(rec.category)});
            if (rec.weight_kg) {
                weight.push_back({"Weight", predicted_number(assignment.find("Weight")),
                                  TypedValue::of_real(*rec.weight_kg)});
            }
        }

        auto categorical_cell = [](const std::vector<EvalPair>& pairs) {
            MetricsCell cell;
            cell.denominator = static_cast<int>(pairs.size());
            for (const auto& p : pairs) {
                if (p.predicted.is_absent()) ++cell.absent;
                else if (util::iequals(p.predicted.text, p.ground_truth.text)) ++cell.correct;
                else ++cell.incorrect;
            }
            cell.percent = pairs.empty() ? 0.0 : categorical_accuracy(pairs);
            return cell;
        };
        auto numeric_cell = [](const std::vector<EvalPair>& pairs, double threshold) {
            MetricsCell cell;
            cell.denominator = static_cast<int>(pairs.size());
            for (const auto& p : pairs) {
                if (p.predicted.is_absent()) ++cell.absent;
                else if (error_ratio(p.predicted, p.ground_truth.as_real()) < threshold) ++cell.correct;
                else ++cell.incorrect;
            }
            cell.percent = pairs.empty() ? 0.0 : accuracy_at(threshold, pairs);
            return cell;
        };
        table.cells.push_back({categorical_cell(color), categorical_cell(shape),
                               categorical_cell(material), categorical_cell(category),
                               numeric_cell(weight, 0.01), numeric_cell(weight, 0.05)});
    }
    return table;
}

}  // namespace ikg
