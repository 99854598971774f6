#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/errors.hpp"
#include "ikg/graph.hpp"
#include "ikg/util.hpp"

namespace ikg {

inline constexpr const char* kGraphFormatVersion = "ikg-graph-1";

enum class ExportFormat { PropertyGraphXml, GraphStatements };

namespace detail {

inline std::vector<const NodeRecord*> sorted_nodes(const InventoryGraph& g) {
    std::vector<const NodeRecord*> out;
    out.reserve(g.nodes().size());
    for (const auto& [id, rec] : g.nodes()) out.push_back(&rec);
    std::sort(out.begin(), out.end(), [](const NodeRecord* a, const NodeRecord* b) {
        if (a->kind != b->kind) return static_cast<int>(a->kind) < static_cast<int>(b->kind);
        return a->normalized < b->normalized;
    });
    return out;
}

inline std::vector<const Edge*> sorted_edges(const InventoryGraph& g) {
    std::vector<const Edge*> out;
    out.reserve(g.edges().size());
    for (const auto& e : g.edges()) out.push_back(&e);
    std::sort(out.begin(), out.end(), [](const Edge* a, const Edge* b) {
        if (a->from.id() != b->from.id()) return a->from.id() < b->from.id();
        if (a->label != b->label) return a->label < b->label;
        return a->to.id() < b->to.id();
    });
    return out;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            case '\n': out += "&#10;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string cypher_string(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += "\"";
    return out;
}

inline std::string cypher_rel_type(std::string_view label) {
    std::string out = "`";
    for (char c : label) {
        if (c == '`') out += "``";
        else out += c;
    }
    out += "`";
    return out;
}

inline std::string node_label(NodeKind k) {
    switch (k) {
        case NodeKind::Product: return "Product";
        case NodeKind::PropertyValue: return "PropertyValue";
        case NodeKind::CategoryNode: return "Category";
    }
    return "Node";
}

}  // namespace detail

// Canonical document: nodes sorted by (kind, normalized), edges by
// (from, label, to). Equal graphs serialize to identical bytes.
inline std::string save_graph(const InventoryGraph& inventory) {
    nlohmann::ordered_json j;
    j["format_version"] = kGraphFormatVersion;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto* n : detail::sorted_nodes(inventory)) {
        nlohmann::ordered_json jn;
        jn["kind"] = to_string(n->kind);
        jn["normalized"] = n->normalized;
        jn["display"] = n->display;
        j["nodes"].push_back(jn);
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto* e : detail::sorted_edges(inventory)) {
        nlohmann::ordered_json je;
        je["from"] = {{"kind", to_string(e->from.kind)}, {"normalized", e->from.normalized}};
        je["to"] = {{"kind", to_string(e->to.kind)}, {"normalized", e->to.normalized}};
        je["label"] = e->label;
        if (e->numeric_value) je["value"] = *e->numeric_value;
        if (e->unit) je["unit"] = *e->unit;
        j["edges"].push_back(je);
    }
    j["products"] = nlohmann::ordered_json::array();
    for (const auto& p : inventory.products()) j["products"].push_back(p);
    return j.dump(2) + "\n";
}

inline InventoryGraph load_graph(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DocumentParseError(e.what());
    }
    if (!j.is_object() || !j.contains("format_version")) {
        throw DocumentParseError("missing format_version");
    }
    if (j["format_version"] != kGraphFormatVersion) {
        throw VersionMismatch("expected " + std::string(kGraphFormatVersion) + ", got " +
                              j["format_version"].dump());
    }
    InventoryGraph g;
    auto parse_key = [&](const nlohmann::json& jk) -> NodeKey {
        auto kind = node_kind_from_string(jk.at("kind").get<std::string>());
        if (!kind) throw DocumentParseError("unknown node kind " + jk.at("kind").dump());
        NodeKey k;
        k.kind = *kind;
        k.normalized = jk.at("normalized").get<std::string>();
        return k;
    };
    try {
        for (const auto& jn : j.at("nodes")) {
            NodeKey k = parse_key(jn);
            k.display = jn.at("display").get<std::string>();
            if (g.find(k)) throw InvariantViolation("duplicate node " + k.id());
            g.upsert_node(k);
        }
        size_t before_edges = 0;
        for (const auto& je : j.at("edges")) {
            Edge e;
            e.from = parse_key(je.at("from"));
            e.to = parse_key(je.at("to"));
            e.label = je.at("label").get<std::string>();
            if (je.contains("value")) e.numeric_value = je["value"].get<double>();
            if (je.contains("unit")) e.unit = je["unit"].get<std::string>();
            const NodeRecord* from = g.find(e.from);
            const NodeRecord* to = g.find(e.to);
            if (!from || !to) {
                throw InvariantViolation("edge references missing node: " + e.id());
            }
            e.from.display = from->display;
            e.to.display = to->display;
            g.upsert_edge(e);
            if (g.edge_count() == before_edges) {
                throw InvariantViolation("duplicate edge " + e.id());
            }
            before_edges = g.edge_count();
        }
        for (const auto& jp : j.at("products")) {
            if (!g.products().contains(jp.get<std::string>())) {
                throw InvariantViolation("products list names a non-product node " + jp.dump());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DocumentParseError(e.what());
    }
    g.reset_counters();
    return g;
}

// GraphML with node kind/display and edge label/value/unit attributes.
inline std::string export_graphml(const InventoryGraph& inventory) {
    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out += "  <key id=\"kind\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n";
    out += "  <key id=\"display\" for=\"node\" attr.name=\"display\" attr.type=\"string\"/>\n";
    out += "  <key id=\"label\" for=\"edge\" attr.name=\"label\" attr.type=\"string\"/>\n";
    out += "  <key id=\"value\" for=\"edge\" attr.name=\"value\" attr.type=\"double\"/>\n";
    out += "  <key id=\"unit\" for=\"edge\" attr.name=\"unit\" attr.type=\"string\"/>\n";
    out += "  <graph id=\"inventory\" edgedefault=\"directed\">\n";
    for (const auto* n : detail::sorted_nodes(inventory)) {
        out += "    <node id=\"" +
               detail::xml_escape(std::to_string(static_cast<int>(n->kind)) + "|" + n->normalized) +
               "\">";
        out += "<data key=\"kind\">" + std::string(to_string(n->kind)) + "</data>";
        out += "<data key=\"display\">" + detail::xml_escape(n->display) + "</data>";
        out += "</node>\n";
    }
    for (const auto* e : detail::sorted_edges(inventory)) {
        out += "    <edge source=\"" + detail::xml_escape(e->from.id()) + "\" target=\"" +
               detail::xml_escape(e->to.id()) + "\">";
        out += "<data key=\"label\">" + detail::xml_escape(e->label) + "</data>";
        if (e->numeric_value) {
            out += "<data key=\"value\">" + util::format_number(*e->numeric_value) + "</data>";
        }
        if (e->unit) out += "<data key=\"unit\">" + detail::xml_escape(*e->unit) + "</data>";
        out += "</edge>\n";
    }
    out += "  </graph>\n";
    out += "</graphml>\n";
    return out;
}

// One MERGE statement per node and per edge; re-import is idempotent.
inline std::string export_statements(const InventoryGraph& inventory) {
    std::string out;
    for (const auto* n : detail::sorted_nodes(inventory)) {
        std::string id = std::to_string(static_cast<int>(n->kind)) + "|" + n->normalized;
        out += "MERGE (n:" + detail::node_label(n->kind) + " {key: " + detail::cypher_string(id) +
               ", display: " + detail::cypher_string(n->display) + "});\n";
    }
    for (const auto* e : detail::sorted_edges(inventory)) {
        out += "MERGE (a {key: " + detail::cypher_string(e->from.id()) + "}) MERGE (b {key: " +
               detail::cypher_string(e->to.id()) + "}) MERGE (a)-[r:" +
               detail::cypher_rel_type(e->label) + "]->(b)";
        if (e->numeric_value) {
            out += " SET r.value = " + util::format_number(*e->numeric_value);
            if (e->unit) out += ", r.unit = " + detail::cypher_string(*e->unit);
        }
        out += ";\n";
    }
    return out;
}

inline std::string export_graph(const InventoryGraph& inventory, ExportFormat format) {
    switch (format) {
        case ExportFormat::PropertyGraphXml: return export_graphml(inventory);
        case ExportFormat::GraphStatements: return export_statements(inventory);
    }
    throw ConfigError("unknown export format");
}

}  // namespace ikg
