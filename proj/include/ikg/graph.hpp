#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ikg/constraints.hpp"
#include "ikg/errors.hpp"
#include "ikg/schema.hpp"
#include "ikg/util.hpp"

namespace ikg {

enum class NodeKind { Product = 0, PropertyValue = 1, CategoryNode = 2 };

inline const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Product: return "product";
        case NodeKind::PropertyValue: return "property_value";
        case NodeKind::CategoryNode: return "category";
    }
    return "?";
}

inline std::optional<NodeKind> node_kind_from_string(std::string_view s) {
    if (s == "product") return NodeKind::Product;
    if (s == "property_value") return NodeKind::PropertyValue;
    if (s == "category") return NodeKind::CategoryNode;
    return std::nullopt;
}

// Lowercase, punctuation stripped to spaces, tokens sorted, single-space
// joined. Idempotent; labels that share the same words in any order or casing
// normalize identically.
inline std::string normalize_label(std::string_view display) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : display) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (c >= 0x80) {
            cur += ch;  // keep non-ASCII bytes as-is
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    if (tokens.empty()) throw EmptyLabel("label is empty after normalization: \"" +
                                         std::string(display) + "\"");
    std::sort(tokens.begin(), tokens.end());
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

struct NodeKey {
    std::string normalized;
    NodeKind kind = NodeKind::PropertyValue;
    std::string display;  // first-seen original label; not part of identity

    static NodeKey make(std::string_view display, NodeKind kind) {
        return {normalize_label(display), kind, std::string(display)};
    }

    // identity string used for indexing and canonical sorting
    std::string id() const { return std::to_string(static_cast<int>(kind)) + "|" + normalized; }

    friend bool operator==(const NodeKey& a, const NodeKey& b) {
        return a.normalized == b.normalized && a.kind == b.kind;
    }
};

struct Edge {
    NodeKey from;
    NodeKey to;
    std::string label;  // property name, or "is_a" for hierarchy links
    std::optional<double> numeric_value;
    std::optional<std::string> unit;

    std::string id() const { return from.id() + ">" + label + ">" + to.id(); }
};

struct ProductSubgraph {
    NodeKey root;  // kind Product
    std::vector<Edge> property_edges;
    std::vector<std::vector<NodeKey>> hierarchy_chains;  // root .. anchor value
};

struct NodeRecord {
    std::string normalized;
    NodeKind kind = NodeKind::PropertyValue;
    std::string display;
    int in_degree = 0;
    int out_degree = 0;
};

// Counters over structural mutations, used to demonstrate that merging one
// product costs the same regardless of inventory size.
struct GraphOpCounters {
    size_t node_inserts = 0;
    size_t node_hits = 0;
    size_t edge_inserts = 0;
    size_t edge_hits = 0;

    size_t total() const { return node_inserts + node_hits + edge_inserts + edge_hits; }
    bool operator==(const GraphOpCounters&) const = default;
};

class InventoryGraph {
public:
    const std::unordered_map<std::string, NodeRecord>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::set<std::string>& products() const { return products_; }
    const std::vector<std::string>& conflicts() const { return conflicts_; }

    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edges_.size(); }

    GraphOpCounters& counters() const { return counters_; }
    void reset_counters() const { counters_ = {}; }

    // Inserts the node if its (normalized, kind) key is new; keeps the
    // existing display label otherwise. Records (does not unify) collisions
    // where the same normalized label would mix Product with non-Product.
    void upsert_node(const NodeKey& key) {
        auto [it, inserted] = nodes_.try_emplace(
            key.id(), NodeRecord{key.normalized, key.kind, key.display, 0, 0});
        if (inserted) {
            ++counters_.node_inserts;
            auto& mask = kind_mask_[key.normalized];
            uint8_t bit = static_cast<uint8_t>(1u << static_cast<int>(key.kind));
            bool product_bit = (mask & 1u) != 0;
            bool had_nonproduct = (mask & ~1u) != 0;
            if ((key.kind == NodeKind::Product && had_nonproduct) ||
                (key.kind != NodeKind::Product && product_bit)) {
                conflicts_.push_back("kind conflict on label \"" + key.normalized + "\"");
            }
            mask |= bit;
            if (key.kind == NodeKind::Product) products_.insert(key.id());
        } else {
            ++counters_.node_hits;
        }
    }

    void upsert_edge(const Edge& e) {
        auto [it, inserted] = edge_ids_.insert(e.id());
        if (inserted) {
            ++counters_.edge_inserts;
            edges_.push_back(e);
            nodes_.at(e.from.id()).out_degree++;
            nodes_.at(e.to.id()).in_degree++;
        } else {
            ++counters_.edge_hits;
        }
    }

    const NodeRecord* find(const NodeKey& key) const {
        auto it = nodes_.find(key.id());
        return it == nodes_.end() ? nullptr : &it->second;
    }

private:
    std::unordered_map<std::string, NodeRecord> nodes_;
    std::unordered_set<std::string> edge_ids_;
    std::vector<Edge> edges_;
    std::set<std::string> products_;
    std::unordered_map<std::string, uint8_t> kind_mask_;
    std::vector<std::string> conflicts_;
    mutable GraphOpCounters counters_;
};

inline void validate_subgraph(const ProductSubgraph& sub) {
    if (sub.root.kind != NodeKind::Product) throw InvariantViolation("subgraph root must be a product");
    for (const auto& e : sub.property_edges) {
        if (!(e.from == sub.root)) {
            throw InvariantViolation("property edges must originate at the product root");
        }
    }
    for (const auto& chain : sub.hierarchy_chains) {
        if (chain.size() < 2 || !(chain.front() == sub.root)) {
            throw InvariantViolation("hierarchy chain must start at the product root");
        }
        std::set<std::string> seen;
        for (const auto& k : chain) {
            if (!seen.insert(k.id()).second) {
                throw InvariantViolation("hierarchy chain contains a repeated node");
            }
        }
    }
}

// Adds every node and edge of the subgraph to the inventory, unifying on
// (normalized, kind). Idempotent; cost is proportional to the subgraph size.
inline void merge_subgraph(InventoryGraph& inventory, const ProductSubgraph& sub) {
    validate_subgraph(sub);
    inventory.upsert_node(sub.root);
    for (const auto& e : sub.property_edges) {
        inventory.upsert_node(e.to);
        inventory.upsert_edge(e);
    }
    for (const auto& chain : sub.hierarchy_chains) {
        for (size_t i = 1; i < chain.size(); ++i) {
            inventory.upsert_node(chain[i]);
            inventory.upsert_edge({chain[i - 1], chain[i], "is_a", std::nullopt, std::nullopt});
        }
    }
}

// Builds a product subgraph from a validated assignment plus hierarchy label
// paths. Numeric values become "value unit" nodes with the number kept as an
// edge attribute.
inline ProductSubgraph subgraph_from_assignment(const PropertyAssignment& assignment,
                                                const std::vector<std::vector<std::string>>& chains,
                                                const PropertySchema& schema) {
    validate_schema(schema);
    const TypedValue* root_value = assignment.find(schema.root_property.name);
    if (!root_value || root_value->kind != TypedValue::Kind::Text) {
        throw InvalidInput("assignment lacks a text value for the root property");
    }
    ProductSubgraph sub;
    sub.root = NodeKey::make(root_value->text, NodeKind::Product);

    const PropertySpec* anchor = schema.anchor();
    std::optional<NodeKey> anchor_key;

    for (const auto& spec : schema.properties) {
        const TypedValue* v = assignment.find(spec.name);
        if (!v || v->is_absent() || v->kind == TypedValue::Kind::Raw) {
            throw InvalidInput("assignment missing typed value for property " + spec.name);
        }
        std::string display;
        Edge e;
        if (v->is_numeric()) {
            display = util::format_number(v->as_real());
            if (spec.unit) display += " " + *spec.unit;
            e.numeric_value = v->as_real();
            e.unit = spec.unit;
        } else {
            display = v->text;
        }
        e.from = sub.root;
        e.to = NodeKey::make(display, NodeKind::PropertyValue);
        e.label = spec.name;
        if (anchor && spec.name == anchor->name) anchor_key = e.to;
        sub.property_edges.push_back(std::move(e));
    }

    for (const auto& labels : chains) {
        if (labels.size() < 2) {
            throw ChainEndpointMismatch("chain must contain at least product and anchor value");
        }
        if (!anchor_key) {
            throw InvalidInput("schema has no hierarchy anchor but chains were provided");
        }
        NodeKey last = NodeKey::make(labels.back(), NodeKind::PropertyValue);
        if (!(last == *anchor_key)) {
            throw ChainEndpointMismatch("chain ends at \"" + labels.back() +
                                        "\" but the anchor value is \"" + anchor_key->display + "\"");
        }
        std::vector<NodeKey> chain;
        chain.push_back(sub.root);
        for (size_t i = 1; i + 1 < labels.size(); ++i) {
            NodeKey k = NodeKey::make(labels[i], NodeKind::CategoryNode);
            if (!chain.empty() && chain.back() == k) continue;  // dedup adjacent equals
            chain.push_back(std::move(k));
        }
        chain.push_back(*anchor_key);
        sub.hierarchy_chains.push_back(std::move(chain));
    }

    validate_subgraph(sub);
    return sub;
}

// Structural equality on (node keys, edge triples, products); display labels
// are excluded on purpose.
inline bool graph_equal(const InventoryGraph& a, const InventoryGraph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    for (const auto& [id, rec] : a.nodes()) {
        if (!b.nodes().contains(id)) return false;
    }
    std::set<std::string> ea, eb;
    for (const auto& e : a.edges()) ea.insert(e.id());
    for (const auto& e : b.edges()) eb.insert(e.id());
    return ea == eb && a.products() == b.products();
}

}  // namespace ikg
