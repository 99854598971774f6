#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ikg/constraints.hpp"
#include "ikg/errors.hpp"
#include "ikg/graph.hpp"
#include "ikg/image.hpp"
#include "ikg/model_client.hpp"
#include "ikg/prompts.hpp"
#include "ikg/schema.hpp"
#include "ikg/util.hpp"

namespace ikg {

inline constexpr int kImageSize = 448;

enum class EnrollMode { Full, NoReasoning, NoMultiTurn, BaselineZeroShot, BaselineSchema };

inline const char* to_string(EnrollMode m) {
    switch (m) {
        case EnrollMode::Full: return "ours";
        case EnrollMode::NoReasoning: return "ours w/o reasoning";
        case EnrollMode::NoMultiTurn: return "ours w/o multi-turn";
        case EnrollMode::BaselineZeroShot: return "Baseline (zero-shot)";
        case EnrollMode::BaselineSchema: return "Baseline w/ schema";
    }
    return "?";
}

inline std::optional<EnrollMode> enroll_mode_from_string(std::string_view s) {
    if (s == "full" || s == "ours") return EnrollMode::Full;
    if (s == "no-reasoning") return EnrollMode::NoReasoning;
    if (s == "no-multi-turn") return EnrollMode::NoMultiTurn;
    if (s == "baseline") return EnrollMode::BaselineZeroShot;
    if (s == "baseline-schema") return EnrollMode::BaselineSchema;
    return std::nullopt;
}

struct EnrollmentConfig {
    EnrollMode mode = EnrollMode::Full;
    int expansion_depth = 2;
    int expansion_parallel = 3;
    double temperature_extract = 0.2;
    double temperature_reason = 0.2;
    double temperature_constrained = 0.0;
    double temperature_expansion = 0.8;
    static constexpr int kConstraintRetries = 1;

    void validate() const {
        if (expansion_depth < 1) throw ConfigError("expansion_depth must be >= 1");
        if (expansion_parallel < 1) throw ConfigError("expansion_parallel must be >= 1");
    }
};

struct StageTranscript {
    std::string stage;
    nlohmann::ordered_json exchange;  // canonical form, image bytes hashed
    std::vector<std::string> replies;
    double seconds = 0.0;
};

// Everything needed to re-export the product subgraph without touching a
// backend again.
struct EnrollmentRecord {
    std::string image_ref;
    std::string image_hash;
    std::vector<StageTranscript> transcripts;
    PropertyAssignment assignment;
    std::vector<std::vector<std::string>> chains;
    int constraint_retries = 0;
    EnrollmentConfig config;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["image_ref"] = image_ref;
        j["image_hash"] = image_hash;
        j["mode"] = to_string(config.mode);
        j["prompt_version"] = prompts::kVersion;
        j["constraint_retries"] = constraint_retries;
        j["assignment"] = nlohmann::ordered_json::object();
        for (const auto& e : assignment.entries) {
            switch (e.value.kind) {
                case TypedValue::Kind::Int: j["assignment"][e.name] = e.value.int_value; break;
                case TypedValue::Kind::Real: j["assignment"][e.name] = e.value.real_value; break;
                case TypedValue::Kind::Text:
                case TypedValue::Kind::Raw: j["assignment"][e.name] = e.value.text; break;
                case TypedValue::Kind::Absent: j["assignment"][e.name] = nullptr; break;
            }
        }
        j["chains"] = chains;
        j["stages"] = nlohmann::ordered_json::array();
        for (const auto& t : transcripts) {
            j["stages"].push_back({{"stage", t.stage},
                                   {"seconds", t.seconds},
                                   {"exchange", t.exchange},
                                   {"replies", t.replies}});
        }
        return j;
    }
};

struct Backends {
    std::shared_ptr<ModelBackend> vlm;
    std::shared_ptr<ModelBackend> llm;
};

class Pipeline {
public:
    Pipeline(PropertySchema schema, Backends backends, EnrollmentConfig config = {})
        : schema_(std::move(schema)),
          backends_(std::move(backends)),
          config_(config),
          schema_text_(schema_prompt_text(schema_)),
          constraint_(compile_constraint(schema_)) {
        config_.validate();
    }

    const PropertySchema& schema() const { return schema_; }
    const EnrollmentConfig& config() const { return config_; }

    // Resizes to 448x448 and asks the VLM for one description, plus a
    // follow-up turn when multi_turn is on.
    std::vector<std::string> extract(const std::vector<uint8_t>& image_bytes, bool multi_turn,
                                     EnrollmentRecord* rec = nullptr) {
        ImageAttachment attachment = prepare_image(image_bytes);
        ChatExchange ex;
        ex.user(prompts::extract_turn1(schema_text_), attachment);
        ex.options.temperature = config_.temperature_extract;

        std::vector<std::string> descriptions;
        std::string reply = timed_complete(*backends_.vlm, ex, "extract", rec);
        if (util::trim(reply).empty()) throw EmptyDescription("empty reply in extract turn 1");
        descriptions.push_back(reply);
        if (multi_turn) {
            ex.assistant(reply).user(prompts::extract_turn2());
            std::string reply2 = timed_complete(*backends_.vlm, ex, "extract", rec);
            if (util::trim(reply2).empty()) throw EmptyDescription("empty reply in extract turn 2");
            descriptions.push_back(reply2);
        }
        return descriptions;
    }

    // LLM turn(s) producing a schema-valid assignment. With reasoning on, a
    // free-form analysis turn precedes the constrained one. One retry with
    // the error text appended, then failure.
    std::pair<PropertyAssignment, std::string> format_and_infer(
        const std::vector<std::string>& descriptions, bool with_reasoning,
        EnrollmentRecord* rec = nullptr) {
        if (descriptions.empty() || util::trim(descriptions.front()).empty()) {
            throw InvalidInput("format_and_infer needs at least one non-empty description");
        }
        ChatExchange ex;
        std::string reasoning;
        if (with_reasoning) {
            ex.user(prompts::reasoning_request(descriptions, schema_text_));
            ex.options.temperature = config_.temperature_reason;
            reasoning = timed_complete(*backends_.llm, ex, "reason", rec);
            ex.assistant(reasoning).user(prompts::constrained_request(schema_text_));
        } else {
            ex.user(prompts::constrained_only_request(descriptions, schema_text_));
        }
        ex.options.temperature = config_.temperature_constrained;
        ex.options.constraint = constraint_;

        std::string raw;
        std::string error_text;
        try {
            raw = timed_complete(*backends_.llm, ex, "format", rec);
            return {validate_output(raw, schema_), reasoning};
        } catch (const ConstraintViolation& e) {
            error_text = e.what();
        } catch (const ValidationError& e) {
            error_text = e.what();
        }
        if (rec) rec->constraint_retries++;
        ex.assistant(raw);  // empty when the constrained call itself failed
        ex.user(prompts::constrained_retry(error_text));
        raw = timed_complete(*backends_.llm, ex, "format", rec);
        return {validate_output(raw, schema_), reasoning};
    }

    // Up to k hierarchy chains from the product to its anchor category value.
    // Each chain grows by inserting one intermediate per step next to the
    // product; proposals equal to an existing chain member are skipped.
    std::vector<std::vector<std::string>> expand_hierarchy(const std::string& product_name,
                                                           const std::string& anchor_value,
                                                           EnrollmentRecord* rec = nullptr) {
        const PropertySpec* anchor = schema_.anchor();
        if (!anchor) throw ConfigError("schema has no hierarchy anchor");
        bool member = false;
        for (const auto& c : anchor->data_type.choices) {
            if (util::iequals(c, anchor_value)) member = true;
        }
        if (!member) {
            throw InvalidInput("anchor value \"" + anchor_value +
                               "\" is not one of the anchor's choices");
        }
        const int k = config_.expansion_parallel;

        auto chain_member = [](const std::vector<std::string>& chain, const std::string& label) {
            std::string norm = normalize_label(label);
            for (const auto& c : chain) {
                if (normalize_label(c) == norm) return true;
            }
            return false;
        };
        auto propose = [&](const std::string& innermost, int n) -> std::vector<std::string> {
            ChatExchange ex;
            ex.user(prompts::expansion(product_name, innermost));
            ex.options.temperature = config_.temperature_expansion;
            ex.options.n_samples = n;
            ex.options.top_k = k;
            return timed_complete_all(*backends_.llm, ex, "expand", rec);
        };
        auto clean = [](const std::string& reply) -> std::string {
            std::string label = util::trim(reply);
            if (auto nl = label.find('\n'); nl != std::string::npos) {
                label = util::trim(label.substr(0, nl));
            }
            return label;
        };

        // step 1: one k-sample call fans out into parallel chains
        std::vector<std::vector<std::string>> chains;
        for (const auto& reply : propose(anchor_value, k)) {
            std::string label = clean(reply);
            if (label.empty()) continue;
            std::vector<std::string> chain = {product_name, anchor_value};
            if (chain_member(chain, label)) continue;
            chain = {product_name, label, anchor_value};
            bool dup = false;
            for (const auto& existing : chains) {
                if (existing.size() == 3 &&
                    normalize_label(existing[1]) == normalize_label(label)) {
                    dup = true;
                }
            }
            if (!dup) chains.push_back(std::move(chain));
        }
        if (chains.empty()) chains.push_back({product_name, anchor_value});

        // remaining steps grow each chain independently
        for (auto& chain : chains) {
            for (int step = 1; step < config_.expansion_depth; ++step) {
                std::string innermost = chain.size() > 2 ? chain[1] : chain.back();
                std::string label = clean(propose(innermost, 1).at(0));
                if (label.empty() || chain_member(chain, label)) continue;
                chain.insert(chain.begin() + 1, label);
            }
        }

        // final dedup on normalized node sequences
        std::vector<std::vector<std::string>> out;
        std::set<std::string> seen;
        for (auto& chain : chains) {
            std::string sig;
            for (const auto& c : chain) sig += normalize_label(c) + "\x1f";
            if (seen.insert(sig).second) out.push_back(std::move(chain));
        }
        return out;
    }

    // The four-step cycle: extract, format+infer, expand, merge. The
    // inventory is only touched by the final merge, so any stage failure
    // leaves it unchanged.
    EnrollmentRecord enroll(const std::vector<uint8_t>& image_bytes, InventoryGraph& inventory,
                            const std::string& image_ref = "") {
        auto [rec, sub] = run_cycle(image_bytes, image_ref);
        merge_subgraph(inventory, sub);
        return rec;
    }

    // The backend-facing part of enroll, without the merge. Lets callers run
    // several products concurrently and funnel merges through one writer.
    std::pair<EnrollmentRecord, ProductSubgraph> run_cycle(const std::vector<uint8_t>& image_bytes,
                                                           const std::string& image_ref = "") {
        if (config_.mode == EnrollMode::BaselineZeroShot ||
            config_.mode == EnrollMode::BaselineSchema) {
            throw ConfigError("baseline modes do not enroll into the graph");
        }
        EnrollmentRecord rec;
        rec.image_ref = image_ref;
        rec.config = config_;
        Image img = Image::decode(image_bytes);  // fails before any backend call
        {
            auto resized = img.resized(kImageSize, kImageSize).encode_ppm();
            rec.image_hash = util::content_hash(std::string_view(
                reinterpret_cast<const char*>(resized.data()), resized.size()));
        }

        auto stage = [&](const char* name, auto&& fn) {
            try {
                return fn();
            } catch (const Error& e) {
                throw StageError(name, e.what());
            }
        };
        auto descriptions = stage("extract", [&] {
            return extract(image_bytes, config_.mode != EnrollMode::NoMultiTurn, &rec);
        });
        auto [assignment, reasoning] = stage("format", [&] {
            return format_and_infer(descriptions, config_.mode != EnrollMode::NoReasoning, &rec);
        });
        rec.assignment = assignment;

        ProductSubgraph sub = stage("build", [&] {
            const TypedValue* name = assignment.find(schema_.root_property.name);
            const PropertySpec* anchor = schema_.anchor();
            std::vector<std::vector<std::string>> chains;
            if (anchor) {
                const TypedValue* anchor_value = assignment.find(anchor->name);
                chains = expand_hierarchy(name->text, anchor_value->text, &rec);
            }
            rec.chains = chains;
            return subgraph_from_assignment(assignment, chains, schema_);
        });
        return {std::move(rec), std::move(sub)};
    }

    // Text-description input path: same cycle minus the extract stage.
    EnrollmentRecord enroll_text(const std::vector<std::string>& descriptions,
                                 InventoryGraph& inventory, const std::string& ref = "") {
        EnrollmentRecord rec;
        rec.image_ref = ref;
        rec.config = config_;
        auto [assignment, reasoning] =
            format_and_infer(descriptions, config_.mode != EnrollMode::NoReasoning, &rec);
        rec.assignment = assignment;
        const TypedValue* name = assignment.find(schema_.root_property.name);
        std::vector<std::vector<std::string>> chains;
        if (const PropertySpec* anchor = schema_.anchor()) {
            chains = expand_hierarchy(name->text, assignment.find(anchor->name)->text, &rec);
        }
        rec.chains = chains;
        merge_subgraph(inventory, subgraph_from_assignment(assignment, chains, schema_));
        return rec;
    }

    // Single-call triple baseline: one VLM request producing free-form
    // triples, parsed leniently so wrong values stay present for scoring.
    PropertyAssignment baseline_extract(const std::vector<uint8_t>& image_bytes,
                                        bool with_schema_prompt, EnrollmentRecord* rec = nullptr) {
        ImageAttachment attachment = prepare_image(image_bytes);
        std::vector<std::string> predicates;
        for (const auto& p : schema_.properties) predicates.push_back(p.name);

        ChatExchange ex;
        ex.user(prompts::baseline_triples(predicates, schema_text_, with_schema_prompt),
                attachment);
        ex.options.temperature = config_.temperature_extract;
        std::string reply = timed_complete(*backends_.vlm, ex, "baseline", rec);
        if (util::trim(reply).empty()) throw EmptyDescription("empty baseline reply");

        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& line : util::split(reply, '\n')) {
            auto parts = util::split(line, '|');
            if (parts.size() < 3) continue;
            std::string subject = util::trim(parts[0]);
            std::string predicate = util::trim(parts[1]);
            std::string object = util::trim(parts[2]);
            for (size_t i = 3; i < parts.size(); ++i) object += "|" + parts[i];
            if (subject.empty() || predicate.empty() || object.empty()) continue;
            if (!obj.contains(schema_.root_property.name)) {
                obj[schema_.root_property.name] = subject;
            }
            const PropertySpec* spec = schema_.find(predicate);
            if (!spec || obj.contains(spec->name)) continue;
            if (spec->data_type.is_numeric()) {
                try {
                    size_t used = 0;
                    double v = std::stod(object, &used);
                    if (used == object.size()) {
                        obj[spec->name] = v;
                    } else {
                        obj[spec->name] = object;  // kept raw, scored as-is
                    }
                } catch (const std::exception&) {
                    obj[spec->name] = object;
                }
            } else {
                obj[spec->name] = object;
            }
        }
        return validate_output(obj.dump(), schema_, /*lenient=*/true);
    }

private:
    ImageAttachment prepare_image(const std::vector<uint8_t>& image_bytes) const {
        Image img = Image::decode(image_bytes);
        ImageAttachment attachment;
        attachment.bytes = img.resized(kImageSize, kImageSize).encode_ppm();
        return attachment;
    }

    std::string timed_complete(ModelBackend& backend, const ChatExchange& ex, const char* stage,
                               EnrollmentRecord* rec) {
        return timed_complete_all(backend, ex, stage, rec).at(0);
    }

    std::vector<std::string> timed_complete_all(ModelBackend& backend, const ChatExchange& ex,
                                                const char* stage, EnrollmentRecord* rec) {
        auto t0 = std::chrono::steady_clock::now();
        auto replies = backend.complete(ex);
        auto t1 = std::chrono::steady_clock::now();
        if (rec) {
            rec->transcripts.push_back(
                {stage, canonical_exchange(backend.model_id(), ex), replies,
                 std::chrono::duration<double>(t1 - t0).count()});
        }
        return replies;
    }

    PropertySchema schema_;
    Backends backends_;
    EnrollmentConfig config_;
    std::string schema_text_;
    GenerationConstraint constraint_;
};

}  // namespace ikg
