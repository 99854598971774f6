#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ikg/constraints.hpp"
#include "ikg/errors.hpp"
#include "ikg/util.hpp"

namespace ikg {

enum class Role { System, User, Assistant };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

struct ImageAttachment {
    std::vector<uint8_t> bytes;
    std::string mime = "image/x-portable-pixmap";
};

struct ChatTurn {
    Role role = Role::User;
    std::string content;
    std::optional<ImageAttachment> image;
};

struct SamplingOptions {
    double temperature = 0.0;
    std::optional<int> top_k;
    int n_samples = 1;
    std::optional<GenerationConstraint> constraint;
};

struct ChatExchange {
    std::vector<ChatTurn> turns;
    SamplingOptions options;

    ChatExchange& system(std::string text) {
        turns.push_back({Role::System, std::move(text), std::nullopt});
        return *this;
    }
    ChatExchange& user(std::string text, std::optional<ImageAttachment> image = std::nullopt) {
        turns.push_back({Role::User, std::move(text), std::move(image)});
        return *this;
    }
    ChatExchange& assistant(std::string text) {
        turns.push_back({Role::Assistant, std::move(text), std::nullopt});
        return *this;
    }

    void validate() const {
        bool lead = true;
        Role expected = Role::User;
        for (const auto& t : turns) {
            if (t.role == Role::System) {
                if (!lead) throw InvalidInput("system turns only allowed at the start");
                continue;
            }
            lead = false;
            if (t.role != expected) throw InvalidInput("roles must alternate user/assistant");
            if (t.image && t.role != Role::User) {
                throw InvalidInput("images only allowed on user turns");
            }
            expected = expected == Role::User ? Role::Assistant : Role::User;
        }
        if (turns.empty() || turns.back().role != Role::User) {
            throw InvalidInput("exchange must end with a user turn");
        }
        if (options.n_samples < 1) throw InvalidInput("n_samples must be positive");
        if (options.temperature < 0) throw InvalidInput("temperature must be >= 0");
        if (options.constraint && options.n_samples != 1) {
            throw InvalidInput("constrained exchanges must have n_samples = 1");
        }
    }
};

// Canonical JSON of the exchange with image bytes replaced by their content
// hash. This is both the fixture-file payload and the input to the key hash.
inline nlohmann::ordered_json canonical_exchange(const std::string& model_id,
                                                 const ChatExchange& ex) {
    nlohmann::ordered_json j;
    j["model"] = model_id;
    auto& opts = j["options"];
    opts["temperature"] = ex.options.temperature;
    if (ex.options.top_k) opts["top_k"] = *ex.options.top_k;
    opts["n_samples"] = ex.options.n_samples;
    if (ex.options.constraint) opts["constraint"] = ex.options.constraint->rendered_pattern;
    j["turns"] = nlohmann::ordered_json::array();
    for (const auto& t : ex.turns) {
        nlohmann::ordered_json jt;
        jt["role"] = to_string(t.role);
        jt["content"] = t.content;
        if (t.image) {
            jt["image_hash"] = util::content_hash(
                std::string_view(reinterpret_cast<const char*>(t.image->bytes.data()),
                                 t.image->bytes.size()));
        }
        j["turns"].push_back(jt);
    }
    return j;
}

inline std::string fixture_key(const std::string& model_id, const ChatExchange& ex) {
    return util::content_hash(canonical_exchange(model_id, ex).dump());
}

// One file per key under a fixtures directory; in-memory when no directory is
// given. Reads are concurrent, writes serialized.
class FixtureStore {
public:
    FixtureStore() = default;
    explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(*dir_);
    }

    std::optional<std::vector<std::string>> lookup(const std::string& key) const {
        {
            std::shared_lock lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        if (!dir_) return std::nullopt;
        auto path = *dir_ / (key + ".json");
        std::ifstream f(path);
        if (!f) return std::nullopt;
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw DocumentParseError("fixture file " + path.string() + ": " + e.what());
        }
        std::vector<std::string> replies = j.at("replies").get<std::vector<std::string>>();
        std::unique_lock lock(mutex_);
        cache_[key] = replies;
        return replies;
    }

    // Idempotent for identical content; DuplicateKey if the key already maps
    // to different replies.
    std::string put(const std::string& model_id, const ChatExchange& ex,
                    const std::vector<std::string>& replies) {
        if (static_cast<int>(replies.size()) != ex.options.n_samples) {
            throw InvalidInput("reply count must equal n_samples");
        }
        auto canon = canonical_exchange(model_id, ex);
        std::string key = util::content_hash(canon.dump());
        std::unique_lock lock(mutex_);
        if (auto existing = lookup_locked(key); existing && *existing != replies) {
            throw DuplicateKey("fixture key " + key + " already stored with different replies");
        }
        cache_[key] = replies;
        if (dir_) {
            nlohmann::ordered_json j;
            j["key"] = key;
            j["exchange"] = canon;
            j["replies"] = replies;
            std::ofstream f(*dir_ / (key + ".json"));
            f << j.dump(2) << "\n";
        }
        return key;
    }

private:
    std::optional<std::vector<std::string>> lookup_locked(const std::string& key) const {
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        if (!dir_) return std::nullopt;
        std::ifstream f(*dir_ / (key + ".json"));
        if (!f) return std::nullopt;
        nlohmann::json j;
        f >> j;
        return j.at("replies").get<std::vector<std::string>>();
    }

    std::optional<std::filesystem::path> dir_;
    mutable std::shared_mutex mutex_;
    mutable std::map<std::string, std::vector<std::string>> cache_;
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;

    virtual std::string model_id() const = 0;

    // Per-label scores for a scoring-capable backend; nullopt when the
    // backend only supports sampling.
    virtual std::optional<std::vector<double>> score_labels(const ChatExchange&,
                                                            const std::vector<std::string>&) {
        return std::nullopt;
    }

    // Returns n_samples completions. A constrained reply is checked against
    // the rendered pattern here; violating replies are retried once where the
    // backend can produce a fresh answer, then surfaced as ConstraintViolation.
    std::vector<std::string> complete(const ChatExchange& exchange) {
        exchange.validate();
        auto replies = complete_impl(exchange);
        if (exchange.options.constraint) {
            std::regex re(exchange.options.constraint->rendered_pattern);
            if (!std::regex_match(replies.at(0), re)) {
                if (fresh_completion_possible()) {
                    replies = complete_impl(exchange);
                    if (std::regex_match(replies.at(0), re)) return replies;
                }
                throw ConstraintViolation("reply does not match the generation constraint");
            }
        }
        return replies;
    }

protected:
    virtual std::vector<std::string> complete_impl(const ChatExchange& exchange) = 0;
    virtual bool fresh_completion_possible() const { return false; }
};

// Deterministic backend answering from a FixtureStore.
class ReplayBackend : public ModelBackend {
public:
    ReplayBackend(std::shared_ptr<FixtureStore> store, std::string model_id)
        : store_(std::move(store)), model_id_(std::move(model_id)) {}

    std::string model_id() const override { return model_id_; }

    std::shared_ptr<FixtureStore> store() const { return store_; }

    std::string record(const ChatExchange& exchange, const std::vector<std::string>& replies) {
        return store_->put(model_id_, exchange, replies);
    }

    std::string record_scores(const ChatExchange& exchange, const std::vector<std::string>& labels,
                              const std::vector<double>& scores) {
        auto scored = score_exchange(exchange, labels);
        nlohmann::ordered_json j = scores;
        return store_->put(model_id_, scored, {j.dump()});
    }

    std::optional<std::vector<double>> score_labels(const ChatExchange& exchange,
                                                    const std::vector<std::string>& labels) override {
        auto replies = store_->lookup(fixture_key(model_id_, score_exchange(exchange, labels)));
        if (!replies) return std::nullopt;
        return nlohmann::json::parse(replies->at(0)).get<std::vector<double>>();
    }

protected:
    std::vector<std::string> complete_impl(const ChatExchange& exchange) override {
        std::string key = fixture_key(model_id_, exchange);
        auto replies = store_->lookup(key);
        if (!replies) throw FixtureMiss("no fixture for key " + key);
        return *replies;
    }

private:
    // Scoring requests are keyed as a distinct exchange carrying the label
    // list, so they never collide with sampling fixtures.
    static ChatExchange score_exchange(ChatExchange exchange,
                                       const std::vector<std::string>& labels) {
        std::string tag = "[score-labels]";
        for (const auto& l : labels) tag += " " + l;
        exchange.turns.push_back({Role::User, tag, std::nullopt});
        return exchange;
    }

    std::shared_ptr<FixtureStore> store_;
    std::string model_id_;
};

// Chat-completions HTTP client. Request/response shape is the common
// chat-completions JSON protocol; the regex constraint travels in the
// request's `regex` field, which constrained-decoding servers accept.
class HttpBackend : public ModelBackend {
public:
    struct Config {
        std::string host;          // e.g. "localhost"
        int port = 80;
        std::string path = "/v1/chat/completions";
        std::string model;
        std::string api_key_env = "IKG_API_KEY";  // bearer token source
        int timeout_seconds = 120;
    };

    explicit HttpBackend(Config config) : config_(std::move(config)) {}

    std::string model_id() const override { return config_.model; }

    // Exposed so tests can check the request shape without a live server.
    nlohmann::ordered_json build_request(const ChatExchange& ex) const {
        nlohmann::ordered_json req;
        req["model"] = config_.model;
        req["messages"] = nlohmann::ordered_json::array();
        for (const auto& t : ex.turns) {
            nlohmann::ordered_json msg;
            msg["role"] = to_string(t.role);
            if (t.image) {
                auto parts = nlohmann::ordered_json::array();
                parts.push_back({{"type", "text"}, {"text", t.content}});
                parts.push_back(
                    {{"type", "image_url"},
                     {"image_url",
                      {{"url", "data:" + t.image->mime + ";base64," +
                                   util::base64_encode(t.image->bytes)}}}});
                msg["content"] = parts;
            } else {
                msg["content"] = t.content;
            }
            req["messages"].push_back(msg);
        }
        req["temperature"] = ex.options.temperature;
        req["n"] = ex.options.n_samples;
        if (ex.options.top_k) req["top_k"] = *ex.options.top_k;
        if (ex.options.constraint) req["regex"] = ex.options.constraint->rendered_pattern;
        return req;
    }

protected:
    std::vector<std::string> complete_impl(const ChatExchange& exchange) override;
    bool fresh_completion_possible() const override { return true; }

private:
    Config config_;
};

// Pass-through backend that records every completion into a FixtureStore, so
// a real session can later be replayed offline.
class RecordingBackend : public ModelBackend {
public:
    RecordingBackend(std::shared_ptr<ModelBackend> inner, std::shared_ptr<FixtureStore> store)
        : inner_(std::move(inner)), store_(std::move(store)) {}

    std::string model_id() const override { return inner_->model_id(); }

    std::optional<std::vector<double>> score_labels(const ChatExchange& ex,
                                                    const std::vector<std::string>& labels) override {
        return inner_->score_labels(ex, labels);
    }

protected:
    std::vector<std::string> complete_impl(const ChatExchange& exchange) override {
        auto replies = inner_->complete(exchange);
        store_->put(inner_->model_id(), exchange, replies);
        return replies;
    }

private:
    std::shared_ptr<ModelBackend> inner_;
    std::shared_ptr<FixtureStore> store_;
};

inline std::vector<std::string> HttpBackend::complete_impl(const ChatExchange& exchange) {
    auto body = build_request(exchange).dump();
    auto attempt = [&]() -> std::vector<std::string> {
        httplib::Client client(config_.host, config_.port);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_connection_timeout(10, 0);
        httplib::Headers headers;
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        auto res = client.Post(config_.path, headers, body, "application/json");
        if (!res) {
            throw TransportError("request to " + config_.host + " failed: " +
                                 httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw TransportError("server returned status " + std::to_string(res->status));
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw TransportError(std::string("unparseable response body: ") + e.what());
        }
        std::vector<std::string> out;
        for (const auto& choice : j.at("choices")) {
            out.push_back(choice.at("message").at("content").get<std::string>());
        }
        if (static_cast<int>(out.size()) != exchange.options.n_samples) {
            throw TransportError("server returned " + std::to_string(out.size()) +
                                 " choices, expected " + std::to_string(exchange.options.n_samples));
        }
        return out;
    };
    try {
        return attempt();
    } catch (const TransportError&) {
        // one retry with a fresh connection
        return attempt();
    }
}

// Spec-level helper: record replies for an exchange under the given model id.
inline std::string record_fixture(FixtureStore& store, const std::string& model_id,
                                  const ChatExchange& exchange,
                                  const std::vector<std::string>& replies) {
    return store.put(model_id, exchange, replies);
}

}  // namespace ikg
