#pragma once

#include <stdexcept>
#include <string>

namespace ikg {

// Base for all library errors. `code()` is a stable machine-readable tag;
// what() carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// schema
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& m) : Error("InvalidInput", m) {}
};
struct EmptyResult : Error {
    explicit EmptyResult(const std::string& m) : Error("EmptyResult", m) {}
};
struct UnparseableTypeLabel : Error {
    explicit UnparseableTypeLabel(const std::string& m) : Error("UnparseableTypeLabel", m) {}
};
struct EmptyUnit : Error {
    explicit EmptyUnit(const std::string& m) : Error("EmptyUnit", m) {}
};
struct TooFewChoices : Error {
    explicit TooFewChoices(const std::string& m) : Error("TooFewChoices", m) {}
};
struct SchemaParseError : Error {
    explicit SchemaParseError(const std::string& m) : Error("ParseError", m) {}
};
struct SchemaInvariantViolation : Error {
    explicit SchemaInvariantViolation(const std::string& m) : Error("SchemaInvariantViolation", m) {}
};

// constraints
enum class ValidationErrorKind {
    MalformedObject,
    MissingField,
    ExtraField,
    TypeMismatch,
    UnknownChoice,
};

inline const char* to_string(ValidationErrorKind k) {
    switch (k) {
        case ValidationErrorKind::MalformedObject: return "MalformedObject";
        case ValidationErrorKind::MissingField: return "MissingField";
        case ValidationErrorKind::ExtraField: return "ExtraField";
        case ValidationErrorKind::TypeMismatch: return "TypeMismatch";
        case ValidationErrorKind::UnknownChoice: return "UnknownChoice";
    }
    return "?";
}

class ValidationError : public Error {
public:
    ValidationError(ValidationErrorKind kind, std::string field, const std::string& message)
        : Error(to_string(kind), message), kind_(kind), field_(std::move(field)) {}

    ValidationErrorKind kind() const noexcept { return kind_; }
    const std::string& field() const noexcept { return field_; }

private:
    ValidationErrorKind kind_;
    std::string field_;
};

// model_client
struct TransportError : Error {
    explicit TransportError(const std::string& m) : Error("TransportError", m) {}
};
struct ConstraintViolation : Error {
    explicit ConstraintViolation(const std::string& m) : Error("ConstraintViolation", m) {}
};
struct FixtureMiss : Error {
    explicit FixtureMiss(const std::string& m) : Error("FixtureMiss", m) {}
};
struct DuplicateKey : Error {
    explicit DuplicateKey(const std::string& m) : Error("DuplicateKey", m) {}
};

// graph
struct EmptyLabel : Error {
    explicit EmptyLabel(const std::string& m) : Error("EmptyLabel", m) {}
};
struct ChainEndpointMismatch : Error {
    explicit ChainEndpointMismatch(const std::string& m) : Error("ChainEndpointMismatch", m) {}
};

// pipeline
struct EmptyDescription : Error {
    explicit EmptyDescription(const std::string& m) : Error("EmptyDescription", m) {}
};
struct ImageDecodeError : Error {
    explicit ImageDecodeError(const std::string& m) : Error("ImageDecodeError", m) {}
};

// Wraps a failure with the enrollment stage it happened in.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("StageError", "[" + stage + "] " + message), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// eval
struct EmptyPairs : Error {
    explicit EmptyPairs(const std::string& m) : Error("EmptyPairs", m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

// persist
struct DocumentParseError : Error {
    explicit DocumentParseError(const std::string& m) : Error("ParseError", m) {}
};
struct VersionMismatch : Error {
    explicit VersionMismatch(const std::string& m) : Error("VersionMismatch", m) {}
};
struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& m) : Error("InvariantViolation", m) {}
};

}  // namespace ikg
