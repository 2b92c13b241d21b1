#pragma once

#include <stdexcept>
#include <string>

namespace igd {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// -- corpus --

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& detail)
        : Error("malformed record at line " + std::to_string(line) + ": " + detail),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id) : Error("duplicate sample id: " + id) {}
};

class UnknownTask : public Error {
public:
    explicit UnknownTask(const std::string& value) : Error("unknown task: " + value) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& path) : Error("I/O failure: " + path) {}
};

// -- features --

class EmptyText : public Error {
public:
    EmptyText() : Error("text tokenizes to zero tokens") {}
};

class NoBins : public Error {
public:
    explicit NoBins(const std::string& spec) : Error("feature spec has no bins: " + spec) {}
};

class OracleUnavailable : public Error {
public:
    explicit OracleUnavailable(const std::string& why) : Error("classifier oracle unavailable: " + why) {}
};

class UnparsableVerdict : public Error {
public:
    explicit UnparsableVerdict(const std::string& raw)
        : Error("unparsable oracle verdict: \"" + raw + "\""), raw_(raw) {}
    const std::string& raw() const { return raw_; }

private:
    std::string raw_;
};

class UnknownAnswerClass : public Error {
public:
    UnknownAnswerClass(const std::string& sample_id, const std::string& answer)
        : Error("sample " + sample_id + ": answer \"" + answer +
                "\" matches no configured answer class") {}
};

class ExtractionError : public Error {
public:
    ExtractionError(const std::string& sample_id, const std::string& detail)
        : Error("sample " + sample_id + ": " + detail) {}
};

// -- infogain --

class EmptyTable : public Error {
public:
    EmptyTable() : Error("contingency table has zero total count") {}
};

class MissingFeatureValue : public Error {
public:
    explicit MissingFeatureValue(const std::string& sample_id)
        : Error("sample lacks a feature value: " + sample_id) {}
};

// -- planner --

class Infeasible : public Error {
public:
    Infeasible(int epsilon, int min_feasible_epsilon)
        : Error("no flow assignment balances within epsilon=" + std::to_string(epsilon) +
                "; minimum feasible epsilon is " + std::to_string(min_feasible_epsilon)),
          min_feasible_epsilon_(min_feasible_epsilon) {}
    int min_feasible_epsilon() const { return min_feasible_epsilon_; }

private:
    int min_feasible_epsilon_;
};

class Degenerate : public Error {
public:
    explicit Degenerate(const std::string& feature)
        : Error("feature " + feature +
                " has a single value; any remaining information gain is attributable "
                "to the answer marginal and cannot be intervened on") {}
};

// -- backends --

enum class BackendErrorKind { Timeout, RateLimited, TransportFailure, EmptyCompletion };

class BackendFailure : public Error {
public:
    BackendFailure(BackendErrorKind kind, const std::string& detail)
        : Error("backend failure: " + detail), kind_(kind) {}
    BackendErrorKind kind() const { return kind_; }

private:
    BackendErrorKind kind_;
};

class BackendUnavailable : public Error {
public:
    explicit BackendUnavailable(const std::string& why) : Error("backend unavailable: " + why) {}
};

// -- intervene --

class PlanMismatch : public Error {
public:
    explicit PlanMismatch(const std::string& why) : Error("plan does not match dataset: " + why) {}
};

// -- cli / config --

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& why) : Error("config error: " + why) {}
};

}  // namespace igd
