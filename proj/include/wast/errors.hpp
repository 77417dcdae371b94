#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wast {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInput : public Error {
public:
    EmptyInput() : Error("input SQL is empty") {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error("corpus is empty") {}
};

class AllRecordsUnparsable : public Error {
public:
    AllRecordsUnparsable() : Error("no record in the corpus could be parsed") {}
};

class EmptyIndex : public Error {
public:
    EmptyIndex() : Error("index contains no records") {}
};

class EmptySequence : public Error {
public:
    EmptySequence() : Error("feature sequence is empty") {}
};

class DivergedTraining : public Error {
public:
    explicit DivergedTraining(const std::string& what) : Error(what) {}
};

class EmptyTarget : public Error {
public:
    EmptyTarget() : Error("target SQL is empty") {}
};

class BudgetTooSmall : public Error {
public:
    explicit BudgetTooSmall(const std::string& what) : Error(what) {}
};

class EndpointError : public Error {
public:
    EndpointError(const std::string& what, int http_status)
        : Error(what), http_status_(http_status) {}

    int http_status() const { return http_status_; }

private:
    int http_status_;
};

class RetriesExhausted : public Error {
public:
    explicit RetriesExhausted(const std::string& what) : Error(what) {}
};

class MalformedResponse : public Error {
public:
    explicit MalformedResponse(const std::string& what) : Error(what) {}
};

class EmptyGeneration : public Error {
public:
    EmptyGeneration() : Error("nothing left after postprocessing the generation") {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class CorruptIndex : public Error {
public:
    explicit CorruptIndex(const std::string& what) : Error(what) {}
};

}  // namespace wast
