#pragma once

#include <stdexcept>
#include <string>

namespace moeval {

// Base for all domain errors raised by the library. Each failure category
// named in the module contracts gets its own type so callers and tests can
// discriminate without parsing messages.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Corpus and labeling failures.
class LabelingInputError : public Error { using Error::Error; };
class NormalizationError : public Error { using Error::Error; };
class PoolError : public Error { using Error::Error; };
class CorpusError : public Error { using Error::Error; };

// Trial generation failures.
class CapacityError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };

// Prompt rendering failures.
class FixtureError : public Error { using Error::Error; };

// Responder failures.
class TransportError : public Error { using Error::Error; };
class MissingRecordError : public Error { using Error::Error; };

// Metric computation failures.
class AggregationError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };
class SampleSizeError : public Error { using Error::Error; };
class DegenerateDistributionError : public Error { using Error::Error; };

// Harness failures.
class ConfigError : public Error { using Error::Error; };
class ManifestMismatchError : public Error { using Error::Error; };

}  // namespace moeval
