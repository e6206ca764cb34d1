#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "ctxnet/time.hpp"

namespace ctxnet {

// Raised when a model value would violate one of its construction invariants.
class ModelError : public std::invalid_argument {
public:
    ModelError(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A named Boolean fact with exactly one state and one generation timestamp.
// Names follow the `<predicate>_<argument>` convention (isIn_Kitchen); the
// optional source names the sensor that influenced the state (PIR2).
struct Statement {
    std::string name;
    bool state = false;
    Instant timestamp{};
    std::optional<std::string> source;

    friend bool operator==(const Statement&, const Statement&) = default;
};

// Throws ModelError naming the offending field on an empty name or a
// negative timestamp.
Statement make_statement(std::string name, bool state, Instant timestamp,
                         std::optional<std::string> source = std::nullopt);

// One JSON object per line, keys in schema order:
// {"name":..., "state":..., "t_ms":..., "source":...|null}
std::string to_json_line(const Statement& stmt);
Statement statement_from_json_line(const std::string& line);

}  // namespace ctxnet
