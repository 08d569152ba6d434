#pragma once

#include <stdexcept>
#include <string>

namespace swarmsteer {

// Document does not conform to a published schema. `field()` is the JSON
// path of the offending member ("zones.r_orientation", "walls[1].min").
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string field, const std::string& detail)
        : std::runtime_error(field + ": " + detail), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace swarmsteer
