#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "piheat/heat.hpp"
#include "piheat/mumford.hpp"

namespace piheat {

using json = nlohmann::json;

/// Parsers from the JSON configuration shapes. All throw
/// invalid_input_error on malformed input.
FieldParams parse_field(const json& j);
Rational parse_rational_field(const json& j);
Ball parse_ball(const json& j);
HoledDisc parse_holed_disc(const json& j);
AbstractCovering parse_abstract(const json& j, const FieldParams& fp);

/// A covering given either geometrically ("holed_disc" or "members",
/// compiled on the fly) or directly ("abstract"); "field" is required for
/// the geometric forms.
CompiledCovering parse_covering(const json& j);

UMatrix parse_adjacency(const json& j);
Mobius parse_mobius(const json& j);

/// Full group data: explicit generators + fundamental cover + graph, or
/// the genus-1 shortcut {"tate": {"p","e","f","n"}} (with optional
/// "cutoff").
SchottkyData parse_schottky(const json& j);

/// A rectangular report emitted as CSV (header + rows) or as a JSON array
/// of objects keyed by the header; both byte-deterministic.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_csv() const;
    std::string to_json() const;
};

/// Shortest-round-trip decimal formatting ("%.12g"), locale independent.
std::string format_double(double x);

} // namespace piheat
