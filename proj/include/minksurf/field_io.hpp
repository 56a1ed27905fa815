#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "minksurf/grid.hpp"

namespace minksurf {

/// Fixed 17-significant-digit formatting used by every text artifact,
/// so identical runs produce byte-identical files.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json to_json(const GridDomain& d) {
    nlohmann::json axes = nlohmann::json::array();
    for (int a = 0; a < 2; ++a) {
        axes.push_back({{"name", d.axis_name(a)},
                        {"min", d.lower(a)},
                        {"max", d.upper(a)},
                        {"count", d.count(a)}});
    }
    return axes;
}

/// Field as JSON: axes plus a row-major value array (row = first axis).
inline nlohmann::json to_json(const ScalarField& f) {
    nlohmann::json j;
    j["axes"] = to_json(f.domain());
    j["values"] = nlohmann::json::array();
    for (double v : f.values()) j["values"].push_back(v);
    return j;
}

inline GridDomain domain_from_json(const nlohmann::json& axes) {
    if (!axes.is_array() || axes.size() != 2)
        throw IoError("field JSON: expected exactly two axes");
    std::array<std::string, 2> names;
    std::array<double, 2> lo{}, hi{};
    std::array<int, 2> counts{};
    for (int a = 0; a < 2; ++a) {
        const auto& ax = axes[static_cast<std::size_t>(a)];
        names[a] = ax.at("name").get<std::string>();
        lo[a] = ax.at("min").get<double>();
        hi[a] = ax.at("max").get<double>();
        counts[a] = ax.at("count").get<int>();
    }
    return GridDomain::make(names, lo, hi, counts);
}

inline ScalarField field_from_json(const nlohmann::json& j) {
    GridDomain d = domain_from_json(j.at("axes"));
    std::vector<double> values;
    values.reserve(d.size());
    for (const auto& v : j.at("values")) values.push_back(v.get<double>());
    return ScalarField::from_values(std::move(d), std::move(values));
}

/// CSV rows "coord1,coord2,value", one line per node, row-major order.
inline void write_csv(std::ostream& os, const ScalarField& f) {
    os << "coord1,coord2,value\n";
    const GridDomain& d = f.domain();
    for (int i = 0; i < d.count(0); ++i)
        for (int j = 0; j < d.count(1); ++j)
            os << format_double(d.coord(0, i)) << ',' << format_double(d.coord(1, j))
               << ',' << format_double(f(i, j)) << '\n';
}

inline nlohmann::json to_json(const ResidualReport& r) {
    nlohmann::json j{{"equation", r.equation},
                     {"max", r.max_norm},
                     {"l2", r.l2_norm},
                     {"spacing", r.spacing}};
    if (r.order) j["order"] = *r.order;
    return j;
}

}  // namespace minksurf
