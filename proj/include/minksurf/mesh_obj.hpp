#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "minksurf/field_io.hpp"
#include "minksurf/solution_types.hpp"

namespace minksurf {

/// One fixed-t cross-section of the embedded hypersurface: the profile
/// curve (r, z)(phi) that sweeps a surface of revolution.
struct RevolutionSlice {
    double t = 0.0;
    std::vector<std::array<double, 2>> rz;
};

/// Triangle mesh of the embedding, v/f records only. Each slice becomes a
/// surface of revolution, closed (watertight) in the angular direction;
/// points with r ~ 0 collapse to a single axis vertex and are fanned.
inline void write_obj(std::ostream& os, std::span<const RevolutionSlice> slices,
                      int n_theta) {
    if (n_theta < 3) throw IoError("write_obj: need at least 3 angular samples");

    double scale = 0.0;
    for (const auto& s : slices)
        for (const auto& rz : s.rz) scale = std::max(scale, std::abs(rz[0]));
    const double collapse_eps = 1e-12 * std::max(scale, 1.0);

    std::vector<std::array<long, 2>> rings;  // {first vertex index, count (1 = axis)}
    long next_index = 1;

    for (const auto& slice : slices) {
        const std::size_t ring_base = rings.size();
        for (const auto& [r, z] : slice.rz) {
            if (r <= collapse_eps) {
                os << "v 0 0 " << format_double(z) << '\n';
                rings.push_back({next_index, 1});
                next_index += 1;
            } else {
                for (int k = 0; k < n_theta; ++k) {
                    const double theta = 2.0 * M_PI * k / n_theta;
                    os << "v " << format_double(r * std::cos(theta)) << ' '
                       << format_double(r * std::sin(theta)) << ' ' << format_double(z)
                       << '\n';
                }
                rings.push_back({next_index, n_theta});
                next_index += n_theta;
            }
        }
        for (std::size_t q = ring_base; q + 1 < rings.size(); ++q) {
            const auto [a0, na] = rings[q];
            const auto [b0, nb] = rings[q + 1];
            if (na == 1 && nb == 1) continue;
            for (int k = 0; k < n_theta; ++k) {
                const int kn = (k + 1) % n_theta;
                if (na == 1) {
                    os << "f " << a0 << ' ' << b0 + k << ' ' << b0 + kn << '\n';
                } else if (nb == 1) {
                    os << "f " << a0 + k << ' ' << b0 << ' ' << a0 + kn << '\n';
                } else {
                    os << "f " << a0 + k << ' ' << b0 + k << ' ' << b0 + kn << '\n';
                    os << "f " << a0 + k << ' ' << b0 + kn << ' ' << a0 + kn << '\n';
                }
            }
        }
    }
}

/// Slices of a sampled physical pair at evenly spaced t rows.
inline std::vector<RevolutionSlice> slices_from_pair(const PhysicalPair& pair,
                                                     int n_slices) {
    if (n_slices < 1) throw IoError("slices_from_pair: need at least one slice");
    const GridDomain& d = pair.domain;
    std::vector<RevolutionSlice> out;
    for (int s = 0; s < n_slices; ++s) {
        const int i = (n_slices == 1)
                          ? 0
                          : static_cast<int>(std::lround(
                                static_cast<double>(s) * (d.count(0) - 1) /
                                (n_slices - 1)));
        RevolutionSlice slice;
        slice.t = d.coord(0, i);
        slice.rz.reserve(static_cast<std::size_t>(d.count(1)));
        for (int j = 0; j < d.count(1); ++j)
            slice.rz.push_back({pair.r(i, j), pair.z(i, j)});
        out.push_back(std::move(slice));
    }
    return out;
}

}  // namespace minksurf
