// time_grid.hpp: uniform sample grids

#pragma once

#include <cstddef>

#include "ccqed/error.hpp"

namespace ccqed {

struct TimeGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t count = 0;

    double at(std::size_t i) const { return start + step * static_cast<double>(i); }
    double end() const { return count == 0 ? start : at(count - 1); }

    static TimeGrid spanning(double t0, double t1, std::size_t count) {
        detail::require(count >= 2 && t1 > t0, "time grid needs t1 > t0 and at least two samples");
        return {t0, (t1 - t0) / static_cast<double>(count - 1), count};
    }
};

}  // namespace ccqed
