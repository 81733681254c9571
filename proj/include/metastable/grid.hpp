#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "metastable/interval.hpp"

namespace metastable {

/// Partition of the state space into cells. Alignment points (boundary
/// points, branch endpoints, hole endpoints) are inserted as cell edges so
/// indicator multiplications and Ulam entries are exact.
class Grid {
public:
    Grid(Interval state_space, std::size_t n_cells, const std::vector<double>& align_points);

    const Interval& state_space() const { return state_space_; }
    std::size_t cell_count() const { return edges_.size() - 1; }
    const std::vector<double>& edges() const { return edges_; }

    Interval cell(std::size_t k) const { return {edges_[k], edges_[k + 1]}; }
    double cell_length(std::size_t k) const { return edges_[k + 1] - edges_[k]; }

    /// Cell index containing x; a point on an interior edge belongs to the
    /// cell on its right (the last cell is closed).
    std::size_t locate(double x) const;

    bool has_edge(double x) const;

    /// Cells fully covered by [iv.lo, iv.hi]; iv endpoints must be edges.
    std::pair<std::size_t, std::size_t> cell_range(const Interval& iv) const;

private:
    Interval state_space_;
    std::vector<double> edges_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(Interval state_space, std::size_t n_cells,
                  const std::vector<double>& align_points);

}  // namespace metastable
