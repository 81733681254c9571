#include "metastable/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace metastable {

Grid::Grid(Interval state_space, std::size_t n_cells, const std::vector<double>& align_points)
    : state_space_(state_space) {
    if (n_cells == 0) throw std::invalid_argument("grid needs at least one cell");
    edges_.reserve(n_cells + 1 + align_points.size());
    const double len = state_space.length();
    for (std::size_t k = 0; k <= n_cells; ++k)
        edges_.push_back(state_space.lo + len * static_cast<double>(k) /
                                              static_cast<double>(n_cells));
    edges_.back() = state_space.hi;
    for (double p : align_points)
        if (p > state_space.lo && p < state_space.hi) edges_.push_back(p);
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

std::size_t Grid::locate(double x) const {
    if (x < state_space_.lo || x > state_space_.hi)
        throw std::invalid_argument("point outside grid");
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    if (it == edges_.begin()) return 0;
    std::size_t idx = static_cast<std::size_t>(it - edges_.begin()) - 1;
    return std::min(idx, cell_count() - 1);
}

bool Grid::has_edge(double x) const {
    return std::binary_search(edges_.begin(), edges_.end(), x);
}

std::pair<std::size_t, std::size_t> Grid::cell_range(const Interval& iv) const {
    if (!has_edge(iv.lo) || !has_edge(iv.hi))
        throw std::invalid_argument("interval endpoints are not grid edges");
    auto lo = std::lower_bound(edges_.begin(), edges_.end(), iv.lo);
    auto hi = std::lower_bound(edges_.begin(), edges_.end(), iv.hi);
    return {static_cast<std::size_t>(lo - edges_.begin()),
            static_cast<std::size_t>(hi - edges_.begin())};
}

GridPtr make_grid(Interval state_space, std::size_t n_cells,
                  const std::vector<double>& align_points) {
    return std::make_shared<Grid>(state_space, n_cells, align_points);
}

}  // namespace metastable
