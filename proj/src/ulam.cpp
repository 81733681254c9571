#include "metastable/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace metastable {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_alignment(const PiecewiseAffineMap& map, const Grid& grid) {
    for (const AffineBranch& b : map.branches()) {
        if (!grid.has_edge(b.domain.lo) || !grid.has_edge(b.domain.hi))
            throw std::invalid_argument("grid not aligned to branch endpoints");
    }
}

/// Distribute the image of one domain piece across target cells.
void scatter_piece(const Grid& grid, const Interval& piece, const AffineBranch& branch,
                   double inv_cell_len, UlamOperator::Row& row) {
    Interval image = affine_image(piece, branch.slope, branch.intercept);
    if (image.length() <= 0.0) return;
    const double inv_slope = 1.0 / std::abs(branch.slope);
    std::size_t l = grid.locate(image.lo);
    // walk cells left to right across the image
    while (true) {
        Interval cell = grid.cell(l);
        double overlap = std::min(image.hi, cell.hi) - std::max(image.lo, cell.lo);
        if (overlap > 0.0)
            row.emplace_back(static_cast<std::uint32_t>(l), overlap * inv_slope * inv_cell_len);
        if (cell.hi >= image.hi || l + 1 >= grid.cell_count()) break;
        ++l;
    }
}

void compress_row(UlamOperator::Row& row) {
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (out > 0 && row[out - 1].first == row[i].first)
            row[out - 1].second += row[i].second;
        else
            row[out++] = row[i];
    }
    row.resize(out);
}

}  // namespace

double DensityVector::mass() const {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) s += values[k] * grid->cell_length(k);
    return s;
}

void DensityVector::normalize_mass() {
    double m = mass();
    if (m <= 0.0) throw std::runtime_error("cannot normalize zero-mass density");
    for (double& v : values) v /= m;
}

double DensityVector::l1_distance(const DensityVector& other) const {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k)
        s += std::abs(values[k] - other.values[k]) * grid->cell_length(k);
    return s;
}

double UlamOperator::row_sum(std::size_t k) const {
    double s = 0.0;
    for (const auto& [l, v] : rows_[k]) s += v;
    return s;
}

double UlamOperator::deficiency_mass() const {
    double s = 0.0;
    for (std::size_t k = active_lo_; k < active_hi_; ++k)
        s += (1.0 - row_sum(k)) * grid_->cell_length(k);
    return s;
}

std::vector<double> UlamOperator::apply_mass(std::span<const double> mass) const {
    std::vector<double> out(grid_->cell_count(), 0.0);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        double m = mass[k];
        if (m == 0.0) continue;
        for (const auto& [l, v] : rows_[k]) out[l] += m * v;
    }
    return out;
}

std::vector<double> UlamOperator::apply_functional(std::span<const double> v) const {
    std::vector<double> out(grid_->cell_count(), 0.0);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        double s = 0.0;
        for (const auto& [l, w] : rows_[k]) s += w * v[l];
        out[k] = s;
    }
    return out;
}

UlamOperator UlamOperator::identity(GridPtr grid) {
    UlamOperator op;
    op.grid_ = std::move(grid);
    op.rows_.resize(op.grid_->cell_count());
    op.active_hi_ = op.rows_.size();
    for (std::size_t k = 0; k < op.rows_.size(); ++k)
        op.rows_[k] = {{static_cast<std::uint32_t>(k), 1.0}};
    return op;
}

UlamOperator build_closed(const PiecewiseAffineMap& map, GridPtr grid) {
    check_alignment(map, *grid);
    UlamOperator op;
    op.kind_ = UlamOperator::Kind::closed;
    op.grid_ = grid;
    op.rows_.resize(grid->cell_count());
    op.active_hi_ = grid->cell_count();
    const long long n = static_cast<long long>(grid->cell_count());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n > 4096 && !omp_in_parallel())
#endif
    for (long long kk = 0; kk < n; ++kk) {
        std::size_t k = static_cast<std::size_t>(kk);
        Interval cell = grid->cell(k);
        double inv_len = 1.0 / cell.length();
        UlamOperator::Row& row = op.rows_[k];
        for (const AffineBranch& b : map.branches()) {
            Interval piece = intersect(cell, b.domain);
            if (piece.length() <= 0.0) continue;
            scatter_piece(*grid, piece, b, inv_len, row);
        }
        compress_row(row);
    }
    return op;
}

UlamOperator build_open(const PiecewiseAffineMap& map, std::size_t j, GridPtr grid) {
    check_alignment(map, *grid);
    Interval ij = map.state_interval(j);
    IntervalList domain = complement_within(ij, map.holes_from(j));
    for (const Interval& piece : domain)
        if (!grid->has_edge(piece.lo) || !grid->has_edge(piece.hi))
            throw std::invalid_argument("grid not aligned to hole endpoints");

    UlamOperator op;
    op.kind_ = UlamOperator::Kind::open;
    op.state_ = static_cast<int>(j);
    op.grid_ = grid;
    op.rows_.resize(grid->cell_count());
    auto ij_range = grid->cell_range(ij);
    op.active_lo_ = ij_range.first;
    op.active_hi_ = ij_range.second;
    for (const Interval& piece : domain) {
        auto [c0, c1] = grid->cell_range(piece);
        for (std::size_t k = c0; k < c1; ++k) {
            Interval cell = grid->cell(k);
            double inv_len = 1.0 / cell.length();
            UlamOperator::Row& row = op.rows_[k];
            for (const AffineBranch& b : map.branches()) {
                Interval part = intersect(cell, b.domain);
                if (part.length() <= 0.0) continue;
                scatter_piece(*grid, part, b, inv_len, row);
            }
            compress_row(row);
        }
    }
    return op;
}

UlamOperator compose(std::span<const UlamOperator> ops, GridPtr grid_if_empty) {
    if (ops.empty()) {
        require(grid_if_empty != nullptr, "empty composition needs a grid for the identity");
        return UlamOperator::identity(std::move(grid_if_empty));
    }
    for (std::size_t i = 1; i < ops.size(); ++i)
        require(ops[i].grid()->cell_count() == ops[0].grid()->cell_count(),
                "operator dimensions must agree");
    UlamOperator out = ops[0];
    std::vector<double> accum(out.grid()->cell_count(), 0.0);
    std::vector<std::uint32_t> touched;
    for (std::size_t i = 1; i < ops.size(); ++i) {
        const UlamOperator& b = ops[i];
        for (auto& row : out.rows_) {
            touched.clear();
            for (const auto& [mid, av] : row) {
                for (const auto& [l, bv] : b.rows_[mid]) {
                    if (accum[l] == 0.0) touched.push_back(l);
                    accum[l] += av * bv;
                }
            }
            row.clear();
            for (std::uint32_t l : touched) {
                if (accum[l] != 0.0) row.emplace_back(l, accum[l]);
                accum[l] = 0.0;
            }
            std::sort(row.begin(), row.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
        }
        out.kind_ = (out.kind_ == UlamOperator::Kind::open || b.kind_ == UlamOperator::Kind::open)
                        ? UlamOperator::Kind::open
                        : UlamOperator::Kind::closed;
    }
    return out;
}

OpenCompositionReport open_composition_check(const Environment& env, const FiberPath& path,
                                             std::size_t j, double eps, std::size_t n,
                                             std::size_t base_cells) {
    require(n >= 1, "composition check needs n >= 1");
    auto maps = env.maps_per_symbol(eps);

    // survivor pieces pulled back to time zero:
    // S_i = (T^(i))^{-1}(I_j \ H_{j, fiber i})
    std::vector<IntervalList> pulled(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PiecewiseAffineMap& map_i = maps[path.symbol_at(static_cast<long>(i))];
        IntervalList list =
            complement_within(map_i.state_interval(j), map_i.holes_from(j));
        for (std::size_t t = i; t-- > 0;) {
            const PiecewiseAffineMap& map_t = maps[path.symbol_at(static_cast<long>(t))];
            IntervalList pre;
            for (const Interval& piece : list) {
                IntervalList p = map_t.preimage(piece);
                pre.insert(pre.end(), p.begin(), p.end());
            }
            list = normalize(std::move(pre));
        }
        pulled[i] = std::move(list);
    }

    std::set<double> align;
    for (double p : env.alignment_points(eps)) align.insert(p);
    for (const IntervalList& list : pulled)
        for (const Interval& iv : list) {
            align.insert(iv.lo);
            align.insert(iv.hi);
        }
    GridPtr grid = make_grid(env.state_space(), base_cells,
                             std::vector<double>(align.begin(), align.end()));

    std::vector<UlamOperator> open_ops, closed_ops;
    for (std::size_t i = 0; i < n; ++i) {
        const PiecewiseAffineMap& map_i = maps[path.symbol_at(static_cast<long>(i))];
        open_ops.push_back(build_open(map_i, j, grid));
        closed_ops.push_back(build_closed(map_i, grid));
    }
    UlamOperator open_prod = compose(open_ops);
    UlamOperator closed_prod = compose(closed_ops);

    IntervalList survivor = pulled[0];
    for (std::size_t i = 1; i < n; ++i) survivor = intersect(survivor, pulled[i]);

    OpenCompositionReport report;
    report.survivor_length = total_length(survivor);
    report.survivor_empty = report.survivor_length == 0.0;
    report.refined_cells = grid->cell_count();

    auto in_survivor = [&](std::size_t k) {
        double mid = grid->cell(k).midpoint();
        for (const Interval& iv : survivor)
            if (iv.contains(mid)) return true;
        return false;
    };

    double max_disc = 0.0;
    std::vector<double> dense(grid->cell_count(), 0.0);
    for (std::size_t k = 0; k < grid->cell_count(); ++k) {
        // dense = open row minus masked closed row, scanned entrywise
        for (const auto& [l, v] : open_prod.row(k)) dense[l] = v;
        if (in_survivor(k))
            for (const auto& [l, v] : closed_prod.row(k)) dense[l] -= v;
        for (const auto& ent : open_prod.row(k)) {
            max_disc = std::max(max_disc, std::abs(dense[ent.first]));
            dense[ent.first] = 0.0;
        }
        if (in_survivor(k))
            for (const auto& ent : closed_prod.row(k)) {
                max_disc = std::max(max_disc, std::abs(dense[ent.first]));
                dense[ent.first] = 0.0;
            }
    }
    report.max_discrepancy = max_disc;
    return report;
}

std::size_t default_pullback_depth(double eps) {
    if (eps <= 0.0) return 64;
    double k = std::ceil(40.0 / eps);
    return static_cast<std::size_t>(std::min(k, 1e5));
}

namespace {

DensityVector uniform_on(GridPtr grid, const Interval& support) {
    DensityVector d{grid, std::vector<double>(grid->cell_count(), 0.0)};
    for (std::size_t k = 0; k < grid->cell_count(); ++k) {
        Interval cell = grid->cell(k);
        if (cell.lo >= support.lo && cell.hi <= support.hi)
            d.values[k] = 1.0 / support.length();
    }
    return d;
}

DensityVector tilted_on(GridPtr grid, const Interval& support) {
    DensityVector d{grid, std::vector<double>(grid->cell_count(), 0.0)};
    for (std::size_t k = 0; k < grid->cell_count(); ++k) {
        Interval cell = grid->cell(k);
        if (cell.lo >= support.lo && cell.hi <= support.hi)
            d.values[k] = 0.5 + (cell.midpoint() - support.lo) / support.length();
    }
    d.normalize_mass();
    return d;
}

std::vector<double> to_mass(const DensityVector& d) {
    std::vector<double> m(d.values.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = d.values[k] * d.grid->cell_length(k);
    return m;
}

DensityVector from_mass(GridPtr grid, const std::vector<double>& m) {
    DensityVector d{grid, std::vector<double>(m.size(), 0.0)};
    for (std::size_t k = 0; k < m.size(); ++k) d.values[k] = m[k] / grid->cell_length(k);
    return d;
}

double mass_sum(const std::vector<double>& m) {
    double s = 0.0;
    for (double v : m) s += v;
    return s;
}

/// Least-squares slope of log(gaps) over the decaying stretch.
double fit_decay_rate(const std::vector<double>& gaps) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < gaps.size(); ++i)
        if (gaps[i] > 1e-13 && gaps[i] < 1e-2)
            pts.emplace_back(static_cast<double>(i), std::log(gaps[i]));
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double nn = static_cast<double>(pts.size());
    double denom = nn * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    double slope = (nn * sxy - sx * sy) / denom;
    return std::exp(slope);
}

}  // namespace

SpectralTriple equivariant_triple(const Environment& env, const FiberPath& path,
                                  std::size_t j, double eps, GridPtr grid,
                                  const EquivariantOptions& opts) {
    const std::size_t depth =
        opts.pullback_depth > 0 ? opts.pullback_depth : default_pullback_depth(eps);
    auto maps = env.maps_per_symbol(eps);
    std::vector<UlamOperator> ops;
    ops.reserve(maps.size());
    for (const PiecewiseAffineMap& m : maps) ops.push_back(build_open(m, j, grid));

    const Interval ij = maps[0].state_interval(j);

    FiberPath window = path;
    window.extend(env.alphabet(), -static_cast<long>(depth), static_cast<long>(depth));

    SpectralTriple triple;
    triple.first_fiber = -static_cast<long>(depth);

    // forward push: fibers -depth .. -1
    std::vector<double> mass_a = to_mass(uniform_on(grid, ij));
    std::vector<double> mass_b = to_mass(tilted_on(grid, ij));
    std::vector<double> gaps;
    gaps.reserve(depth);
    for (std::size_t i = 0; i < depth; ++i) {
        long k = -static_cast<long>(depth) + static_cast<long>(i);
        const UlamOperator& op = ops[window.symbol_at(k)];
        std::vector<double> next_a = op.apply_mass(mass_a);
        std::vector<double> next_b = op.apply_mass(mass_b);
        double sum_a = mass_sum(next_a);
        double sum_b = mass_sum(next_b);
        if (sum_a <= 0.0 || sum_b <= 0.0)
            throw std::runtime_error("open cocycle lost all mass during pull-back");
        triple.lambda_seq.push_back(sum_a);
        double gap = 0.0;
        for (std::size_t c = 0; c < next_a.size(); ++c) {
            next_a[c] /= sum_a;
            next_b[c] /= sum_b;
            gap += std::abs(next_a[c] - next_b[c]);
        }
        gaps.push_back(gap);
        mass_a = std::move(next_a);
        mass_b = std::move(next_b);
    }
    triple.final_gap = gaps.back();
    triple.residual_decay = fit_decay_rate(gaps);
    if (triple.final_gap > opts.align_tol)
        throw std::runtime_error("equivariant pull-back did not stabilise within depth " +
                                 std::to_string(depth) +
                                 "; last alignment gap = " + std::to_string(triple.final_gap));
    triple.phi = from_mass(grid, mass_a);

    // backward push for nu: fibers +depth-1 .. 0 via the row action
    std::vector<double> nu_a(grid->cell_count(), 0.0);
    std::vector<double> nu_b(grid->cell_count(), 0.0);
    for (std::size_t k = 0; k < grid->cell_count(); ++k) {
        Interval cell = grid->cell(k);
        if (cell.lo >= ij.lo && cell.hi <= ij.hi) {
            nu_a[k] = 1.0;
            nu_b[k] = 0.5 + (cell.midpoint() - ij.lo) / ij.length();
        }
    }
    for (std::size_t i = depth; i-- > 0;) {
        const UlamOperator& op = ops[window.symbol_at(static_cast<long>(i))];
        nu_a = op.apply_functional(nu_a);
        nu_b = op.apply_functional(nu_b);
        double max_a = *std::max_element(nu_a.begin(), nu_a.end());
        double max_b = *std::max_element(nu_b.begin(), nu_b.end());
        if (max_a <= 0.0 || max_b <= 0.0)
            throw std::runtime_error("conformal functional vanished during pull-back");
        for (std::size_t c = 0; c < nu_a.size(); ++c) {
            nu_a[c] /= max_a;
            nu_b[c] /= max_b;
        }
    }
    // normalise so nu(phi) = 1
    double pairing = 0.0;
    for (std::size_t k = 0; k < nu_a.size(); ++k) pairing += nu_a[k] * mass_a[k];
    if (pairing <= 0.0) throw std::runtime_error("nu(phi) pairing is not positive");
    for (double& v : nu_a) v /= pairing;
    triple.nu = std::move(nu_a);
    return triple;
}

double lambda_window_product(const Environment& env, const FiberPath& path, std::size_t j,
                             double eps, double t, GridPtr grid,
                             const EquivariantOptions& opts) {
    require(t >= 0.0, "window length t must be nonnegative");
    if (t == 0.0) return 1.0;
    require(eps > 0.0, "lambda window product needs eps > 0");
    const std::size_t count = static_cast<std::size_t>(std::floor(t / eps + 1e-9));
    if (count == 0) return 1.0;

    SpectralTriple triple = equivariant_triple(env, path, j, eps, grid, opts);
    auto maps = env.maps_per_symbol(eps);
    std::vector<UlamOperator> ops;
    for (const PiecewiseAffineMap& m : maps) ops.push_back(build_open(m, j, grid));

    FiberPath window = path;
    window.extend(env.alphabet(), 0, static_cast<long>(count));

    std::vector<double> mass = to_mass(triple.phi);
    double product = 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        const UlamOperator& op = ops[window.symbol_at(static_cast<long>(i))];
        std::vector<double> next = op.apply_mass(mass);
        double s = mass_sum(next);
        product *= s;
        if (s <= 0.0) return 0.0;
        for (double& v : next) v /= s;
        mass = std::move(next);
    }
    return product;
}

GridPtr aligned_grid(const Environment& env, double eps, std::size_t n_cells) {
    return make_grid(env.state_space(), n_cells, env.alignment_points(eps));
}

}  // namespace metastable
