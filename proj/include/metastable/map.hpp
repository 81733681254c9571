#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "metastable/interval.hpp"

namespace metastable {

/// One affine branch y = slope*x + intercept on its domain. Domains are
/// stored closed; evaluation applies the half-open convention (a point on
/// a join belongs to the branch on its right, the last branch is closed).
struct AffineBranch {
    Interval domain;
    double slope = 0.0;
    double intercept = 0.0;

    double operator()(double x) const { return slope * x + intercept; }
};

/// Piecewise-affine expanding interval map with a declared metastable
/// partition. Branch domains tile the state space; boundary points
/// b_0 < ... < b_m split it into the invariant-at-eps-0 states
/// I_1, ..., I_m. Immutable after construction; safe to share across
/// threads.
class PiecewiseAffineMap {
public:
    PiecewiseAffineMap(Interval state_space,
                       std::vector<AffineBranch> branches,
                       std::vector<double> boundary_points,
                       std::vector<double> fixed_points = {});

    const Interval& state_space() const { return state_space_; }
    const std::vector<AffineBranch>& branches() const { return branches_; }
    const std::vector<double>& boundary_points() const { return boundary_points_; }
    const std::vector<double>& fixed_points() const { return fixed_points_; }

    /// Number of metastable states m.
    std::size_t state_count() const { return boundary_points_.size() - 1; }

    /// The state interval I_{j+1} = [b_j, b_{j+1}] (0-based j).
    Interval state_interval(std::size_t j) const;

    /// State label of x. A point exactly on an interior boundary belongs
    /// to the left interval.
    std::size_t state_of(double x) const;

    /// Evaluate the map. Declared fixed points return themselves; other
    /// points use the unique branch whose half-open domain contains x.
    double eval(double x) const;

    /// Exact preimage of target: disjoint closed intervals, one list entry
    /// per contributing branch, not merged across branches.
    IntervalList preimage(const Interval& target) const;

    /// Exact hole H_{i,j} = I_i intersect T^{-1}(I_j) for i != j, as
    /// per-branch interval pieces (zero-length pieces dropped).
    IntervalList holes(std::size_t i, std::size_t j) const;

    /// H_{i} = union of H_{i,j} over j != i (everything leaving state i).
    IntervalList holes_from(std::size_t i) const;

    /// mu_i(H_{i,j}) for the uniform T^0-invariant density on I_i.
    double hole_measure(std::size_t i, std::size_t j) const;

    /// All branch-domain endpoints plus all hole endpoints; grids aligned
    /// to this set make Ulam entries and hole indicators exact.
    std::vector<double> alignment_points() const;

private:
    std::size_t branch_index(double x) const;

    Interval state_space_;
    std::vector<AffineBranch> branches_;
    std::vector<double> boundary_points_;
    std::vector<double> fixed_points_;
};

/// Parameters of the paired tent family on [-1, 1].
struct PairedTentParams {
    double a = 0.0;
    double b = 0.0;
};

/// Five-branch paired tent map T_{eps*a, eps*b} on [-1, 1] with states
/// I_L = [-1, 0] and I_R = [0, 1]; x = 0 maps to 0.
PiecewiseAffineMap paired_tent_build(const PairedTentParams& params, double eps);

/// Synthetic m-well testbed: unit wells [j-1, j] on [0, m], each carrying
/// a full-branch sawtooth with uniform invariant density; subintervals of
/// length eps*beta[i][j]*symbol_scale are re-routed into the interior of
/// the neighbouring well, so mu_i(H_{i,j}) = eps*beta[i][j]*symbol_scale
/// exactly.
struct MWellSpec {
    std::size_t m = 2;
    double well_slope = 4.0;  // rounded to the integer branch count per well
    std::vector<std::vector<double>> hole_lengths;  // m x m, tridiagonal support
};

PiecewiseAffineMap mwell_build(const MWellSpec& spec, double eps, double symbol_scale = 1.0);

inline std::size_t kStateLeft = 0;
inline std::size_t kStateRight = 1;

}  // namespace metastable
