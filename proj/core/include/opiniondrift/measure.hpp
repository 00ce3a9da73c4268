#pragma once

#include <cstddef>
#include <vector>

namespace opiniondrift {

/// One cell of a piecewise-constant density: the slab [left, right] carrying
/// `mass`. A zero-width cell is an atom sitting at left == right.
struct Cell {
    double left;
    double right;
    double mass;

    double width() const { return right - left; }
    bool is_atom() const { return right == left; }
    double midpoint() const { return 0.5 * (left + right); }
};

/// Mass and first moment of a measure restricted to a window.
struct WindowMoments {
    double mass = 0.0;
    double first_moment = 0.0;

    /// Mass-weighted average position; only meaningful for mass > 0.
    double average() const { return first_moment / mass; }
};

/// Closed interval [lo, hi] spanned by the positive-mass cells.
struct Support {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double lo_other, double hi_other) const {
        return lo <= lo_other && hi_other <= hi;
    }
};

/// A finite nonnegative measure on a bounded opinion interval, stored as
/// sorted cell edges plus one mass per cell. Density is constant within each
/// cell; zero-width cells carry their mass as atoms. Construction normalizes
/// the representation (leading/trailing zero-mass cells trimmed, interior
/// zero-mass runs collapsed to a single gap cell) and validates:
///   - edges non-decreasing, one more edge than masses,
///   - all masses >= 0, all values finite,
///   - total mass > 0.
/// Instances are immutable after construction and safe to share across
/// threads.
class OpinionPartition {
public:
    OpinionPartition(std::vector<double> edges, std::vector<double> masses);

    /// n_cells equal-width cells over [lo, hi], each carrying
    /// total_mass / n_cells. Rejects lo >= hi, total_mass <= 0, n_cells == 0.
    static OpinionPartition from_uniform(double lo, double hi,
                                         double total_mass,
                                         std::size_t n_cells);

    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& masses() const { return masses_; }

    std::size_t n_cells() const { return masses_.size(); }
    Cell cell(std::size_t i) const {
        return {edges_[i], edges_[i + 1], masses_[i]};
    }

    /// Left-to-right sum over the mass vector; the same accumulation order is
    /// used everywhere so conserved totals compare bit-for-bit.
    double total_mass() const { return total_mass_; }

    Support support() const { return {edges_.front(), edges_.back()}; }

private:
    std::vector<double> edges_;   // size n_cells() + 1
    std::vector<double> masses_;  // size n_cells()
    double total_mass_ = 0.0;
};

/// Mass and first moment of `part` restricted to the closed window [a, b].
/// Partial cells contribute proportionally to overlap width (the per-cell
/// moment over [p, q] is density * (q^2 - p^2) / 2); atoms contribute fully
/// iff their position lies in [a, b]. Direct O(n) scan; the reference path
/// that MomentTable is tested against. Rejects a > b.
WindowMoments window_moments(const OpinionPartition& part, double a, double b);

struct DensityBounds {
    double rho_min = 0.0;
    double rho_max = 0.0;
    bool has_atoms = false;  ///< atoms were present and excluded
};

/// Min/max of mass/width over positive-mass, positive-width cells. Throws
/// AllAtomic when no such cell exists.
DensityBounds density_bounds(const OpinionPartition& part);

struct AverageBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Bounds on the mass average over [a, b] for any density with values in
/// [rho_min, rho_max] on the whole window:
///   lower = (b + a*s) / (1 + s),  upper = (a + b*s) / (1 + s),
/// with s = sqrt(rho_max / rho_min). The extremes are attained by step
/// profiles that pile the heavy density against one end, and both bounds lie
/// strictly inside (a, b). Rejects a >= b and non-positive densities.
AverageBounds window_average_bounds(double a, double b, double rho_min,
                                    double rho_max);

struct ClusterMass {
    double position = 0.0;  ///< mass centroid of the group
    double mass = 0.0;
};

struct ClusterSet {
    std::vector<ClusterMass> clusters;  ///< ordered by position
    bool converged = false;
    double clustered_mass = 0.0;
    double unclustered_mass = 0.0;
};

/// Groups narrow positive-mass cells (width <= width_tol) into clusters;
/// consecutive narrow cells separated by at most width_tol join the same
/// group. Positive-mass cells wider than width_tol are inter-cluster
/// background (edge transport leaves one stretched cell across each basin
/// boundary) and are reported as unclustered mass. The result is flagged
/// converged iff there is at least one group, every group spans at most
/// width_tol, every gap between consecutive groups exceeds gap_min, and
/// every unclustered cell is wider than gap_min (anything in between is
/// still collapsing). Empty partitions yield an empty set.
ClusterSet extract_clusters(const OpinionPartition& part, double width_tol,
                            double gap_min);

/// Prefix sums of cell masses and cell first moments, enabling O(log n)
/// window queries. Owns copies of the partition geometry, so it may outlive
/// the partition it was built from.
class MomentTable {
public:
    explicit MomentTable(const OpinionPartition& part);

    /// Same contract as the free window_moments; O(log n + k) where k is the
    /// number of boundary cells touched.
    WindowMoments window_moments(double a, double b) const;

    double total_mass() const { return prefix_mass_.back(); }

private:
    std::vector<double> edges_;
    std::vector<double> masses_;
    std::vector<double> prefix_mass_;    // prefix_mass_[i] = sum of masses_[0..i)
    std::vector<double> prefix_moment_;  // same for mass * cell midpoint
};

}  // namespace opiniondrift
