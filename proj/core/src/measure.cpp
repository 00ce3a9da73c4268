#include "opiniondrift/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

namespace {

// Contribution of one cell to the closed window [a, b].
void accumulate_cell(double left, double right, double mass, double a,
                     double b, WindowMoments& out) {
    if (mass <= 0.0) return;
    if (right == left) {
        // Atom: counts fully iff its position is inside the closed window.
        if (a <= left && left <= b) {
            out.mass += mass;
            out.first_moment += mass * left;
        }
        return;
    }
    const double p = std::max(left, a);
    const double q = std::min(right, b);
    if (q <= p) return;
    const double frac = (q - p) / (right - left);
    const double m = mass * frac;
    out.mass += m;
    out.first_moment += m * 0.5 * (p + q);
}

}  // namespace

OpinionPartition::OpinionPartition(std::vector<double> edges,
                                   std::vector<double> masses) {
    if (edges.size() != masses.size() + 1 || masses.empty()) {
        throw InvalidArgument("partition: need n+1 edges for n >= 1 cells");
    }
    for (double e : edges) {
        if (!std::isfinite(e)) throw InvalidArgument("partition: non-finite edge");
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i] > edges[i + 1]) {
            throw InvalidArgument("partition: edges must be non-decreasing");
        }
    }
    for (double m : masses) {
        if (!std::isfinite(m) || m < 0.0) {
            throw InvalidArgument("partition: masses must be finite and >= 0");
        }
    }

    std::size_t first = 0;
    std::size_t last = masses.size();  // exclusive
    while (first < last && masses[first] <= 0.0) ++first;
    while (last > first && masses[last - 1] <= 0.0) --last;
    if (first == last) {
        throw InvalidArgument("partition: total mass must be > 0");
    }

    edges_.reserve(last - first + 1);
    masses_.reserve(last - first);
    edges_.push_back(edges[first]);
    for (std::size_t i = first; i < last; ++i) {
        if (masses[i] <= 0.0) continue;  // gap; re-emitted below if it has width
        if (edges[i] > edges_.back()) {
            // collapse the skipped zero-mass run into one gap cell
            edges_.push_back(edges[i]);
            masses_.push_back(0.0);
        }
        edges_.push_back(edges[i + 1]);
        masses_.push_back(masses[i]);
    }

    total_mass_ = std::accumulate(masses_.begin(), masses_.end(), 0.0);
    if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_)) {
        throw InvalidArgument("partition: total mass must be finite and > 0");
    }
}

OpinionPartition OpinionPartition::from_uniform(double lo, double hi,
                                                double total_mass,
                                                std::size_t n_cells) {
    if (!(lo < hi)) throw InvalidArgument("from_uniform: requires lo < hi");
    if (!(total_mass > 0.0)) {
        throw InvalidArgument("from_uniform: requires total_mass > 0");
    }
    if (n_cells == 0) throw InvalidArgument("from_uniform: requires n_cells >= 1");

    std::vector<double> edges(n_cells + 1);
    const double width = hi - lo;
    for (std::size_t i = 0; i <= n_cells; ++i) {
        edges[i] = lo + width * (static_cast<double>(i) / static_cast<double>(n_cells));
    }
    edges.front() = lo;
    edges.back() = hi;
    std::vector<double> masses(n_cells, total_mass / static_cast<double>(n_cells));
    return OpinionPartition(std::move(edges), std::move(masses));
}

WindowMoments window_moments(const OpinionPartition& part, double a, double b) {
    if (a > b) throw InvalidArgument("window_moments: requires a <= b");
    WindowMoments out;
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        accumulate_cell(c.left, c.right, c.mass, a, b, out);
    }
    return out;
}

DensityBounds density_bounds(const OpinionPartition& part) {
    DensityBounds out;
    bool found = false;
    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        if (c.mass <= 0.0) continue;
        if (c.is_atom()) {
            out.has_atoms = true;
            continue;
        }
        const double rho = c.mass / c.width();
        if (!found) {
            out.rho_min = out.rho_max = rho;
            found = true;
        } else {
            out.rho_min = std::min(out.rho_min, rho);
            out.rho_max = std::max(out.rho_max, rho);
        }
    }
    if (!found) {
        throw AllAtomic("density_bounds: all mass is atomic");
    }
    return out;
}

AverageBounds window_average_bounds(double a, double b, double rho_min,
                                    double rho_max) {
    if (!(a < b)) throw InvalidArgument("window_average_bounds: requires a < b");
    if (!(rho_min > 0.0) || !(rho_max >= rho_min) || !std::isfinite(rho_max)) {
        throw InvalidArgument(
            "window_average_bounds: requires 0 < rho_min <= rho_max < inf");
    }
    const double s = std::sqrt(rho_max / rho_min);
    return {(b + a * s) / (1.0 + s), (a + b * s) / (1.0 + s)};
}

ClusterSet extract_clusters(const OpinionPartition& part, double width_tol,
                            double gap_min) {
    if (!(width_tol > 0.0) || !(gap_min > 0.0)) {
        throw InvalidArgument("extract_clusters: tolerances must be > 0");
    }

    struct Group {
        double lo, hi;      // extent of member cells
        double mass;
        double moment;      // mass * midpoint accumulator
    };
    std::vector<Group> groups;
    ClusterSet out;
    bool narrow_gap_ok = true;  // no mid-width background cells seen

    for (std::size_t i = 0; i < part.n_cells(); ++i) {
        const Cell c = part.cell(i);
        if (c.mass <= 0.0) continue;
        if (c.width() > width_tol) {
            // Background cell. A settled inter-cluster bridge is at least
            // gap_min wide; anything narrower is still collapsing.
            out.unclustered_mass += c.mass;
            if (c.width() <= gap_min) narrow_gap_ok = false;
            continue;
        }
        if (!groups.empty() && c.left - groups.back().hi <= width_tol) {
            Group& g = groups.back();
            g.hi = std::max(g.hi, c.right);
            g.mass += c.mass;
            g.moment += c.mass * c.midpoint();
        } else {
            groups.push_back({c.left, c.right, c.mass, c.mass * c.midpoint()});
        }
    }

    out.clusters.reserve(groups.size());
    bool spans_ok = true;
    bool gaps_ok = true;
    for (std::size_t k = 0; k < groups.size(); ++k) {
        const Group& g = groups[k];
        out.clusters.push_back({g.moment / g.mass, g.mass});
        out.clustered_mass += g.mass;
        if (g.hi - g.lo > width_tol) spans_ok = false;
        if (k > 0 && groups[k].lo - groups[k - 1].hi <= gap_min) gaps_ok = false;
    }
    out.converged = !groups.empty() && spans_ok && gaps_ok && narrow_gap_ok;
    return out;
}

MomentTable::MomentTable(const OpinionPartition& part)
    : edges_(part.edges()), masses_(part.masses()) {
    const std::size_t n = masses_.size();
    prefix_mass_.resize(n + 1, 0.0);
    prefix_moment_.resize(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix_mass_[i + 1] = prefix_mass_[i] + masses_[i];
        prefix_moment_[i + 1] =
            prefix_moment_[i] + masses_[i] * 0.5 * (edges_[i] + edges_[i + 1]);
    }
}

WindowMoments MomentTable::window_moments(double a, double b) const {
    if (a > b) throw InvalidArgument("window_moments: requires a <= b");
    WindowMoments out;

    // First cell whose right edge reaches a; cells before it cannot overlap.
    std::size_t i = static_cast<std::size_t>(
        std::lower_bound(edges_.begin() + 1, edges_.end(), a) - (edges_.begin() + 1));
    // One past the last cell whose left edge is at most b.
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(edges_.begin(), edges_.end() - 1, b) - edges_.begin());
    if (i >= j) return out;

    // Head cells straddling a, then tail cells straddling b; the rest is a
    // contiguous run fully inside [a, b], served by the prefix sums.
    while (i < j && edges_[i] < a) {
        accumulate_cell(edges_[i], edges_[i + 1], masses_[i], a, b, out);
        ++i;
    }
    while (j > i && edges_[j] > b) {
        accumulate_cell(edges_[j - 1], edges_[j], masses_[j - 1], a, b, out);
        --j;
    }
    if (i < j) {
        out.mass += prefix_mass_[j] - prefix_mass_[i];
        out.first_moment += prefix_moment_[j] - prefix_moment_[i];
    }
    return out;
}

}  // namespace opiniondrift
