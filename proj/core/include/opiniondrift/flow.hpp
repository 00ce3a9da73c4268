#pragma once

#include <cstdint>
#include <optional>

#include "opiniondrift/input.hpp"
#include "opiniondrift/measure.hpp"

namespace opiniondrift {

/// Everything needed to evaluate one update step: the current measure, the
/// optional exogenous input, and the confidence bound r. A moment table for
/// the measure is built at construction so flow_map queries are O(log n).
/// The referenced partition must outlive the context.
class FlowContext {
public:
    /// Requires r > 0. eps_den and eps_merge default to
    ///   eps_den   = 1e-15 * (measure mass + input weight)
    ///   eps_merge = 1e-12 * |supp part|
    /// and may be overridden (the run loop pins eps_merge to the initial
    /// support width so the threshold does not drift as the support shrinks).
    FlowContext(const OpinionPartition& part,
                std::optional<TruncatedGaussianInput> input, double r);

    const OpinionPartition& partition() const { return *part_; }
    const std::optional<TruncatedGaussianInput>& input() const { return input_; }
    double confidence_bound() const { return r_; }
    const MomentTable& table() const { return table_; }

    double eps_den = 0.0;
    double eps_merge = 0.0;

private:
    const OpinionPartition* part_;
    std::optional<TruncatedGaussianInput> input_;
    double r_;
    MomentTable table_;
};

/// Weighted average of measure plus input over the confidence window
/// [x - r, x + r]. Pure in (ctx, x); callers evaluate at support points.
/// Throws DegenerateWindow when the combined window mass is below eps_den.
double flow_map(const FlowContext& ctx, double x);

/// Transports every partition edge through flow_map and carries the cell
/// masses over unchanged, so mass is conserved exactly. Mapped edges closer
/// than eps_merge are fused (atom formation); the outermost images are kept
/// exact so the new support endpoints equal the images of the old ones.
/// Throws MonotonicityViolation when mapped edges decrease by more than
/// eps_merge.
OpinionPartition push_forward(const FlowContext& ctx);

struct BiLipschitzEstimate {
    double l_low = 0.0;   ///< smallest sampled difference ratio
    double l_high = 0.0;  ///< largest sampled difference ratio
    bool hypothesis_violated = false;  ///< |supp| <= 2r; ratios may hit zero

    /// L >= 1 such that ratios lie within [1/L, L] on the sample.
    double certificate() const;
};

/// Samples n_samples points of supp(mu) (plus the support endpoints),
/// evaluates the flow map, and returns the extreme difference ratios over
/// consecutive point pairs. Ratios over wider pairs are convex combinations
/// of consecutive ones, so the extremes over all pairs are attained here.
/// Requires n_samples >= 2 and a support of positive width.
BiLipschitzEstimate bilipschitz_estimate(const FlowContext& ctx,
                                         std::size_t n_samples,
                                         std::uint64_t rng_seed);

}  // namespace opiniondrift
