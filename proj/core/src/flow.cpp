#include "opiniondrift/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

FlowContext::FlowContext(const OpinionPartition& part,
                         std::optional<TruncatedGaussianInput> input, double r)
    : part_(&part), input_(input), r_(r), table_(part) {
    if (!(r > 0.0)) throw InvalidArgument("flow: requires r > 0");
    const double available = part.total_mass() + (input_ ? input_->weight : 0.0);
    eps_den = 1e-15 * available;
    eps_merge = 1e-12 * part.support().width();
}

double flow_map(const FlowContext& ctx, double x) {
    const double r = ctx.confidence_bound();
    WindowMoments w = ctx.table().window_moments(x - r, x + r);
    if (ctx.input()) {
        const WindowMoments wi = input_window_moments(*ctx.input(), x - r, x + r);
        w.mass += wi.mass;
        w.first_moment += wi.first_moment;
    }
    if (w.mass < ctx.eps_den) {
        throw DegenerateWindow("flow_map: window mass " + std::to_string(w.mass) +
                               " below eps_den at x = " + std::to_string(x));
    }
    return w.first_moment / w.mass;
}

OpinionPartition push_forward(const FlowContext& ctx) {
    const std::vector<double>& edges = ctx.partition().edges();
    std::vector<double> mapped(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        // Coincident edges (atom stacks) map to bit-identical images.
        mapped[i] = (i > 0 && edges[i] == edges[i - 1]) ? mapped[i - 1]
                                                        : flow_map(ctx, edges[i]);
    }

    const double raw_last = mapped.back();
    const double eps = ctx.eps_merge;
    for (std::size_t i = 1; i < mapped.size(); ++i) {
        if (mapped[i] < mapped[i - 1] - eps) {
            throw MonotonicityViolation(
                "push_forward: mapped edge " + std::to_string(i) + " decreased by " +
                std::to_string(mapped[i - 1] - mapped[i]));
        }
        if (mapped[i] != mapped[i - 1] && mapped[i] - mapped[i - 1] < eps) {
            mapped[i] = mapped[i - 1];
        }
    }

    // Fusion may have dragged the right extreme onto an interior stack; lift
    // that stack back to the extreme's raw image (within eps of where it was)
    // so the new support endpoint is exactly the image of the old one.
    if (mapped.back() != raw_last && raw_last >= mapped.back()) {
        const double fused = mapped.back();
        for (std::size_t k = mapped.size(); k-- > 0 && mapped[k] == fused;) {
            mapped[k] = raw_last;
        }
    }

    return OpinionPartition(std::move(mapped),
                            std::vector<double>(ctx.partition().masses()));
}

double BiLipschitzEstimate::certificate() const {
    if (!(l_low > 0.0)) return std::numeric_limits<double>::infinity();
    return std::max({l_high, 1.0 / l_low, 1.0});
}

BiLipschitzEstimate bilipschitz_estimate(const FlowContext& ctx,
                                         std::size_t n_samples,
                                         std::uint64_t rng_seed) {
    if (n_samples < 2) {
        throw InvalidArgument("bilipschitz_estimate: requires n_samples >= 2");
    }
    const Support sup = ctx.partition().support();
    if (!(sup.width() > 0.0)) {
        throw InvalidArgument("bilipschitz_estimate: support has zero width");
    }

    std::vector<double> xs;
    xs.reserve(n_samples + 2);
    xs.push_back(sup.lo);
    xs.push_back(sup.hi);
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> dist(sup.lo, sup.hi);
    for (std::size_t i = 0; i < n_samples; ++i) xs.push_back(dist(rng));
    std::sort(xs.begin(), xs.end());

    BiLipschitzEstimate out;
    out.hypothesis_violated = sup.width() <= 2.0 * ctx.confidence_bound();
    out.l_low = std::numeric_limits<double>::infinity();
    out.l_high = -std::numeric_limits<double>::infinity();

    double prev_x = xs.front();
    double prev_y = flow_map(ctx, prev_x);
    bool any = false;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] == prev_x) continue;
        const double y = flow_map(ctx, xs[i]);
        const double ratio = (y - prev_y) / (xs[i] - prev_x);
        out.l_low = std::min(out.l_low, ratio);
        out.l_high = std::max(out.l_high, ratio);
        prev_x = xs[i];
        prev_y = y;
        any = true;
    }
    if (!any) {
        out.l_low = out.l_high = 0.0;
    }
    return out;
}

}  // namespace opiniondrift
