#include "opiniondrift/input.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>
#include <string>

#include "opiniondrift/errors.hpp"

namespace opiniondrift {

namespace {

double normal_pdf(double s) {
    return std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double s) {
    return 0.5 * std::erfc(-s / std::numbers::sqrt2);
}

// Mass of the truncation window in standard-normal units, computed with the
// same expression used for sub-windows so that a full-support query yields
// exactly the input weight.
double truncation_mass() {
    static const double z = normal_cdf(3.0) - normal_cdf(-3.0);
    return z;
}

}  // namespace

double TruncatedGaussianInput::density(double z) const {
    if (z < support_lo() || z > support_hi()) return 0.0;
    const double s = (z - mean) / sigma;
    return weight * normal_pdf(s) / (sigma * truncation_mass());
}

TruncatedGaussianInput make_truncated_gaussian(double mean, double sigma,
                                               double weight) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("make_truncated_gaussian: requires sigma > 0");
    }
    if (!(weight > 0.0)) {
        throw InvalidArgument("make_truncated_gaussian: requires weight > 0");
    }
    return {mean, sigma, weight};
}

WindowMoments input_window_moments(const TruncatedGaussianInput& u, double a,
                                   double b) {
    if (a > b) throw InvalidArgument("input_window_moments: requires a <= b");
    WindowMoments out;
    const double p = std::max(a, u.support_lo());
    const double q = std::min(b, u.support_hi());
    if (q < p) return out;

    const double alpha = (p - u.mean) / u.sigma;
    const double beta = (q - u.mean) / u.sigma;
    const double dcdf = normal_cdf(beta) - normal_cdf(alpha);
    const double scale = u.weight / truncation_mass();
    out.mass = scale * dcdf;
    out.first_moment =
        scale * (u.mean * dcdf + u.sigma * (normal_pdf(alpha) - normal_pdf(beta)));
    return out;
}

bool input_support_contained(const TruncatedGaussianInput& u,
                             const OpinionPartition& part) {
    // Boundary touching counts as contained; allow for the rounding in the
    // 3-sigma endpoint arithmetic.
    const Support sup = part.support();
    const double slack =
        1e-12 * std::max({1.0, std::abs(sup.lo), std::abs(sup.hi)});
    return sup.lo - slack <= u.support_lo() && u.support_hi() <= sup.hi + slack;
}

InputSchedule InputSchedule::none() {
    return InputSchedule{};
}

InputSchedule InputSchedule::constant(TruncatedGaussianInput input) {
    InputSchedule s;
    s.kind_ = Kind::Constant;
    s.constant_ = input;
    return s;
}

InputSchedule InputSchedule::phased(std::vector<InputPhase> phases) {
    if (phases.empty()) {
        throw InvalidArgument("schedule: phased variant needs >= 1 phase");
    }
    long prev = -1;
    for (const InputPhase& ph : phases) {
        if (ph.until_step <= prev) {
            throw InvalidArgument("schedule: until_step must be strictly increasing");
        }
        if (!(ph.sigma > 0.0) || !(ph.weight > 0.0)) {
            throw InvalidArgument("schedule: phase sigma and weight must be > 0");
        }
        prev = ph.until_step;
    }
    InputSchedule s;
    s.kind_ = Kind::Phased;
    s.phases_ = std::move(phases);
    return s;
}

std::optional<TruncatedGaussianInput> InputSchedule::at(
    long t, const Support& current_support) const {
    if (t < 0) throw HorizonExceeded("schedule_at: negative step " + std::to_string(t));
    switch (kind_) {
        case Kind::None:
            return std::nullopt;
        case Kind::Constant:
            return constant_;
        case Kind::Phased:
            break;
    }
    for (const InputPhase& ph : phases_) {
        if (t <= ph.until_step) {
            double mean;
            if (const double* m = std::get_if<double>(&ph.mean)) {
                mean = *m;
            } else {
                mean = current_support.lo + std::get<TrackingMean>(ph.mean).offset;
            }
            return make_truncated_gaussian(mean, ph.sigma, ph.weight);
        }
    }
    throw HorizonExceeded("schedule_at: step " + std::to_string(t) +
                          " beyond horizon " + std::to_string(horizon()));
}

long InputSchedule::horizon() const {
    if (kind_ != Kind::Phased) return LONG_MAX;
    return phases_.back().until_step;
}

long InputSchedule::final_phase_start() const {
    if (kind_ != Kind::Phased || phases_.size() < 2) return 0;
    return phases_[phases_.size() - 2].until_step + 1;
}

std::optional<TruncatedGaussianInput> schedule_at(const InputSchedule& s, long t,
                                                  const Support& current_support) {
    return s.at(t, current_support);
}

}  // namespace opiniondrift
