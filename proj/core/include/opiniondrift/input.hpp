#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "opiniondrift/measure.hpp"

namespace opiniondrift {

/// Exogenous input: a Gaussian with mean `mean` and standard deviation
/// `sigma`, truncated to [mean - 3 sigma, mean + 3 sigma] and renormalized so
/// the total mass equals `weight`. The density is
///   d(z) = weight * phi((z - mean) / sigma) / (sigma * Z),  Z = 2 Phi(3) - 1,
/// inside the support and zero outside. Immutable value type.
struct TruncatedGaussianInput {
    double mean = 0.0;
    double sigma = 0.0;
    double weight = 0.0;

    double support_lo() const { return mean - 3.0 * sigma; }
    double support_hi() const { return mean + 3.0 * sigma; }
    double density(double z) const;
};

/// Validates sigma > 0 and weight > 0.
TruncatedGaussianInput make_truncated_gaussian(double mean, double sigma,
                                               double weight);

/// Mass and first moment of the input over the closed window [a, b],
/// closed-form via the Gaussian CDF and the identity  int z phi dz = -phi.
/// The window is clipped to the input support. Rejects a > b.
WindowMoments input_window_moments(const TruncatedGaussianInput& u, double a,
                                   double b);

/// True iff the input support is contained in the support of `part`
/// (closed-set containment; boundary touching counts). A per-step
/// diagnostic, never a hard stop.
bool input_support_contained(const TruncatedGaussianInput& u,
                             const OpinionPartition& part);

/// Phase mean rule that follows the current support from below:
/// mean(t) = x_min(t) + offset.
struct TrackingMean {
    double offset = 0.0;
};

/// One phase of a time-varying input policy; covers steps up to and
/// including until_step.
struct InputPhase {
    long until_step = 0;
    std::variant<double, TrackingMean> mean;
    double sigma = 0.0;
    double weight = 0.0;
};

/// Time-varying input policy. Steps are 1-based: the input applied while
/// producing state t is schedule_at(t). Phase k covers
/// until_step[k-1] < t <= until_step[k] (the first phase starts at t = 0).
class InputSchedule {
public:
    static InputSchedule none();
    static InputSchedule constant(TruncatedGaussianInput input);
    /// Phases must be non-empty with strictly increasing until_step, each
    /// sigma > 0 and weight > 0.
    static InputSchedule phased(std::vector<InputPhase> phases);

    /// Input active at step t, with tracking means resolved against
    /// current_support. Returns nullopt for the none schedule. Throws
    /// HorizonExceeded when t is negative or beyond the last phase.
    std::optional<TruncatedGaussianInput> at(long t,
                                             const Support& current_support) const;

    bool is_none() const { return kind_ == Kind::None; }
    bool is_phased() const { return kind_ == Kind::Phased; }

    /// Last step the schedule covers; unbounded schedules report LONG_MAX.
    long horizon() const;
    /// First step of the final phase (0 for none/constant schedules).
    long final_phase_start() const;

    const std::vector<InputPhase>& phases() const { return phases_; }
    const std::optional<TruncatedGaussianInput>& constant_input() const {
        return constant_;
    }

private:
    enum class Kind { None, Constant, Phased };
    Kind kind_ = Kind::None;
    std::optional<TruncatedGaussianInput> constant_;
    std::vector<InputPhase> phases_;
};

/// Free-function spelling of InputSchedule::at.
std::optional<TruncatedGaussianInput> schedule_at(const InputSchedule& s,
                                                  long t,
                                                  const Support& current_support);

}  // namespace opiniondrift
