#pragma once

#include <stdexcept>
#include <string>

namespace opiniondrift {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on an operation's arguments was violated.
struct InvalidArgument : Error {
    using Error::Error;
};

/// density_bounds: every positive-mass cell is an atom, no density exists.
struct AllAtomic : Error {
    using Error::Error;
};

/// flow_map: total window mass fell below eps_den; the point is off support
/// or the measure has vanished.
struct DegenerateWindow : Error {
    using Error::Error;
};

/// push_forward: mapped edges decreased by more than eps_merge.
struct MonotonicityViolation : Error {
    using Error::Error;
};

/// schedule_at: step index lies beyond the schedule horizon.
struct HorizonExceeded : Error {
    using Error::Error;
};

/// A run hit max_steps before the structural convergence test fired.
struct NotConverged : Error {
    using Error::Error;
};

/// attraction_range: no initial edge lands within tol of the input mean.
struct NoBasin : Error {
    using Error::Error;
};

/// sweep_fit: fewer than three points survived filtering.
struct InsufficientPoints : Error {
    using Error::Error;
};

/// Run-config parsing or validation failure; the message names the field.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace opiniondrift
