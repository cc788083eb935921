#pragma once

#include <stdexcept>
#include <string>

namespace srr {

// Shape or index mismatch between an input and the instance dimensions.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The generator exhausted its retry budget without hitting the activity target.
struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// validate_assumptions was called with no probe points.
struct EmptyProbeSet : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// sigma_min(C) = 0 where a strictly positive value is required.
struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A matrix required to be positive definite failed its factorization or
// eigenvalue check. Signals a violated weight condition or a bad sketch draw.
struct NotPD : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The sketched quadratic form degenerated: zero leverage mass or a
// numerically singular exact form.
struct DegenerateC : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iteration-count prediction called with an unreachable accuracy target.
struct InvalidRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace srr
