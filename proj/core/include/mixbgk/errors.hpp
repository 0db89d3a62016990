#pragma once

#include <stdexcept>
#include <string>

namespace mixbgk {

/// Rejected input: a caller violated a documented precondition.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A spatial cell produced nonpositive mass or temperature.
class degenerate_cell_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Moment targets that no exponential-of-quadratic grid function can match.
class infeasible_target_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time integration aborted (positivity loss or degenerate cell mid-run).
class solver_abort : public std::runtime_error {
public:
    explicit solver_abort(const std::string& msg, double t = -1.0, long step = -1)
        : std::runtime_error(msg), time(t), step_index(step) {}
    double time;
    long step_index;
};

/// Malformed or inadmissible run configuration.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mixbgk
