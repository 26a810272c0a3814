#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace cloudcontrol {

/// Raised when the configured selection policy cannot rank the equilibrium
/// candidates. The offending prior is attached where known.
class NoSelectionError : public std::runtime_error {
public:
    explicit NoSelectionError(const std::string& reason,
                              std::optional<double> prior = std::nullopt)
        : std::runtime_error(prior ? reason + " (at prior p=" + std::to_string(*prior) + ")"
                                   : reason),
          reason_(reason),
          prior_(prior) {}

    const std::string& reason() const noexcept { return reason_; }
    std::optional<double> prior() const noexcept { return prior_; }

private:
    std::string reason_;
    std::optional<double> prior_;
};

/// Raised when a trajectory leaves the configured state bound, signalling
/// instability or linearization breakdown.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(double time, double norm)
        : std::runtime_error("trajectory diverged at t=" + std::to_string(time) +
                             " (state norm " + std::to_string(norm) + ")"),
          time_(time),
          norm_(norm) {}

    double time() const noexcept { return time_; }
    double norm() const noexcept { return norm_; }

private:
    double time_;
    double norm_;
};

/// Raised on malformed or incomplete scenario files.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cloudcontrol
