#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace urysohn {

/// Input rejected at a configuration or API boundary.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A kernel derivative piece was requested but the kernel does not provide it.
class UnsupportedOperation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Meshes passed to a two-level operation do not nest as required.
class IncompatibleMesh : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The nonlinear iteration hit max_iter without meeting its tolerance.
/// Carries the last iterate so callers can inspect or restart from it.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<double> last_coeffs,
                    double last_update, int iterations)
        : std::runtime_error(what),
          last_coeffs_(std::move(last_coeffs)),
          last_update_(last_update),
          iterations_(iterations) {}

    const std::vector<double>& last_coeffs() const noexcept { return last_coeffs_; }
    double last_update() const noexcept { return last_update_; }
    int iterations() const noexcept { return iterations_; }

private:
    std::vector<double> last_coeffs_;
    double last_update_;
    int iterations_;
};

/// The Newton linearization I - P K'(x) is numerically singular: 1 is close
/// to an eigenvalue of the discrete Frechet derivative.
class SingularLinearization : public std::runtime_error {
public:
    SingularLinearization(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const noexcept { return rcond_; }

private:
    double rcond_;
};

}  // namespace urysohn
