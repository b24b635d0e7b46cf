#ifndef DSD_ERRORS_HPP
#define DSD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dsd {

/// Full model parameters do not admit the planar reduction.
class reduction_error : public std::runtime_error {
public:
    reduction_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Forcing amplitude at or below the Melnikov threshold: no simple roots.
class no_roots_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton iteration on the k-fold period map did not converge.
class refinement_error : public std::runtime_error {
public:
    refinement_error(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A basin map with a single class code has no boundary to count.
class degenerate_boundary_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dsd

#endif  // DSD_ERRORS_HPP
