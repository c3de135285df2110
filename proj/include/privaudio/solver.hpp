#pragma once

#include <utility>
#include <vector>

#include "privaudio/channel.hpp"

namespace privaudio {

struct SolveOptions {
    double tol = 1e-6;
    long max_iter = 2000;
};

struct SolveReport {
    long iterations = 0;
    double relative_residual = 0.0;  // ||b - A*sol|| / ||b||
    double normal_residual = 0.0;    // ||A'(b - A*sol)|| / ||A'b|| (least-squares stop metric)
    bool converged = false;
    double tolerance = 0.0;
    std::vector<double> residual_history;  // ||b - A*u_t|| per iteration
};

/// Conjugate-gradient least squares: minimizes ||b - A*u|| over the Krylov
/// space. Starting from u = 0 keeps every iterate in range(A'), so for a
/// consistent system the converged answer is the minimum-norm solution.
/// Stops when ||A'(b - A*u)|| / ||A'b|| <= tol; 50 consecutive residual
/// increases flag divergence.
std::pair<std::vector<double>, SolveReport> cgls(const LinearOperator& A,
                                                 const std::vector<double>& b,
                                                 const SolveOptions& opts = {});

/// Minimum-norm s with H*s = y_in: CGLS on H from a zero start, which keeps
/// every iterate in range(H') so the converged answer is the minimum-norm
/// interpolant. Stops on ||y_in - H*s|| / ||y_in|| <= tol, the metric that
/// certifies the interpolation itself.
std::pair<std::vector<double>, SolveReport> least_norm_carrier(const LinearOperator& H,
                                                               const std::vector<double>& y_in,
                                                               const SolveOptions& opts = {});
std::pair<std::vector<double>, SolveReport> least_norm_carrier(const ChannelSet& channels,
                                                               const std::vector<double>& y_in,
                                                               const SolveOptions& opts = {});

struct RowSpaceSplit {
    std::vector<double> residual;  // w = v - H'z: the nullspace component of v
    std::vector<double> coeffs;    // z
    SolveReport report;
};

/// Nullspace projection of v against H: w = v - H'z with z chosen by CGLS to
/// minimize ||v - H'z||; on convergence ||H*w|| / ||H*v|| <= tol.
RowSpaceSplit row_space_residual(const LinearOperator& H, const std::vector<double>& v,
                                 const SolveOptions& opts = {});
RowSpaceSplit row_space_residual(const ChannelSet& channels, const std::vector<double>& v,
                                 const SolveOptions& opts = {});

}  // namespace privaudio
