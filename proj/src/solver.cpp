#include "privaudio/solver.hpp"

#include <cmath>
#include <string>

#include "privaudio/errors.hpp"

namespace privaudio {
namespace {

constexpr int kDivergenceWindow = 50;

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (size_t j = 0; j < y.size(); ++j) y[j] += alpha * x[j];
}

// Shared CGLS iteration. residual_stop selects the convergence metric:
// false -> ||A'(b - A*u)|| / ||A'b|| (least-squares optimality), true ->
// ||b - A*u|| / ||b|| (interpolation quality, for consistent systems).
std::pair<std::vector<double>, SolveReport> cgls_core(const LinearOperator& A,
                                                      const std::vector<double>& b,
                                                      const SolveOptions& opts,
                                                      bool residual_stop, const char* who) {
    if (static_cast<long>(b.size()) != A.out_dim()) {
        throw InvalidInput(std::string(who) + ": right-hand side length mismatch");
    }
    if (!(opts.tol > 0.0)) throw InvalidInput(std::string(who) + ": tolerance must be positive");
    if (opts.max_iter < 1) throw InvalidInput(std::string(who) + ": max_iter must be positive");

    SolveReport report;
    report.tolerance = opts.tol;
    std::vector<double> u(A.in_dim(), 0.0);

    const double norm_b = std::sqrt(dot(b, b));
    if (norm_b == 0.0) {
        report.converged = true;
        return {std::move(u), report};
    }

    std::vector<double> r = b;                // b - A*u
    std::vector<double> s = A.adjoint(r);     // A'r
    std::vector<double> p = s;
    double gamma = dot(s, s);
    const double norm_s0 = std::sqrt(gamma);
    if (norm_s0 == 0.0) {
        // b is orthogonal to range(A): u = 0 already minimizes, but nothing of
        // b is reproducible, so an interpolation caller must see failure.
        report.converged = !residual_stop;
        report.relative_residual = 1.0;
        return {std::move(u), report};
    }

    std::vector<double> q(A.out_dim());
    double prev_res = norm_b;
    int growth_streak = 0;
    for (long t = 1; t <= opts.max_iter; ++t) {
        A.apply(p.data(), q.data());
        const double qq = dot(q, q);
        if (!(qq > 0.0)) break;  // search direction annihilated: stagnate, leave non-converged
        const double alpha = gamma / qq;
        axpy(alpha, p, u);
        axpy(-alpha, q, r);
        A.adjoint(r.data(), s.data());
        const double gamma_next = dot(s, s);

        const double res = std::sqrt(dot(r, r));
        report.residual_history.push_back(res);
        report.iterations = t;
        growth_streak = res > prev_res ? growth_streak + 1 : 0;
        prev_res = res;

        const bool stop = residual_stop ? res / norm_b <= opts.tol
                                        : std::sqrt(gamma_next) / norm_s0 <= opts.tol;
        if (stop) {
            report.converged = true;
            break;
        }
        if (growth_streak >= kDivergenceWindow) break;

        const double beta = gamma_next / gamma;
        gamma = gamma_next;
        for (size_t j = 0; j < p.size(); ++j) p[j] = s[j] + beta * p[j];
    }

    std::vector<double> final_r = b;
    std::vector<double> au(A.out_dim());
    A.apply(u.data(), au.data());
    axpy(-1.0, au, final_r);
    report.relative_residual = std::sqrt(dot(final_r, final_r)) / norm_b;
    A.adjoint(final_r.data(), s.data());
    report.normal_residual = std::sqrt(dot(s, s)) / norm_s0;
    return {std::move(u), report};
}

}  // namespace

std::pair<std::vector<double>, SolveReport> cgls(const LinearOperator& A,
                                                 const std::vector<double>& b,
                                                 const SolveOptions& opts) {
    return cgls_core(A, b, opts, false, "cgls");
}

std::pair<std::vector<double>, SolveReport> least_norm_carrier(const LinearOperator& H,
                                                               const std::vector<double>& y_in,
                                                               const SolveOptions& opts) {
    // CGLS keeps iterates in range(H'), so the answer is minimum-norm without
    // ever forming the Gram operator H*H', whose squared conditioning makes
    // plain CG diverge on reverberant channels.
    return cgls_core(H, y_in, opts, true, "least_norm_carrier");
}

std::pair<std::vector<double>, SolveReport> least_norm_carrier(const ChannelSet& channels,
                                                               const std::vector<double>& y_in,
                                                               const SolveOptions& opts) {
    return least_norm_carrier(MimoConvOperator::channel(channels), y_in, opts);
}

RowSpaceSplit row_space_residual(const LinearOperator& H, const std::vector<double>& v,
                                 const SolveOptions& opts) {
    if (static_cast<long>(v.size()) != H.in_dim()) {
        throw InvalidInput("row_space_residual: input length mismatch");
    }
    // CGLS on H' minimizes ||v - H'z||, and its stop metric ||H(v - H'z)|| /
    // ||Hv|| is exactly the nullspace-membership test for w.
    TransposedOperator ht(H);
    RowSpaceSplit split;
    auto [z, report] = cgls(ht, v, opts);
    split.coeffs = std::move(z);
    split.report = std::move(report);

    std::vector<double> htz(H.in_dim());
    H.adjoint(split.coeffs.data(), htz.data());
    split.residual = v;
    axpy(-1.0, htz, split.residual);
    return split;
}

RowSpaceSplit row_space_residual(const ChannelSet& channels, const std::vector<double>& v,
                                 const SolveOptions& opts) {
    return row_space_residual(MimoConvOperator::channel(channels), v, opts);
}

}  // namespace privaudio
