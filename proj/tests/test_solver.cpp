#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "privaudio/channel.hpp"
#include "privaudio/errors.hpp"
#include "privaudio/philox.hpp"
#include "privaudio/solver.hpp"

using namespace privaudio;

namespace {

// Test-only dense operator so solver behavior can be checked against Eigen.
class DenseOperator : public LinearOperator {
  public:
    explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
    long in_dim() const override { return m_.cols(); }
    long out_dim() const override { return m_.rows(); }
    void apply(const double* in, double* out) const override {
        Eigen::Map<const Eigen::VectorXd> x(in, m_.cols());
        Eigen::Map<Eigen::VectorXd>(out, m_.rows()) = m_ * x;
    }
    void adjoint(const double* in, double* out) const override {
        Eigen::Map<const Eigen::VectorXd> y(in, m_.rows());
        Eigen::Map<Eigen::VectorXd>(out, m_.cols()) = m_.transpose() * y;
    }
    const Eigen::MatrixXd& matrix() const { return m_; }

  private:
    Eigen::MatrixXd m_;
};

Eigen::MatrixXd random_matrix(long rows, long cols, std::uint64_t seed) {
    Eigen::MatrixXd m(rows, cols);
    std::vector<double> buf(rows * cols);
    Philox(seed).fill_normal(buf.data(), buf.size());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) m(r, c) = buf[r * cols + c];
    }
    return m;
}

std::vector<double> random_vec(long len, std::uint64_t seed) {
    std::vector<double> v(len);
    Philox(seed).fill_normal(v.data(), v.size());
    return v;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

ChannelSet random_channels(int speakers, int listeners, long message_len, long rir_len,
                           std::uint64_t seed) {
    std::vector<std::vector<Signal>> rirs(listeners);
    for (int k = 0; k < listeners; ++k) {
        for (int i = 0; i < speakers; ++i) {
            Signal s = Signal::zeros(rir_len, 16000.0);
            Philox(seed++).fill_normal(s.samples.data(), rir_len);
            rirs[k].push_back(std::move(s));
        }
    }
    return ChannelSet::make(std::move(rirs), message_len);
}

Eigen::MatrixXd dense_channel_matrix(const ChannelSet& set) {
    const ProblemDims& d = set.dims;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d.stacked_message_len(), d.stacked_drive_len());
    for (int k = 0; k < d.listeners; ++k) {
        for (int i = 0; i < d.speakers; ++i) {
            for (long t = 0; t < d.message_len; ++t) {
                for (long tau = 0; tau < d.drive_len; ++tau) {
                    const long lag = t - tau;
                    if (lag >= 0 && lag < d.rir_len) {
                        H(k * d.message_len + t, i * d.drive_len + tau) =
                            set.rirs[k][i].samples[lag];
                    }
                }
            }
        }
    }
    return H;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("identity system solves in one iteration") {
    DenseOperator eye(Eigen::MatrixXd::Identity(20, 20));
    const auto b = random_vec(20, 1);
    const auto [u, report] = cgls(eye, b);
    CHECK(report.converged);
    CHECK(report.iterations == 1);
    for (long t = 0; t < 20; ++t) CHECK(u[t] == doctest::Approx(b[t]).epsilon(1e-12));
}

TEST_CASE("zero right-hand side returns zero immediately") {
    DenseOperator op(random_matrix(12, 8, 2));
    const auto [u, report] = cgls(op, std::vector<double>(12, 0.0));
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    for (double v : u) CHECK(v == 0.0);
}

TEST_CASE("consistent wide system matches the pseudoinverse solution") {
    const Eigen::MatrixXd A = random_matrix(40, 60, 3);
    const Eigen::VectorXd x_any = to_eigen(random_vec(60, 4));
    const Eigen::VectorXd b = A * x_any;

    DenseOperator op(A);
    std::vector<double> bv(b.data(), b.data() + b.size());
    const auto [u, report] = cgls(op, bv, {1e-10, 500});
    CHECK(report.converged);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    const Eigen::VectorXd expected = cod.pseudoInverse() * b;
    CHECK((to_eigen(u) - expected).norm() <= 1e-6 * expected.norm());
}

TEST_CASE("residual norms never increase") {
    DenseOperator op(random_matrix(50, 30, 5));
    const auto b = random_vec(50, 6);
    const auto [u, report] = cgls(op, b, {1e-12, 200});
    REQUIRE(report.residual_history.size() >= 2);
    for (size_t t = 1; t < report.residual_history.size(); ++t) {
        CHECK(report.residual_history[t] <=
              report.residual_history[t - 1] * (1.0 + 1e-12));
    }
}

TEST_CASE("solutions scale with the right-hand side") {
    DenseOperator op(random_matrix(30, 20, 7));
    const auto b = random_vec(30, 8);
    std::vector<double> b3 = b;
    for (double& v : b3) v *= 3.0;
    const auto [u, r1] = cgls(op, b, {1e-10, 200});
    const auto [u3, r2] = cgls(op, b3, {1e-10, 200});
    CHECK((to_eigen(u3) - 3.0 * to_eigen(u)).norm() <= 1e-8 * to_eigen(u3).norm());
}

TEST_CASE("cgls validates inputs") {
    DenseOperator op(random_matrix(10, 5, 9));
    CHECK_THROWS_AS(cgls(op, std::vector<double>(9)), InvalidInput);
    CHECK_THROWS_AS(cgls(op, std::vector<double>(10), {0.0, 100}), InvalidInput);
    CHECK_THROWS_AS(cgls(op, std::vector<double>(10), {1e-6, 0}), InvalidInput);
}

TEST_CASE("delta channel carrier is the truncated target") {
    Signal delta = Signal::zeros(16, 16000.0);
    delta.samples[0] = 1.0;
    const ChannelSet set = ChannelSet::make({{delta}}, 64);

    std::vector<double> y(64, 0.0);
    Philox(10).fill_normal(y.data(), 49);  // support inside the drive window
    const auto [s, report] = least_norm_carrier(set, y, {1e-10, 200});
    CHECK(report.converged);
    for (long t = 0; t < 49; ++t) CHECK(s[t] == doctest::Approx(y[t]).epsilon(1e-8));

    const auto [zero, zreport] = least_norm_carrier(set, std::vector<double>(64, 0.0));
    CHECK(zreport.converged);
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("carrier matches the dense pseudoinverse on a small instance") {
    const ChannelSet set = random_channels(3, 1, 64, 16, 1000);
    const auto y = random_vec(64, 2000);
    const auto [s, report] = least_norm_carrier(set, y, {1e-10, 500});
    CHECK(report.converged);
    CHECK(report.relative_residual <= 1e-10);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(dense_channel_matrix(set));
    const Eigen::VectorXd expected = cod.pseudoInverse() * to_eigen(y);
    CHECK((to_eigen(s) - expected).norm() <= 1e-6 * expected.norm());
}

TEST_CASE("row-space inputs project to nothing; nullspace content survives") {
    const ChannelSet set = random_channels(3, 1, 64, 16, 3000);
    const MimoConvOperator h = MimoConvOperator::channel(set);

    // v in the row space: w must vanish.
    const auto u = random_vec(h.out_dim(), 4000);
    const auto v_row = h.adjoint(u);
    const RowSpaceSplit row = row_space_residual(h, v_row, {1e-10, 500});
    CHECK(row.report.converged);
    CHECK(norm2(row.residual) <= 1e-6 * norm2(v_row));

    // Random v: w matches the dense projector.
    const auto v = random_vec(h.in_dim(), 5000);
    const RowSpaceSplit split = row_space_residual(h, v, {1e-10, 500});
    CHECK(split.report.converged);

    const Eigen::MatrixXd H = dense_channel_matrix(set);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(H);
    const Eigen::VectorXd expected =
        to_eigen(v) - cod.pseudoInverse() * (H * to_eigen(v));
    CHECK((to_eigen(split.residual) - expected).norm() <= 1e-6 * (expected.norm() + 1.0));

    // Idempotence and orthogonality of the split.
    const RowSpaceSplit again = row_space_residual(h, split.residual, {1e-10, 500});
    CHECK((to_eigen(again.residual) - to_eigen(split.residual)).norm() <=
          1e-6 * norm2(split.residual));
    std::vector<double> row_part(v.size());
    for (size_t j = 0; j < v.size(); ++j) row_part[j] = v[j] - split.residual[j];
    CHECK(std::fabs(dot(split.residual, row_part)) <= 1e-6 * dot(v, v));
}

TEST_CASE("square nonsingular channel has a trivial nullspace") {
    Signal delta = Signal::zeros(1, 16000.0);
    delta.samples[0] = 2.0;
    const ChannelSet set = ChannelSet::make({{delta}}, 32);  // drive_len == message_len
    const auto v = random_vec(32, 6000);
    const RowSpaceSplit split = row_space_residual(set, v, {1e-10, 200});
    CHECK(norm2(split.residual) <= 1e-10 * norm2(v));
}

}  // TEST_SUITE
