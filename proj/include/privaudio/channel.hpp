#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "privaudio/signal.hpp"

namespace privaudio {

/// Per-listener half-open output windows [start, end); rows outside are
/// excluded from an operator's range (forced to zero).
using RowWindows = std::vector<std::pair<long, long>>;

/// K×L grid of room impulse responses: rirs[k][i] is the path from speaker i
/// to listener k. All entries share length (dims.rir_len) and sample rate.
struct ChannelSet {
    std::vector<std::vector<Signal>> rirs;
    ProblemDims dims;

    static ChannelSet make(std::vector<std::vector<Signal>> rirs, long message_len);
    double sample_rate_hz() const;
    void validate() const;
};

/// L reproducible noise signals, entries i.i.d. normal(0, std_dev^2). Speaker
/// i draws from an independent counter stream of the same seed, so banks of
/// different lengths or scales agree on their common prefix.
struct NoiseBank {
    std::vector<Signal> noises;
    double std_dev = 1.0;
    std::uint64_t seed = 0;

    static NoiseBank generate(int speakers, long noise_len, double std_dev, std::uint64_t seed,
                              double sample_rate_hz);
};

/// Matrix-free linear map; implementations supply apply and its exact adjoint.
class LinearOperator {
  public:
    virtual ~LinearOperator() = default;
    virtual long in_dim() const = 0;
    virtual long out_dim() const = 0;
    virtual void apply(const double* in, double* out) const = 0;
    virtual void adjoint(const double* in, double* out) const = 0;

    std::vector<double> apply(const std::vector<double>& in) const;
    std::vector<double> adjoint(const std::vector<double>& in) const;
};

/// View of another operator with apply and adjoint exchanged.
class TransposedOperator : public LinearOperator {
  public:
    explicit TransposedOperator(const LinearOperator& base) : base_(base) {}
    using LinearOperator::adjoint;
    using LinearOperator::apply;
    long in_dim() const override { return base_.out_dim(); }
    long out_dim() const override { return base_.in_dim(); }
    void apply(const double* in, double* out) const override { base_.adjoint(in, out); }
    void adjoint(const double* in, double* out) const override { base_.apply(in, out); }

  private:
    const LinearOperator& base_;
};

/// Block-Toeplitz MIMO convolution: input is L stacked blocks of in_block_len
/// samples, output is K stacked blocks of out_block_len samples, and block k
/// of the output is sum_i kernel[k][i] * input_i truncated to out_block_len.
/// Optional row windows restrict each output block to [start, end): apply
/// zeroes rows outside, adjoint ignores them, so the pair stays exact.
/// Apply and adjoint run via cached-kernel FFTs; the dense matrix never
/// exists. Immutable after construction, so calls are re-entrant.
class MimoConvOperator : public LinearOperator {
  public:
    MimoConvOperator(std::vector<std::vector<std::vector<double>>> kernels, long in_block_len,
                     long out_block_len, RowWindows row_windows = {});

    /// H: drives (L blocks of drive_len) -> received messages (K blocks of
    /// message_len); kernels are the RIRs.
    static MimoConvOperator channel(const ChannelSet& channels, RowWindows row_windows = {});

    /// HN for the filter-design problem: filters (L blocks of filter_len) ->
    /// received messages; kernel (k,i) is rir[k][i] * noise[i].
    static MimoConvOperator filtered(const ChannelSet& channels, const NoiseBank& bank,
                                     RowWindows row_windows = {});

    using LinearOperator::adjoint;
    using LinearOperator::apply;
    long in_dim() const override { return speakers_ * in_block_; }
    long out_dim() const override { return listeners_ * out_block_; }
    void apply(const double* in, double* out) const override;
    void adjoint(const double* in, double* out) const override;

    int speakers() const { return speakers_; }
    int listeners() const { return listeners_; }
    long in_block_len() const { return in_block_; }
    long out_block_len() const { return out_block_; }
    const RowWindows& row_windows() const { return windows_; }

  private:
    int speakers_;
    int listeners_;
    long in_block_;
    long out_block_;
    long fft_len_;
    long spec_len_;
    RowWindows windows_;  // empty: every row of every block is in range
    // spectra_[k * speakers_ + i]: kernel (k,i) transformed at fft_len_.
    std::vector<std::vector<std::complex<double>>> spectra_;
};

struct ConditionCheck {
    bool pass = false;
    long margin = 0;  // L*filter_len - message_len*listeners
};

/// Filter-design solvability: the stacked system has at least as many
/// unknowns as equations, i.e. L*filter_len >= message_len*listeners.
ConditionCheck check_mccs_condition(const ProblemDims& dims);

struct NullspaceCheck {
    bool covers_message = false;   // drive_len + rir_len - 1 >= message_len
    bool enough_columns = false;   // L*drive_len >= message_len*listeners
    bool delay_ok = false;         // drive_len > max per-listener onset spread
    long max_relative_delay = 0;   // samples

    bool all() const { return covers_message && enough_columns && delay_ok; }
};

NullspaceCheck check_nullspace_conditions(const ProblemDims& dims, const ChannelSet& channels);

/// Index of the first tap whose magnitude exceeds 1% of the RIR's peak
/// magnitude; windowed fractional-delay pulses smear onsets, so a plain
/// first-nonzero test would fire on sinc precursors.
long first_arrival(const Signal& rir);

/// The window of message samples a drive can cleanly deliver to listener k:
/// it opens a short guard past the earliest direct-path peak over that
/// listener's RIRs (nothing can be heard before the wavefront fully lands)
/// and spans at most drive_len samples (later output exists only through the
/// decaying reverb tail, which cannot carry new content). Designs solve and
/// report reconstruction inside these windows.
RowWindows delivery_windows(const ChannelSet& channels);

}  // namespace privaudio
