#pragma once

#include "ciid/common.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ciid {

// Two-component Gaussian mixture with observed component membership.
// Group sample counts are fixed per draw (not redrawn binomially), which
// makes the analytic bias expressions below exact rather than approximate
// and gives the Monte Carlo verification a sharp target.
struct GmmParams {
    double mu_priv = 0.0;
    double mu_dis = 0.0;
    double sigma2_priv = 1.0;
    double sigma2_dis = 1.0;
    std::int64_t n_priv = 1;
    std::int64_t n_dis = 1;

    std::int64_t n() const { return n_priv + n_dis; }
    double p_priv() const { return static_cast<double>(n_priv) / static_cast<double>(n()); }
    double p_dis() const { return static_cast<double>(n_dis) / static_cast<double>(n()); }
    // Signed mean difference mu_dis - mu_priv. Biases are kept signed
    // internally; the familiar magnitude form is |signed_delta_mu()|.
    double signed_delta_mu() const { return mu_dis - mu_priv; }
    double delta_mu() const { return std::abs(signed_delta_mu()); }

    void validate() const;  // throws ConfigError on invalid fields
};

// One observed draw: scalar value plus the group indicator.
struct ScalarSample {
    double value = 0.0;
    bool is_priv = false;
};

enum class MeanEstimatorKind { Overall, Ciid, Ensemble, DisOnly, PrivOnly };

inline constexpr std::array<MeanEstimatorKind, 5> kAllEstimatorKinds = {
    MeanEstimatorKind::Overall, MeanEstimatorKind::Ciid, MeanEstimatorKind::Ensemble,
    MeanEstimatorKind::DisOnly, MeanEstimatorKind::PrivOnly};

const char* to_string(MeanEstimatorKind kind);

// Value an estimator produces for samples of each group. Single-value
// estimators carry the same number in both fields; Ciid routes per group.
struct MeanEstimate {
    double value_for_priv = 0.0;
    double value_for_dis = 0.0;
};

struct TradeoffEntry {
    double bias_on_priv = 0.0;
    double bias_on_dis = 0.0;
    double variance_on_priv = 0.0;
    double variance_on_dis = 0.0;
};

struct McConfig {
    std::int64_t replicates = 200000;
    std::uint64_t seed = 42;

    void validate() const;  // replicates >= 2
};

// Draws exactly n_priv samples from N(mu_priv, sigma2_priv) followed by
// n_dis samples from N(mu_dis, sigma2_dis). Deterministic given seed.
std::vector<ScalarSample> sample_dataset(const GmmParams& params, std::uint64_t seed);
void sample_dataset_into(const GmmParams& params, std::uint64_t seed,
                         std::vector<ScalarSample>& out);

// Throws EmptyGroupError when the requested kind needs a group that has no
// samples (Overall needs at least one sample of any kind).
MeanEstimate estimate_mean(MeanEstimatorKind kind, const std::vector<ScalarSample>& samples);

// Closed-form bias/variance of every estimator under fixed group counts.
// Biases are signed: e.g. Overall bias_on_priv = p_dis * (mu_dis - mu_priv).
std::map<MeanEstimatorKind, TradeoffEntry> analytic_tradeoffs(const GmmParams& params);

struct McTradeoff {
    TradeoffEntry empirical;
    TradeoffEntry se;  // standard error of each empirical cell
};

// Empirical bias/variance over mc.replicates independent dataset draws.
// Bias cells are means of (estimate - true mean); variance cells are sample
// variances of the per-group estimate streams. Standard errors use normal
// theory (exact here: every estimator is a linear map of Gaussian draws).
// Replicates run in parallel over fixed-size blocks combined in index order,
// so the result is identical regardless of thread count.
McTradeoff monte_carlo_tradeoffs(const GmmParams& params, MeanEstimatorKind kind,
                                 const McConfig& mc);

struct VerificationRow {
    MeanEstimatorKind kind;
    std::string cell;  // bias_on_priv | bias_on_dis | variance_on_priv | variance_on_dis
    double analytic = 0.0;
    double empirical = 0.0;
    double se = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerificationRow> rows;  // 5 estimators x 4 cells, fixed order

    bool all_pass() const;
    // Columns: estimator,cell,analytic,empirical,se,pass
    std::string to_csv() const;
};

// A cell passes iff |empirical - analytic| <= max(abs_tol, se_mult * SE).
VerificationReport verify_table(const GmmParams& params, const McConfig& mc, double abs_tol,
                                double se_mult);

}  // namespace ciid
