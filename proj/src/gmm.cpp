#include "ciid/gmm.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

namespace ciid {

void GmmParams::validate() const {
    if (!(sigma2_priv >= 0.0) || !(sigma2_dis >= 0.0))
        throw ConfigError("GmmParams: variances must be >= 0");
    if (n_priv < 1 || n_dis < 1)
        throw ConfigError("GmmParams: group counts must be >= 1");
    if (!std::isfinite(mu_priv) || !std::isfinite(mu_dis))
        throw ConfigError("GmmParams: means must be finite");
}

void McConfig::validate() const {
    if (replicates < 2) throw ConfigError("McConfig: replicates must be >= 2");
}

const char* to_string(MeanEstimatorKind kind) {
    switch (kind) {
        case MeanEstimatorKind::Overall: return "overall";
        case MeanEstimatorKind::Ciid: return "ciid";
        case MeanEstimatorKind::Ensemble: return "ensemble";
        case MeanEstimatorKind::DisOnly: return "dis_only";
        case MeanEstimatorKind::PrivOnly: return "priv_only";
    }
    return "?";
}

void sample_dataset_into(const GmmParams& params, std::uint64_t seed,
                         std::vector<ScalarSample>& out) {
    params.validate();
    out.clear();
    out.reserve(static_cast<std::size_t>(params.n()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z01(0.0, 1.0);
    // value = mu + sd * z keeps sigma2 = 0 exact.
    const double sd_priv = std::sqrt(params.sigma2_priv);
    const double sd_dis = std::sqrt(params.sigma2_dis);
    for (std::int64_t i = 0; i < params.n_priv; ++i)
        out.push_back({params.mu_priv + sd_priv * z01(rng), true});
    for (std::int64_t i = 0; i < params.n_dis; ++i)
        out.push_back({params.mu_dis + sd_dis * z01(rng), false});
}

std::vector<ScalarSample> sample_dataset(const GmmParams& params, std::uint64_t seed) {
    std::vector<ScalarSample> out;
    sample_dataset_into(params, seed, out);
    return out;
}

namespace {

struct GroupSums {
    double sum_priv = 0.0;
    double sum_dis = 0.0;
    std::int64_t count_priv = 0;
    std::int64_t count_dis = 0;

    double mean_priv() const { return sum_priv / static_cast<double>(count_priv); }
    double mean_dis() const { return sum_dis / static_cast<double>(count_dis); }
    double grand_mean() const {
        return (sum_priv + sum_dis) / static_cast<double>(count_priv + count_dis);
    }
};

GroupSums accumulate(const std::vector<ScalarSample>& samples) {
    GroupSums sums;
    for (const auto& s : samples) {
        if (s.is_priv) {
            sums.sum_priv += s.value;
            ++sums.count_priv;
        } else {
            sums.sum_dis += s.value;
            ++sums.count_dis;
        }
    }
    return sums;
}

MeanEstimate derive(MeanEstimatorKind kind, const GroupSums& sums) {
    const bool needs_priv = kind == MeanEstimatorKind::PrivOnly ||
                            kind == MeanEstimatorKind::Ciid ||
                            kind == MeanEstimatorKind::Ensemble;
    const bool needs_dis = kind == MeanEstimatorKind::DisOnly ||
                           kind == MeanEstimatorKind::Ciid ||
                           kind == MeanEstimatorKind::Ensemble;
    if (kind == MeanEstimatorKind::Overall && sums.count_priv + sums.count_dis == 0)
        throw EmptyGroupError("estimate_mean: no samples");
    if (needs_priv && sums.count_priv == 0)
        throw EmptyGroupError("estimate_mean: privileged group is empty");
    if (needs_dis && sums.count_dis == 0)
        throw EmptyGroupError("estimate_mean: disadvantaged group is empty");

    switch (kind) {
        case MeanEstimatorKind::Overall: {
            const double g = sums.grand_mean();
            return {g, g};
        }
        case MeanEstimatorKind::PrivOnly: {
            const double m = sums.mean_priv();
            return {m, m};
        }
        case MeanEstimatorKind::DisOnly: {
            const double m = sums.mean_dis();
            return {m, m};
        }
        case MeanEstimatorKind::Ciid:
            return {sums.mean_priv(), sums.mean_dis()};
        case MeanEstimatorKind::Ensemble: {
            const double e = 0.5 * (sums.mean_priv() + sums.mean_dis());
            return {e, e};
        }
    }
    throw std::logic_error("unreachable estimator kind");
}

}  // namespace

MeanEstimate estimate_mean(MeanEstimatorKind kind, const std::vector<ScalarSample>& samples) {
    return derive(kind, accumulate(samples));
}

std::map<MeanEstimatorKind, TradeoffEntry> analytic_tradeoffs(const GmmParams& params) {
    params.validate();
    const double d = params.signed_delta_mu();  // mu_dis - mu_priv
    const double pp = params.p_priv();
    const double pd = params.p_dis();
    const double var_priv_mean = params.sigma2_priv / static_cast<double>(params.n_priv);
    const double var_dis_mean = params.sigma2_dis / static_cast<double>(params.n_dis);

    std::map<MeanEstimatorKind, TradeoffEntry> table;

    TradeoffEntry overall;
    overall.bias_on_priv = pd * d;
    overall.bias_on_dis = -pp * d;
    overall.variance_on_priv =
        (pp * params.sigma2_priv + pd * params.sigma2_dis) / static_cast<double>(params.n());
    overall.variance_on_dis = overall.variance_on_priv;
    table[MeanEstimatorKind::Overall] = overall;

    TradeoffEntry ciid;  // unbiased by construction, per-group variance
    ciid.variance_on_priv = var_priv_mean;
    ciid.variance_on_dis = var_dis_mean;
    table[MeanEstimatorKind::Ciid] = ciid;

    TradeoffEntry ensemble;
    ensemble.bias_on_priv = 0.5 * d;
    ensemble.bias_on_dis = -0.5 * d;
    ensemble.variance_on_priv = 0.25 * (var_priv_mean + var_dis_mean);
    ensemble.variance_on_dis = ensemble.variance_on_priv;
    table[MeanEstimatorKind::Ensemble] = ensemble;

    TradeoffEntry dis_only;
    dis_only.bias_on_priv = d;
    dis_only.bias_on_dis = 0.0;
    dis_only.variance_on_priv = var_dis_mean;
    dis_only.variance_on_dis = var_dis_mean;
    table[MeanEstimatorKind::DisOnly] = dis_only;

    TradeoffEntry priv_only;
    priv_only.bias_on_priv = 0.0;
    priv_only.bias_on_dis = -d;
    priv_only.variance_on_priv = var_priv_mean;
    priv_only.variance_on_dis = var_priv_mean;
    table[MeanEstimatorKind::PrivOnly] = priv_only;

    return table;
}

namespace {

struct MomentAcc {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    // Chan et al. parallel combination; applied in fixed block order.
    void combine(const MomentAcc& other) {
        if (other.n == 0) return;
        if (n == 0) {
            *this = other;
            return;
        }
        const double delta = other.mean - mean;
        const std::int64_t total = n + other.n;
        mean += delta * static_cast<double>(other.n) / static_cast<double>(total);
        m2 += other.m2 + delta * delta * static_cast<double>(n) *
                             static_cast<double>(other.n) / static_cast<double>(total);
        n = total;
    }

    double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

// Welford moments for both estimate fields of every estimator kind.
struct AllKindsMoments {
    std::array<std::array<MomentAcc, 2>, kAllEstimatorKinds.size()> acc{};

    void combine(const AllKindsMoments& other) {
        for (std::size_t k = 0; k < acc.size(); ++k)
            for (std::size_t f = 0; f < 2; ++f) acc[k][f].combine(other.acc[k][f]);
    }
};

constexpr std::int64_t kMcBlock = 4096;

AllKindsMoments run_mc_all_kinds(const GmmParams& params, const McConfig& mc) {
    params.validate();
    mc.validate();
    const std::int64_t blocks = (mc.replicates + kMcBlock - 1) / kMcBlock;
    std::vector<AllKindsMoments> partial(static_cast<std::size_t>(blocks));

    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        std::vector<ScalarSample> buf;
        AllKindsMoments& blk = partial[b];
        const std::int64_t begin = static_cast<std::int64_t>(b) * kMcBlock;
        const std::int64_t end = std::min<std::int64_t>(begin + kMcBlock, mc.replicates);
        for (std::int64_t r = begin; r < end; ++r) {
            sample_dataset_into(params, derive_seed(mc.seed, static_cast<std::uint64_t>(r)), buf);
            const GroupSums sums = accumulate(buf);
            for (std::size_t k = 0; k < kAllEstimatorKinds.size(); ++k) {
                const MeanEstimate est = derive(kAllEstimatorKinds[k], sums);
                blk.acc[k][0].add(est.value_for_priv);
                blk.acc[k][1].add(est.value_for_dis);
            }
        }
    });

    AllKindsMoments total;
    for (const auto& blk : partial) total.combine(blk);
    return total;
}

McTradeoff tradeoff_from_moments(const GmmParams& params,
                                 const std::array<MomentAcc, 2>& acc) {
    const auto& priv = acc[0];
    const auto& dis = acc[1];
    const double r = static_cast<double>(priv.n);

    McTradeoff out;
    out.empirical.bias_on_priv = priv.mean - params.mu_priv;
    out.empirical.bias_on_dis = dis.mean - params.mu_dis;
    out.empirical.variance_on_priv = priv.sample_variance();
    out.empirical.variance_on_dis = dis.sample_variance();

    // SE of a mean of R draws, and normal-theory SE of a sample variance.
    const double var_se_factor = std::sqrt(2.0 / (r - 1.0));
    out.se.bias_on_priv = std::sqrt(priv.sample_variance() / r);
    out.se.bias_on_dis = std::sqrt(dis.sample_variance() / r);
    out.se.variance_on_priv = priv.sample_variance() * var_se_factor;
    out.se.variance_on_dis = dis.sample_variance() * var_se_factor;
    return out;
}

}  // namespace

McTradeoff monte_carlo_tradeoffs(const GmmParams& params, MeanEstimatorKind kind,
                                 const McConfig& mc) {
    const AllKindsMoments moments = run_mc_all_kinds(params, mc);
    for (std::size_t k = 0; k < kAllEstimatorKinds.size(); ++k)
        if (kAllEstimatorKinds[k] == kind) return tradeoff_from_moments(params, moments.acc[k]);
    throw std::logic_error("unknown estimator kind");
}

bool VerificationReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const VerificationRow& r) { return r.pass; });
}

std::string VerificationReport::to_csv() const {
    std::ostringstream os;
    os << "estimator,cell,analytic,empirical,se,pass\n";
    for (const auto& r : rows) {
        os << to_string(r.kind) << ',' << r.cell << ',' << format_double(r.analytic) << ','
           << format_double(r.empirical) << ',' << format_double(r.se) << ','
           << (r.pass ? "true" : "false") << '\n';
    }
    return os.str();
}

VerificationReport verify_table(const GmmParams& params, const McConfig& mc, double abs_tol,
                                double se_mult) {
    if (!(se_mult > 0.0)) throw ConfigError("verify_table: se_mult must be > 0");
    if (!(abs_tol >= 0.0)) throw ConfigError("verify_table: abs_tol must be >= 0");
    const auto analytic = analytic_tradeoffs(params);
    const AllKindsMoments moments = run_mc_all_kinds(params, mc);

    VerificationReport report;
    for (std::size_t k = 0; k < kAllEstimatorKinds.size(); ++k) {
        const MeanEstimatorKind kind = kAllEstimatorKinds[k];
        const McTradeoff emp = tradeoff_from_moments(params, moments.acc[k]);
        const TradeoffEntry& ana = analytic.at(kind);

        const std::array<std::tuple<const char*, double, double, double>, 4> cells = {{
            {"bias_on_priv", ana.bias_on_priv, emp.empirical.bias_on_priv, emp.se.bias_on_priv},
            {"bias_on_dis", ana.bias_on_dis, emp.empirical.bias_on_dis, emp.se.bias_on_dis},
            {"variance_on_priv", ana.variance_on_priv, emp.empirical.variance_on_priv,
             emp.se.variance_on_priv},
            {"variance_on_dis", ana.variance_on_dis, emp.empirical.variance_on_dis,
             emp.se.variance_on_dis},
        }};
        for (const auto& [cell, a, e, se] : cells) {
            VerificationRow row;
            row.kind = kind;
            row.cell = cell;
            row.analytic = a;
            row.empirical = e;
            row.se = se;
            row.pass = std::abs(e - a) <= std::max(abs_tol, se_mult * se);
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace ciid
