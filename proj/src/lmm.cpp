#include "longvine/lmm.hpp"

#include "longvine/optimize.hpp"
#include "longvine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace longvine {

Eigen::MatrixXd ErrorStructure::covariance(int di) const
{
    Eigen::MatrixXd s(di, di);
    switch (kind) {
    case ErrorKind::iid:
        s = sigma2 * Eigen::MatrixXd::Identity(di, di);
        break;
    case ErrorKind::compound_symmetry:
        s.setConstant(sigma2 * rho);
        s.diagonal().setConstant(sigma2);
        break;
    case ErrorKind::ar1:
        for (int k = 0; k < di; ++k)
            for (int l = 0; l < di; ++l)
                s(k, l) = sigma2 * std::pow(rho, std::abs(k - l));
        break;
    case ErrorKind::exponential_decay:
        for (int k = 0; k < di; ++k)
            for (int l = 0; l < di; ++l)
                s(k, l) = sigma2 * std::exp(-std::abs(k - l) / range_r);
        break;
    case ErrorKind::general:
        if (full_correlation.rows() < di)
            throw std::invalid_argument("ErrorStructure: general correlation "
                                        "matrix smaller than requested block");
        s = sigma2 * full_correlation.topLeftCorner(di, di);
        break;
    }
    return s;
}

std::string to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::iid: return "iid";
    case ErrorKind::compound_symmetry: return "compound_symmetry";
    case ErrorKind::ar1: return "ar1";
    case ErrorKind::exponential_decay: return "exponential_decay";
    case ErrorKind::general: return "general";
    }
    return "?";
}

ErrorKind error_kind_from_string(const std::string& name)
{
    if (name == "iid") return ErrorKind::iid;
    if (name == "compound_symmetry" || name == "cs") return ErrorKind::compound_symmetry;
    if (name == "ar1") return ErrorKind::ar1;
    if (name == "exponential_decay" || name == "expdecay")
        return ErrorKind::exponential_decay;
    if (name == "general") return ErrorKind::general;
    throw std::invalid_argument("unknown error structure: " + name);
}

std::function<Eigen::MatrixXd(int)> random_intercept_design()
{
    return [](int di) { return Eigen::MatrixXd::Ones(di, 1); };
}

namespace {

void check_pd(const Eigen::MatrixXd& m, const char* what)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    double min_ev = es.eigenvalues().minCoeff();
    if (min_ev <= 0.0)
        throw std::runtime_error(std::string(what)
                                 + ": matrix is not positive definite "
                                   "(smallest eigenvalue "
                                 + std::to_string(min_ev) + ")");
}

} // namespace

Eigen::MatrixXd implied_covariance(const LmmSpec& spec, int di)
{
    if (di < 1)
        throw std::invalid_argument("implied_covariance: dimension must be >= 1");
    Eigen::MatrixXd z = spec.z_builder ? spec.z_builder(di)
                                       : Eigen::MatrixXd::Zero(di, 0);
    Eigen::MatrixXd cov = spec.error.covariance(di);
    if (z.cols() > 0)
        cov += z * spec.random_effect_cov * z.transpose();
    check_pd(cov, "implied_covariance");
    return cov;
}

Eigen::MatrixXd implied_correlation(const LmmSpec& spec, int di)
{
    Eigen::MatrixXd cov = implied_covariance(spec, di);
    Eigen::VectorXd inv_sd = cov.diagonal().array().sqrt().inverse();
    Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    corr.diagonal().setOnes();
    return corr;
}

namespace {

// rho_{k,l; inner} from the correlation block on {k} u inner u {l};
// inner entries of R must already be final
double partial_from_corr(const Eigen::MatrixXd& r, int k, int l)
{
    int m = l - k - 1; // conditioning-set size
    if (m == 0)
        return r(k, l);
    Eigen::MatrixXd s(m, m);
    Eigen::VectorXd r1(m), r2(m);
    for (int i = 0; i < m; ++i) {
        r1(i) = r(k, k + 1 + i);
        r2(i) = r(l, k + 1 + i);
        for (int j = 0; j < m; ++j)
            s(i, j) = r(k + 1 + i, k + 1 + j);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("partial correlation: inner block not PD");
    Eigen::VectorXd s1 = llt.solve(r1);
    Eigen::VectorXd s2 = llt.solve(r2);
    double v1 = 1.0 - r1.dot(s1);
    double v2 = 1.0 - r2.dot(s2);
    return (r(k, l) - r1.dot(s2)) / std::sqrt(v1 * v2);
}

} // namespace

Eigen::MatrixXd corr_to_partials(const Eigen::MatrixXd& corr)
{
    const int d = static_cast<int>(corr.rows());
    if (corr.cols() != d || d < 2)
        throw std::invalid_argument("corr_to_partials: need a square matrix, d >= 2");
    if (!corr.isApprox(corr.transpose(), 1e-12)
        || (corr.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
        throw std::invalid_argument("corr_to_partials: not a correlation matrix");
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("corr_to_partials: matrix not positive definite");

    Eigen::MatrixXd partials = Eigen::MatrixXd::Zero(d, d);
    for (int t = 1; t <= d - 1; ++t) {
        for (int k = 0; k + t < d; ++k) {
            double p = partial_from_corr(corr, k, k + t);
            partials(k, k + t) = p;
            partials(k + t, k) = p;
        }
    }
    return partials;
}

Eigen::MatrixXd partials_to_corr(const Eigen::MatrixXd& partials)
{
    const int d = static_cast<int>(partials.rows());
    if (partials.cols() != d || d < 2)
        throw std::invalid_argument("partials_to_corr: need a square matrix, d >= 2");

    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
    for (int t = 1; t <= d - 1; ++t) {
        for (int k = 0; k + t < d; ++k) {
            int l = k + t;
            double p = partials(k, l);
            if (!(p > -1.0 && p < 1.0))
                throw std::invalid_argument("partials_to_corr: partials must lie "
                                            "in (-1, 1)");
            double value;
            if (t == 1) {
                value = p;
            } else {
                int m = t - 1;
                Eigen::MatrixXd s(m, m);
                Eigen::VectorXd r1(m), r2(m);
                for (int i = 0; i < m; ++i) {
                    r1(i) = r(k, k + 1 + i);
                    r2(i) = r(l, k + 1 + i);
                    for (int j = 0; j < m; ++j)
                        s(i, j) = r(k + 1 + i, k + 1 + j);
                }
                Eigen::LLT<Eigen::MatrixXd> llt(s);
                Eigen::VectorXd s1 = llt.solve(r1);
                Eigen::VectorXd s2 = llt.solve(r2);
                double v1 = 1.0 - r1.dot(s1);
                double v2 = 1.0 - r2.dot(s2);
                value = r1.dot(s2) + p * std::sqrt(v1 * v2);
            }
            r(k, l) = value;
            r(l, k) = value;
        }
    }
    return r;
}

GaussianDVine lmm_as_gaussian_dvine(const LmmSpec& spec, int d)
{
    Eigen::MatrixXd corr = implied_correlation(spec, d);
    Eigen::MatrixXd cov = implied_covariance(spec, d);
    Eigen::MatrixXd partials = corr_to_partials(corr);

    GaussianDVine out { DVineSpec(d), MarginVector(static_cast<std::size_t>(d)) };
    for (int l = 2; l <= d; ++l) {
        for (int k = 1; k < l; ++k) {
            double p = partials(k - 1, l - 1);
            out.spec.pair(k, l) = PairCopula { CopulaFamily::gaussian,
                                               Rotation::deg0, p };
        }
    }
    for (int j = 1; j <= d; ++j) {
        MarginalModel m;
        m.index = j;
        m.covariate_names = spec.covariate_names;
        m.coefficients = spec.beta;
        m.sigma = std::sqrt(cov(j - 1, j - 1));
        out.margins[static_cast<std::size_t>(j - 1)] = std::move(m);
    }
    return out;
}

// ------------------------------------------------------------------ fitting

namespace {

struct IndividualBlock {
    std::vector<int> present; // 0-based measurement indices with observed y
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
};

std::vector<IndividualBlock> make_blocks(const LongitudinalDataset& data,
                                         const std::vector<std::string>& covariates)
{
    std::vector<IndividualBlock> blocks;
    for (const auto& ind : data.individuals) {
        IndividualBlock blk;
        for (std::size_t slot = 0; slot < ind.measurements.size(); ++slot) {
            const auto& m = ind.measurements[slot];
            if (m && !std::isnan(m->y))
                blk.present.push_back(static_cast<int>(slot));
        }
        if (blk.present.empty())
            continue;
        const int ni = static_cast<int>(blk.present.size());
        blk.y.resize(ni);
        blk.x.resize(ni, static_cast<Eigen::Index>(covariates.size()) + 1);
        for (int r = 0; r < ni; ++r) {
            const auto& m = *ind.measurements[static_cast<std::size_t>(blk.present[r])];
            blk.y(r) = m.y;
            blk.x(r, 0) = 1.0;
            for (std::size_t c = 0; c < covariates.size(); ++c) {
                auto it = m.covariates.find(covariates[c]);
                if (it == m.covariates.end())
                    throw std::invalid_argument("lmm_fit: missing covariate '"
                                                + covariates[c] + "'");
                blk.x(r, static_cast<Eigen::Index>(c) + 1) = it->second;
            }
        }
        blocks.push_back(std::move(blk));
    }
    if (blocks.empty())
        throw std::invalid_argument("lmm_fit: no usable individuals");
    return blocks;
}

struct ProfiledLoglik {
    double value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta;
    bool valid = false;
};

// GLS-profiled multivariate-normal log-likelihood for a full-dimension
// covariance matrix; individuals contribute their present sub-blocks
ProfiledLoglik profiled_loglik(const Eigen::MatrixXd& v_full,
                               const std::vector<IndividualBlock>& blocks)
{
    ProfiledLoglik out;
    const Eigen::Index p = blocks.front().x.cols();
    Eigen::MatrixXd xtvx = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd xtvy = Eigen::VectorXd::Zero(p);

    std::vector<Eigen::LLT<Eigen::MatrixXd>> llts;
    llts.reserve(blocks.size());
    double logdet = 0.0;
    Eigen::Index n_total = 0;
    for (const auto& blk : blocks) {
        const int ni = static_cast<int>(blk.present.size());
        Eigen::MatrixXd vi(ni, ni);
        for (int r = 0; r < ni; ++r)
            for (int c = 0; c < ni; ++c)
                vi(r, c) = v_full(blk.present[static_cast<std::size_t>(r)],
                                  blk.present[static_cast<std::size_t>(c)]);
        Eigen::LLT<Eigen::MatrixXd> llt(vi);
        if (llt.info() != Eigen::Success)
            return out;
        logdet += 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        xtvx.noalias() += blk.x.transpose() * llt.solve(blk.x);
        xtvy.noalias() += blk.x.transpose() * llt.solve(blk.y);
        llts.push_back(std::move(llt));
        n_total += ni;
    }

    Eigen::LDLT<Eigen::MatrixXd> norm_eq(xtvx);
    if (norm_eq.info() != Eigen::Success)
        return out;
    out.beta = norm_eq.solve(xtvy);

    double quad = 0.0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        Eigen::VectorXd r = blocks[i].y - blocks[i].x * out.beta;
        quad += r.dot(llts[i].solve(r));
    }
    out.value = -0.5 * (static_cast<double>(n_total) * stats::log_2pi + logdet + quad);
    out.valid = std::isfinite(out.value);
    return out;
}

int n_error_parameters(ErrorKind kind, int d)
{
    switch (kind) {
    case ErrorKind::iid: return 1;
    case ErrorKind::compound_symmetry:
    case ErrorKind::ar1:
    case ErrorKind::exponential_decay: return 2;
    case ErrorKind::general: return 1 + d * (d - 1) / 2;
    }
    return 0;
}

double bounded_exp(double x) { return std::exp(std::clamp(x, -34.0, 34.0)); }
double bounded_tanh(double x) { return 0.999 * std::tanh(x); }

// variance parameter vector layout: [log tau2, log sigma2, extras...]
Eigen::MatrixXd error_cov_from_params(ErrorKind kind, int d,
                                      const Eigen::VectorXd& x)
{
    ErrorStructure err;
    err.kind = kind;
    err.sigma2 = bounded_exp(x(1));
    switch (kind) {
    case ErrorKind::iid:
        break;
    case ErrorKind::compound_symmetry:
    case ErrorKind::ar1:
        err.rho = bounded_tanh(x(2));
        break;
    case ErrorKind::exponential_decay:
        err.range_r = bounded_exp(x(2));
        break;
    case ErrorKind::general: {
        Eigen::MatrixXd partials = Eigen::MatrixXd::Zero(d, d);
        int idx = 2;
        for (int t = 1; t <= d - 1; ++t)
            for (int k = 0; k + t < d; ++k) {
                partials(k, k + t) = bounded_tanh(x(idx));
                partials(k + t, k) = partials(k, k + t);
                ++idx;
            }
        err.full_correlation = partials_to_corr(partials);
        break;
    }
    }
    return err.covariance(d);
}

} // namespace

double lmm_loglik(const LmmSpec& spec, const LongitudinalDataset& data)
{
    auto blocks = make_blocks(data, { spec.covariate_names.begin() + 1,
                                      spec.covariate_names.end() });
    Eigen::MatrixXd v_full = implied_covariance(spec, data.dim);
    stats::KahanSum ll;
    for (const auto& blk : blocks) {
        const int ni = static_cast<int>(blk.present.size());
        Eigen::MatrixXd vi(ni, ni);
        for (int r = 0; r < ni; ++r)
            for (int c = 0; c < ni; ++c)
                vi(r, c) = v_full(blk.present[static_cast<std::size_t>(r)],
                                  blk.present[static_cast<std::size_t>(c)]);
        Eigen::LLT<Eigen::MatrixXd> llt(vi);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("lmm_loglik: covariance block not PD");
        Eigen::VectorXd r = blk.y - blk.x * spec.beta;
        double logdet =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        ll.add(-0.5 * (ni * stats::log_2pi + logdet + r.dot(llt.solve(r))));
    }
    return ll.value();
}

LmmFit lmm_fit(const LongitudinalDataset& data, ErrorKind kind,
               const std::vector<std::string>& covariates)
{
    const int d = data.dim;
    auto blocks = make_blocks(data, covariates);

    // pooled-residual variance for initialization
    double var0;
    {
        Eigen::Index n = 0;
        double mean = 0.0;
        for (const auto& blk : blocks) {
            mean += blk.y.sum();
            n += blk.y.size();
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const auto& blk : blocks)
            ss += (blk.y.array() - mean).square().sum();
        var0 = std::max(ss / static_cast<double>(n), 1e-8);
    }

    const int n_var = 2 + n_error_parameters(kind, d) - 1; // tau2 + error params
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_var);
    x0(0) = std::log(var0 / 2.0);
    x0(1) = std::log(var0 / 2.0);
    if (kind == ErrorKind::compound_symmetry || kind == ErrorKind::ar1)
        x0(2) = std::atanh(0.3 / 0.999);
    if (kind == ErrorKind::exponential_decay)
        x0(2) = 0.0;

    auto objective = [&](const Eigen::VectorXd& x) {
        Eigen::MatrixXd v = error_cov_from_params(kind, d, x);
        double tau2 = bounded_exp(x(0));
        v.array() += tau2; // random intercept: tau2 * J
        auto pl = profiled_loglik(v, blocks);
        return pl.valid ? -pl.value : 1e100;
    };

    auto opt = nelder_mead(objective, x0, 0.2, 1e-10,
                           std::max(20000, 4000 * n_var));

    LmmFit fit;
    fit.converged = opt.converged && std::isfinite(opt.fx) && opt.fx < 1e99;
    if (!std::isfinite(opt.fx) || opt.fx >= 1e99)
        throw std::runtime_error("lmm_fit: optimizer failed to find a valid "
                                 "covariance");
    if (!opt.converged)
        fit.warnings.push_back("lmm_fit: evaluation budget exhausted, keeping "
                               "best point found");

    Eigen::MatrixXd v = error_cov_from_params(kind, d, opt.x);
    double tau2 = bounded_exp(opt.x(0));
    Eigen::MatrixXd v_all = v;
    v_all.array() += tau2;
    auto pl = profiled_loglik(v_all, blocks);

    LmmSpec spec;
    spec.beta = pl.beta;
    spec.covariate_names.push_back("intercept");
    for (const auto& c : covariates)
        spec.covariate_names.push_back(c);
    spec.random_effect_cov = Eigen::MatrixXd::Constant(1, 1, tau2);
    spec.z_builder = random_intercept_design();
    spec.error.kind = kind;
    spec.error.sigma2 = bounded_exp(opt.x(1));
    switch (kind) {
    case ErrorKind::iid: break;
    case ErrorKind::compound_symmetry:
    case ErrorKind::ar1: spec.error.rho = bounded_tanh(opt.x(2)); break;
    case ErrorKind::exponential_decay: spec.error.range_r = bounded_exp(opt.x(2)); break;
    case ErrorKind::general:
        spec.error.full_correlation = v / spec.error.sigma2;
        break;
    }

    fit.spec = std::move(spec);
    fit.loglik = pl.value;
    fit.n_parameters = static_cast<int>(covariates.size()) + 1 // beta
                       + 1                                     // tau2
                       + n_error_parameters(kind, d);
    return fit;
}

} // namespace longvine
