#include "longvine/dvine.hpp"

#include "longvine/random.hpp"
#include "longvine/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace longvine {

DVineSpec::DVineSpec(int dim)
  : dim_(dim)
{
    if (dim < 2)
        throw std::invalid_argument("DVineSpec: dimension must be at least 2");
    pairs_.resize(static_cast<std::size_t>(n_edges()));
}

int DVineSpec::index(int k, int l) const
{
    if (!(1 <= k && k < l && l <= dim_))
        throw std::invalid_argument("DVineSpec: edge indices out of range");
    int t = l - k;
    int offset = (t - 1) * dim_ - t * (t - 1) / 2;
    return offset + (k - 1);
}

int DVineSpec::n_parameters() const
{
    int p = 0;
    for (const auto& pc : pairs_)
        p += (pc.family != CopulaFamily::independence) ? 1 : 0;
    return p;
}

int leading_length(const ObservationU& u)
{
    int len = 0;
    while (len < u.size() && is_present(u(len)))
        ++len;
    return len;
}

int present_count(const ObservationU& u)
{
    int n = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i)
        n += is_present(u(i)) ? 1 : 0;
    return n;
}

std::vector<int> group_sizes(const CopulaDataset& data)
{
    std::vector<int> n(static_cast<std::size_t>(data.dim), 0);
    for (const auto& u : data.observations) {
        int len = leading_length(u);
        if (len >= 1)
            ++n[static_cast<std::size_t>(len - 1)];
    }
    return n;
}

std::vector<int> cumulative_group_sizes(const CopulaDataset& data)
{
    auto n = group_sizes(data);
    std::vector<int> big(n.size(), 0);
    int acc = 0;
    for (int j = static_cast<int>(n.size()) - 1; j >= 0; --j) {
        acc += n[static_cast<std::size_t>(j)];
        big[static_cast<std::size_t>(j)] = acc;
    }
    return big;
}

namespace {

// h-cascade over one maximal run [s, e] (1-based, inclusive) of present
// entries. A(k, l) = C_{k | (k+1):l}, B(k, l) = C_{l | k:(l-1)} with
// A(k, k) = B(k, k) = u_k. The edge (k, l) term is c_{k,l}(A(k,l-1), B(k+1,l)).
// Visitor receives (k, l, a, b) before A/B are advanced.
template <typename Visitor>
void run_cascade(const DVineSpec& spec, const Eigen::VectorXd& u, int s, int e,
                 Eigen::MatrixXd& a_mat, Eigen::MatrixXd& b_mat, Visitor&& visit)
{
    for (int k = s; k <= e; ++k) {
        a_mat(k, k) = u(k - 1);
        b_mat(k, k) = u(k - 1);
    }
    for (int t = 1; t <= e - s; ++t) {
        for (int k = s; k + t <= e; ++k) {
            int l = k + t;
            const PairCopula& pc = spec.pair(k, l);
            double a = a_mat(k, l - 1);
            double b = b_mat(k + 1, l);
            visit(k, l, pc, a, b);
            a_mat(k, l) = hfunc2(pc, a, b);
            b_mat(k, l) = hfunc1(pc, a, b);
        }
    }
}

} // namespace

double log_density(const DVineSpec& spec, const Eigen::VectorXd& u)
{
    const int d = spec.dim();
    if (u.size() != d)
        throw std::invalid_argument("log_density: point has wrong dimension");
    for (int i = 0; i < d; ++i)
        if (!is_present(u(i)))
            throw std::invalid_argument("log_density: point has missing entries");

    Eigen::MatrixXd a_mat(d + 1, d + 1), b_mat(d + 1, d + 1);
    double ll = 0.0;
    run_cascade(spec, u, 1, d, a_mat, b_mat,
                [&](int, int, const PairCopula& pc, double a, double b) {
                    ll += log_pdf(pc, a, b);
                });
    return ll;
}

double density(const DVineSpec& spec, const Eigen::VectorXd& u)
{
    return std::exp(log_density(spec, u));
}

DVineSpec subvine(const DVineSpec& spec, int j)
{
    if (j < 2 || j > spec.dim())
        throw std::invalid_argument("subvine: j must lie in [2, dim]");
    DVineSpec sub(j);
    for (int l = 2; l <= j; ++l)
        for (int k = 1; k < l; ++k)
            sub.pair(k, l) = spec.pair(k, l);
    return sub;
}

DatasetLoglik loglik(const DVineSpec& spec, const CopulaDataset& data)
{
    const int d = spec.dim();
    if (data.dim != d)
        throw std::invalid_argument("loglik: dataset dimension mismatch");

    stats::KahanSum ll;
    int degenerate = 0;
    Eigen::MatrixXd a_mat(d + 1, d + 1), b_mat(d + 1, d + 1);
    for (const auto& u : data.observations) {
        if (u.size() != d)
            throw std::invalid_argument("loglik: observation has wrong dimension");
        if (present_count(u) < 2) {
            ++degenerate;
            continue;
        }
        int s = 1;
        while (s <= d) {
            if (!is_present(u(s - 1))) {
                ++s;
                continue;
            }
            int e = s;
            while (e + 1 <= d && is_present(u(e)))
                ++e;
            run_cascade(spec, u, s, e, a_mat, b_mat,
                        [&](int, int, const PairCopula& pc, double a, double b) {
                            ll.add(log_pdf(pc, a, b));
                        });
            s = e + 1;
        }
    }
    return { ll.value(), degenerate };
}

namespace {

// A(k, j) for k = 1..j given a complete history of length j
Eigen::MatrixXd history_a_matrix(const DVineSpec& spec, const Eigen::VectorXd& history)
{
    const int j = static_cast<int>(history.size());
    Eigen::MatrixXd a_mat(j + 1, j + 1), b_mat(j + 1, j + 1);
    run_cascade(spec, history, 1, j, a_mat, b_mat,
                [](int, int, const PairCopula&, double, double) {});
    return a_mat;
}

void check_history(const DVineSpec& spec, const Eigen::VectorXd& history)
{
    const int j = static_cast<int>(history.size());
    if (j < 1 || j > spec.dim() - 1)
        throw std::invalid_argument("conditional history must have length in "
                                    "[1, dim - 1]");
    for (int i = 0; i < j; ++i)
        if (!is_present(history(i)))
            throw std::invalid_argument("conditional history has missing entries");
}

} // namespace

double conditional_cdf(const DVineSpec& spec, const Eigen::VectorXd& history,
                       double u_next)
{
    check_history(spec, history);
    if (u_next <= 0.0)
        return 0.0;
    if (u_next >= 1.0)
        return 1.0;
    const int j = static_cast<int>(history.size());
    Eigen::MatrixXd a_mat = history_a_matrix(spec, history);

    // descend B(k, j+1) = h1(pc_{k,j+1}; A(k,j), B(k+1,j+1)) from B(j+1,j+1)
    double b = u_next;
    for (int k = j; k >= 1; --k)
        b = hfunc1(spec.pair(k, j + 1), a_mat(k, j), b);
    return b;
}

double conditional_quantile(const DVineSpec& spec, const Eigen::VectorXd& history,
                            double alpha)
{
    check_history(spec, history);
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("conditional_quantile: alpha must lie in (0,1)");
    const int j = static_cast<int>(history.size());
    Eigen::MatrixXd a_mat = history_a_matrix(spec, history);

    double b = alpha;
    for (int k = 1; k <= j; ++k)
        b = hinv1(spec.pair(k, j + 1), a_mat(k, j), b);
    return b;
}

CopulaDataset simulate(const DVineSpec& spec, int n, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("simulate: n must be positive");
    const int d = spec.dim();
    Rng rng(seed);

    CopulaDataset out;
    out.dim = d;
    out.observations.reserve(static_cast<std::size_t>(n));

    Eigen::MatrixXd a_mat(d + 1, d + 1), b_mat(d + 1, d + 1);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd u(d);
        u(0) = rng.uniform();
        a_mat(1, 1) = u(0);
        b_mat(1, 1) = u(0);
        for (int next = 2; next <= d; ++next) {
            double w = rng.uniform();
            // invert the h-cascade; the chain values are B(k, next)
            double b = w;
            b_mat(1, next) = b;
            for (int k = 1; k <= next - 1; ++k) {
                b = hinv1(spec.pair(k, next), a_mat(k, next - 1), b);
                b_mat(k + 1, next) = b;
            }
            u(next - 1) = b;
            a_mat(next, next) = b;
            for (int k = next - 1; k >= 1; --k)
                a_mat(k, next) = hfunc2(spec.pair(k, next), a_mat(k, next - 1),
                                        b_mat(k + 1, next));
        }
        out.observations.push_back(std::move(u));
    }
    return out;
}

} // namespace longvine
