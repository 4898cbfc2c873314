#include "kpz/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kpz/parallel.hpp"

namespace kpz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<std::size_t> window_points(const Grid& g, double a) {
    if (!(a >= 0.0)) throw Error(ErrorCode::WindowOutOfGrid, "window half-width must be nonnegative");
    if (!g.covers(-a) || !g.covers(a)) throw Error(ErrorCode::WindowOutOfGrid, "window [-a, a] not inside grid");
    std::vector<std::size_t> idx;
    const double lim = a + 1e-9 * g.step;
    for (std::size_t i = 0; i < g.count; ++i) {
        if (std::abs(g.point(i)) <= lim) idx.push_back(i);
    }
    return idx;
}

std::vector<double> finite_values(const GridFunction& f) {
    auto v = f.dense();
    return v;
}

void check_beta(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::ContractViolation, "beta must be in [0,1]");
}

}  // namespace

SampleSet::SampleSet(std::vector<double> v, std::string label_, std::string seed)
    : values(std::move(v)), label(std::move(label_)), seed_record(std::move(seed)) {
    if (values.empty()) throw Error(ErrorCode::EmptySample, "sample set '" + label + "' is empty");
    for (double x : values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::ContractViolation, "sample set '" + label + "' has a non-finite entry");
    }
}

double ks_two_sample(const SampleSet& A, const SampleSet& B) {
    std::vector<double> a = A.values, b = B.values;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
            x = a[i];
        } else {
            x = b[j];
        }
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_gaussian(const SampleSet& A, double mu, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) throw Error(ErrorCode::BadVariance, "variance must be positive");
    std::vector<double> a = A.values;
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    const double s = std::sqrt(2.0 * variance);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size();) {
        std::size_t k = i;
        while (k < a.size() && a[k] == a[i]) ++k;
        const double F = 0.5 * std::erfc(-(a[i] - mu) / s);
        d = std::max({d, static_cast<double>(k) / n - F, F - static_cast<double>(i) / n});
        i = k;
    }
    return d;
}

double holder_seminorm(const GridFunction& f, double beta, double a) {
    check_beta(beta);
    const Grid& g = f.grid();
    auto idx = window_points(g, a);
    auto v = finite_values(f);
    for (auto i : idx) {
        if (!std::isfinite(v[i])) throw Error(ErrorCode::ContractViolation, "Hoelder seminorm needs finite values");
    }
    double best = 0.0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
        for (std::size_t q = p + 1; q < idx.size(); ++q) {
            const double dx = g.point(idx[q]) - g.point(idx[p]);
            best = std::max(best, std::abs(v[idx[q]] - v[idx[p]]) / std::pow(dx, beta));
        }
    }
    return best;
}

double holder_seminorm_2d(std::span<const double> values, const Grid& zg, const Grid& xg, double beta, double a) {
    check_beta(beta);
    if (values.size() != zg.count * xg.count) throw Error(ErrorCode::ContractViolation, "value matrix size");
    auto iz = window_points(zg, a);
    auto ix = window_points(xg, a);
    struct P {
        double z, x, v;
    };
    std::vector<P> pts;
    for (auto i : iz) {
        for (auto j : ix) {
            const double v = values[i * xg.count + j];
            if (!std::isfinite(v)) throw Error(ErrorCode::ContractViolation, "Hoelder seminorm needs finite values");
            pts.push_back({zg.point(i), xg.point(j), v});
        }
    }
    double best = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        for (std::size_t q = p + 1; q < pts.size(); ++q) {
            const double d = std::max(std::abs(pts[p].z - pts[q].z), std::abs(pts[p].x - pts[q].x));
            best = std::max(best, std::abs(pts[p].v - pts[q].v) / std::pow(d, beta));
        }
    }
    return best;
}

double modulus_of_continuity(const GridFunction& f, double delta, double a) {
    if (!(delta > 0.0)) throw Error(ErrorCode::ContractViolation, "delta must be positive");
    const Grid& g = f.grid();
    auto idx = window_points(g, a);
    auto v = finite_values(f);
    const double lim = delta * (1.0 + 1e-12);
    double best = 0.0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
        for (std::size_t q = p + 1; q < idx.size(); ++q) {
            if (g.point(idx[q]) - g.point(idx[p]) > lim) break;
            best = std::max(best, std::abs(v[idx[q]] - v[idx[p]]));
        }
    }
    return best;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw Error(ErrorCode::EmptySample, "mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw Error(ErrorCode::EmptySample, "variance needs two values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double standard_error(std::span<const double> v) {
    return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw Error(ErrorCode::EmptySample, "correlation needs paired samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double median(std::vector<double> v) {
    if (v.empty()) throw Error(ErrorCode::EmptySample, "median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

nlohmann::json to_json(const Estimate& e) {
    return {{"name", e.name}, {"value", e.value}, {"stderr", e.stderr_}, {"n", e.n}};
}

MCurve m_curve(const Grid& window, const MSampler& sampler, std::vector<double> a_values, std::size_t replications,
               const RngKey& key, int threads) {
    std::sort(a_values.begin(), a_values.end());
    const std::size_t na = a_values.size();
    bool ok = na >= 3 && na % 2 == 1 && a_values[na / 2] == 0.0;
    for (std::size_t i = 0; ok && i < na; ++i) ok = a_values[i] == -a_values[na - 1 - i];
    for (std::size_t i = 1; ok && i < na; ++i) ok = a_values[i] > a_values[i - 1];
    if (!ok) throw Error(ErrorCode::BadAGrid, "a values must be distinct, contain 0 and come in +-a pairs");
    if (replications < 100) throw Error(ErrorCode::TooFewReplications, "m curve needs at least 100 replications");

    const std::size_t zero = na / 2;
    std::vector<double> M(replications * na);
    std::vector<double> Z(replications);
    parallel_for(replications, threads, [&](std::size_t r) {
        auto f = sampler(RngKey{key.master_seed, r, key.substream_id});
        if (f.size() != window.count) throw Error(ErrorCode::ContractViolation, "sampler returned wrong length");
        for (std::size_t k = 0; k < na; ++k) {
            double best = kNegInf;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double v = f[i] + a_values[k] * window.point(i);
                if (v >= best) {
                    best = v;
                    arg = i;
                }
            }
            M[r * na + k] = best;
            if (k == zero) Z[r] = window.point(arg);
        }
    });

    MCurve out;
    out.a_values = a_values;
    out.replications = replications;
    out.m_hat.resize(na);
    out.stderr_.resize(na);
    std::vector<double> col(replications);
    for (std::size_t k = 0; k < na; ++k) {
        for (std::size_t r = 0; r < replications; ++r) col[r] = M[r * na + k];
        out.m_hat[k] = mean(col);
        out.stderr_[k] = standard_error(col);
    }
    out.ez_hat = mean(Z);
    out.ez_stderr = standard_error(Z);

    const std::size_t kp = zero + 1, km = zero - 1;
    const double a = a_values[kp];
    out.a_probe = a;
    out.slope = (out.m_hat[kp] - out.m_hat[km]) / (2.0 * a);
    for (std::size_t r = 0; r < replications; ++r) col[r] = (M[r * na + kp] - M[r * na + km]) / (2.0 * a) - Z[r];
    out.slope_minus_ez = mean(col);
    out.slope_minus_ez_stderr = standard_error(col);
    out.kink = (out.m_hat[kp] - out.m_hat[zero]) / a - (out.m_hat[zero] - out.m_hat[km]) / a;

    out.worst_convexity = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < na; ++k) {
        const double lo = a_values[k - 1], mid = a_values[k], hi = a_values[k + 1];
        const double chord = ((hi - mid) * out.m_hat[k - 1] + (mid - lo) * out.m_hat[k + 1]) / (hi - lo);
        const double deficit = chord - out.m_hat[k];
        const double se = out.stderr_[k];
        if (deficit < -3.0 * se - 1e-12 * std::max(1.0, std::abs(out.m_hat[k]))) out.convex = false;
        if (se > 0.0) out.worst_convexity = std::min(out.worst_convexity, deficit / se);
    }
    return out;
}

std::vector<VarianceEstimate> increment_variance_profile(const std::vector<std::vector<double>>& samples,
                                                         std::span<const double> offsets) {
    if (samples.size() != offsets.size()) throw Error(ErrorCode::ContractViolation, "one sample per offset");
    std::vector<VarianceEstimate> out;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& s = samples[k];
        const std::size_t n = s.size();
        if (n < 30) throw Error(ErrorCode::TooFewReplications, "variance profile needs at least 30 replications");
        const double m = mean(s);
        double s1 = 0.0, s2 = 0.0;
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) {
            c[i] = s[i] - m;
            s1 += c[i];
            s2 += c[i] * c[i];
        }
        const double nn = static_cast<double>(n);
        const double var = (s2 - s1 * s1 / nn) / (nn - 1.0);
        // leave-one-out variances
        std::vector<double> loo(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a1 = s1 - c[i], a2 = s2 - c[i] * c[i];
            loo[i] = (a2 - a1 * a1 / (nn - 1.0)) / (nn - 2.0);
        }
        const double lm = mean(loo);
        double acc = 0.0;
        for (double v : loo) acc += (v - lm) * (v - lm);
        out.push_back({offsets[k], var, std::sqrt((nn - 1.0) / nn * acc), n});
    }
    return out;
}

}  // namespace kpz
