#pragma once

// Globally adaptive Gauss-Kronrod (7/15) integration of complex- or
// vector-valued functions of one real variable, and truncated mode sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace connarray::quadrature {

struct IntegrationSpec {
    double lower = 0.0;
    double upper = 1.0;
    std::vector<double> splits;  // sorted interior breakpoints
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_depth = 100;
    // Initial panels are no longer than this (0 disables). Used to seed
    // one panel per oscillation for e^{j alpha z} factors.
    double max_panel_length = 0.0;
    std::size_t max_panels = 200000;

    void validate() const {
        if (!(lower < upper)) throw std::invalid_argument("IntegrationSpec: lower must be < upper");
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("IntegrationSpec: tolerances must be positive");
        if (max_depth < 0) throw std::invalid_argument("IntegrationSpec: max_depth must be >= 0");
        if (!(max_panel_length >= 0.0))
            throw std::invalid_argument("IntegrationSpec: max_panel_length must be >= 0");
        double prev = lower;
        for (double s : splits) {
            if (!(s > prev) || !(s < upper))
                throw std::invalid_argument("IntegrationSpec: splits must be sorted and strictly inside (lower, upper)");
            prev = s;
        }
    }
};

template <class V>
struct IntegrationResult {
    V value;
    double error = 0.0;
    bool converged = true;  // false: accuracy warning, value is the best estimate
    std::size_t panels = 0;
    std::size_t evaluations = 0;
};

/// Collects accuracy warnings from integrals that missed their tolerance.
struct AccuracyLog {
    std::vector<std::string> warnings;

    template <class V>
    void check(const IntegrationResult<V>& res, const std::string& what) {
        if (!res.converged)
            warnings.push_back(what + ": error estimate " + std::to_string(res.error) + " above tolerance");
    }
};

namespace detail {

inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
inline double magnitude(double v) { return std::abs(v); }
template <class V>
    requires requires(const V& v) { v.norm(); }
double magnitude(const V& v) {
    return v.norm();
}

inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at xgk[1], xgk[3], xgk[5], xgk[7].
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Panel {
    double a;
    double b;
    int depth;
    V value;
    double error;
};

template <class V, class F>
Panel<V> gk15(F& f, double a, double b, int depth) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    V fv[15] = {};
    fv[7] = f(center);
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(center - half * xgk[i]);
        fv[14 - i] = f(center + half * xgk[i]);
    }
    V kron = fv[7] * wgk[7];
    V gauss = fv[7] * wg[3];
    for (int i = 0; i < 7; ++i) {
        const V pair = fv[i] + fv[14 - i];
        kron = kron + pair * wgk[i];
        if (i % 2 == 1) gauss = gauss + pair * wg[i / 2];
    }
    const V mean = kron * 0.5;
    double resabs = wgk[7] * magnitude(fv[7]);
    double resasc = wgk[7] * magnitude(V(fv[7] - mean));
    for (int i = 0; i < 7; ++i) {
        resabs += wgk[i] * (magnitude(fv[i]) + magnitude(fv[14 - i]));
        resasc += wgk[i] * (magnitude(V(fv[i] - mean)) + magnitude(V(fv[14 - i] - mean)));
    }
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = magnitude(V((kron - gauss) * half));
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
    err = std::max(err, roundoff);
    return {a, b, depth, V(kron * half), err};
}

// Order-independent pairwise reduction over panels sorted by position.
template <class V>
V pairwise_sum(const std::vector<Panel<V>>& panels, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return panels[lo].value;
    const std::size_t mid = lo + (hi - lo) / 2;
    return V(pairwise_sum(panels, lo, mid) + pairwise_sum(panels, mid, hi));
}

}  // namespace detail

/// Integrates f over [spec.lower, spec.upper]. f returns V, which may be a
/// complex scalar or an Eigen vector. The result's `converged` flag is
/// cleared when the tolerance could not be met within max_depth/max_panels.
template <class F>
auto integrate(F&& f, const IntegrationSpec& spec) {
    using V = std::decay_t<decltype(f(spec.lower))>;
    spec.validate();

    std::vector<double> edges;
    edges.push_back(spec.lower);
    for (double s : spec.splits) edges.push_back(s);
    edges.push_back(spec.upper);

    std::vector<detail::Panel<V>> done;
    auto cmp = [](const detail::Panel<V>& x, const detail::Panel<V>& y) {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a;
    };
    std::priority_queue<detail::Panel<V>, std::vector<detail::Panel<V>>, decltype(cmp)> work(cmp);

    IntegrationResult<V> out;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double len = edges[i + 1] - edges[i];
        std::size_t pieces = 1;
        if (spec.max_panel_length > 0.0)
            pieces = static_cast<std::size_t>(std::ceil(len / spec.max_panel_length));
        pieces = std::max<std::size_t>(pieces, 1);
        for (std::size_t p = 0; p < pieces; ++p) {
            const double a = edges[i] + len * double(p) / double(pieces);
            const double b = p + 1 == pieces ? edges[i + 1] : edges[i] + len * double(p + 1) / double(pieces);
            work.push(detail::gk15<V>(f, a, b, 0));
            out.evaluations += 15;
        }
    }

    // Running sums for the stopping test; the reported value is recomputed
    // by a deterministic pairwise reduction at the end.
    V running{};
    double running_err = 0.0;
    double frozen_err = 0.0;
    {
        auto copy = work;
        bool first = true;
        while (!copy.empty()) {
            running = first ? copy.top().value : V(running + copy.top().value);
            running_err += copy.top().error;
            first = false;
            copy.pop();
        }
    }

    while (!work.empty()) {
        const double target = std::max(spec.abs_tol, spec.rel_tol * detail::magnitude(running));
        if (running_err <= target) break;
        if (work.size() + done.size() >= spec.max_panels) {
            out.converged = false;
            break;
        }
        detail::Panel<V> worst = work.top();
        work.pop();
        if (worst.depth >= spec.max_depth || !(worst.b - worst.a > 1024.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(worst.a), std::abs(worst.b)))) {
            // Cannot be refined further; once such panels alone exceed the
            // target no amount of work elsewhere helps.
            frozen_err += worst.error;
            done.push_back(worst);
            if (frozen_err > target) {
                out.converged = false;
                break;
            }
            continue;
        }
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::gk15<V>(f, worst.a, mid, worst.depth + 1);
        auto right = detail::gk15<V>(f, mid, worst.b, worst.depth + 1);
        out.evaluations += 30;
        running = V(running - worst.value + left.value + right.value);
        running_err += left.error + right.error - worst.error;
        work.push(std::move(left));
        work.push(std::move(right));
    }

    while (!work.empty()) {
        done.push_back(work.top());
        work.pop();
    }
    std::sort(done.begin(), done.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    out.value = detail::pairwise_sum(done, 0, done.size());
    out.error = 0.0;
    for (const auto& p : done) out.error += p.error;
    out.panels = done.size();
    const double target = std::max(spec.abs_tol, spec.rel_tol * detail::magnitude(out.value));
    if (out.error > target) out.converged = false;
    return out;
}

enum class TailAcceleration { none, asymptotic_tail };

struct TailSumSpec {
    int l_max = 1;
    TailAcceleration acceleration = TailAcceleration::none;
    // Used with asymptotic_tail: term(l) ~ tail_coefficient / |l|^tail_power
    // for large |l|, summed over both signs of l. tail_power must exceed 1.
    std::complex<double> tail_coefficient{0.0, 0.0};
    double tail_power = 2.0;

    void validate() const {
        if (l_max < 1) throw std::invalid_argument("TailSumSpec: l_max must be >= 1");
        if (acceleration == TailAcceleration::asymptotic_tail && !(tail_power > 1.0))
            throw std::invalid_argument("TailSumSpec: asymptotic tail needs tail_power > 1");
    }
};

/// Sum of term(l) over |l| <= l_max, accumulated from the outermost pair
/// inwards. With asymptotic_tail the integral of the caller's power-law
/// tail from l_max + 1/2 to infinity (both signs) is added.
template <class F>
auto mode_sum(F&& term, const TailSumSpec& spec) {
    spec.validate();
    using V = std::decay_t<decltype(term(0))>;
    V sum{};
    for (int l = spec.l_max; l >= 1; --l) sum = V(sum + V(term(l) + term(-l)));
    sum = V(sum + term(0));
    if (spec.acceleration == TailAcceleration::asymptotic_tail) {
        const double p = spec.tail_power;
        const double edge = spec.l_max + 0.5;
        const std::complex<double> tail = 2.0 * spec.tail_coefficient * std::pow(edge, 1.0 - p) / (p - 1.0);
        if constexpr (std::is_floating_point_v<V>) sum += tail.real();
        else sum = V(sum + V(tail));
    }
    return sum;
}

}  // namespace connarray::quadrature
