#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "lineext/types.hpp"

namespace lineext {

/// Node budgets for the two contour rules: periodic trapezoid on full
/// closed loops, composite Gauss-Legendre panels on tangency-to-tangency
/// arcs. Both integrands are analytic in theta, so each rule converges
/// spectrally; the guard keeps Cauchy kernels away from their 1/dist blowup.
struct QuadratureConfig {
    int loop_nodes = 512;
    int arc_panels = 8;
    int arc_nodes_per_panel = 32;
    double guard_rel = 1e-3;    // min target distance relative to contour diameter
    int near_refine_factor = 8; // one-shot node refinement inside the guard band

    /// Scales both rules to roughly `n` nodes per contour pass.
    static QuadratureConfig with_total_nodes(int n) {
        QuadratureConfig c;
        c.loop_nodes = std::max(16, n);
        c.arc_panels = std::max(2, n / c.arc_nodes_per_panel);
        return c;
    }

    QuadratureConfig doubled() const {
        QuadratureConfig c = *this;
        c.loop_nodes *= 2;
        c.arc_panels *= 2;
        return c;
    }

    QuadratureConfig refined(int factor) const {
        QuadratureConfig c = *this;
        c.loop_nodes *= factor;
        c.arc_panels *= factor;
        return c;
    }
};

struct GaussLegendreRule {
    std::vector<double> node;   // on (-1, 1)
    std::vector<double> weight;
};

namespace detail {

inline GaussLegendreRule make_gauss_legendre(int q) {
    GaussLegendreRule r;
    r.node.resize(q);
    r.weight.resize(q);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
        double deriv = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            deriv = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / deriv;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.node[i] = -x;
        r.node[q - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        r.weight[i] = w;
        r.weight[q - 1 - i] = w;
    }
    return r;
}

} // namespace detail

inline const GaussLegendreRule& gauss_legendre(int q) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(q);
    if (it == cache.end()) it = cache.emplace(q, detail::make_gauss_legendre(q)).first;
    return it->second;
}

/// Trapezoid rule over one full period [0, 2*pi); spectrally accurate for
/// analytic periodic integrands.
template <class F>
inline Complex integrate_periodic(F&& f, int nodes) {
    Complex sum = 0.0;
    const double step = kTwoPi / nodes;
    for (int j = 0; j < nodes; ++j) sum += f(step * j);
    return sum * step;
}

/// Composite Gauss-Legendre quadrature over [t0, t1].
template <class F>
inline Complex integrate_arc(F&& f, double t0, double t1, int panels,
                             int nodes_per_panel) {
    const GaussLegendreRule& rule = gauss_legendre(nodes_per_panel);
    Complex sum = 0.0;
    const double panel_len = (t1 - t0) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = t0 + panel_len * p;
        const double mid = a + 0.5 * panel_len;
        const double half = 0.5 * panel_len;
        for (int i = 0; i < nodes_per_panel; ++i)
            sum += rule.weight[i] * f(mid + half * rule.node[i]) * half;
    }
    return sum;
}

/// Composite Gauss-Legendre with dyadic panel grading toward t_star. A
/// Cauchy kernel whose pole projects to parameter t_star at distance
/// pole_scale keeps per-panel spectral convergence only while the panel
/// containing it is no wider than a few pole_scale; the grading splits
/// panels toward t_star until that holds.
template <class F>
inline Complex integrate_arc_graded(F&& f, double t0, double t1, int base_panels,
                                    int nodes_per_panel, double t_star,
                                    double pole_scale) {
    std::vector<double> edges(base_panels + 1);
    for (int i = 0; i <= base_panels; ++i)
        edges[i] = t0 + (t1 - t0) * i / base_panels;
    if (pole_scale > 0.0 && t1 > t0) {
        const double ts = std::clamp(t_star, t0, t1);
        for (int round = 0; round < 64; ++round) {
            auto hi = std::upper_bound(edges.begin(), edges.end(), ts);
            if (hi == edges.begin()) hi = edges.begin() + 1;
            if (hi == edges.end()) hi = edges.end() - 1;
            const double b = *hi, a = *(hi - 1);
            if (b - a <= 4.0 * pole_scale) break;
            edges.insert(hi, 0.5 * (a + b));
        }
    }
    const GaussLegendreRule& rule = gauss_legendre(nodes_per_panel);
    Complex sum = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double half = 0.5 * (edges[p + 1] - edges[p]);
        for (int i = 0; i < nodes_per_panel; ++i)
            sum += rule.weight[i] * f(mid + half * rule.node[i]) * half;
    }
    return sum;
}

} // namespace lineext
