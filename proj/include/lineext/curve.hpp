#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

namespace detail {

/// Derivative-free golden-section minimizer on [a, b].
template <class F>
inline std::pair<double, double> golden_min(F&& f, double a, double b,
                                            double xtol = 1e-13,
                                            int max_iter = 200) {
    const double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int it = 0;
    while ((b - a) > xtol && it++ < max_iter) {
        if (f1 <= f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = f(x2);
        }
    }
    double xm = 0.5 * (a + b), fm = f(xm);
    if (f1 < fm) { fm = f1; xm = x1; }
    if (f2 < fm) { fm = f2; xm = x2; }
    return {xm, fm};
}

} // namespace detail

/// Finite trigonometric series c0 + sum_k (a_k cos k t + b_k sin k t).
struct TrigSeries {
    double c0 = 0.0;
    std::vector<double> cos_coef; // a_k, k = 1..
    std::vector<double> sin_coef; // b_k, k = 1..

    struct Derivs { double h, dh, d2h; };

    /// Value and first two derivatives in one pass (term-by-term, exact).
    Derivs eval_all(double t) const {
        Derivs d{c0, 0.0, 0.0};
        const std::size_t n = std::max(cos_coef.size(), sin_coef.size());
        const double c1 = std::cos(t), s1 = std::sin(t);
        double ck = 1.0, sk = 0.0; // cos(k t), sin(k t), currently k = 0
        for (std::size_t i = 0; i < n; ++i) {
            const double cn = ck * c1 - sk * s1;
            const double sn = sk * c1 + ck * s1;
            ck = cn; sk = sn;
            const double k = static_cast<double>(i + 1);
            const double a = i < cos_coef.size() ? cos_coef[i] : 0.0;
            const double b = i < sin_coef.size() ? sin_coef[i] : 0.0;
            d.h += a * cn + b * sn;
            d.dh += k * (b * cn - a * sn);
            d.d2h -= k * k * (a * cn + b * sn);
        }
        return d;
    }

    double eval(double t) const { return eval_all(t).h; }
};

enum class PlaneLabel { Interior, OnCurve, Exterior };

/// Closed angle interval [begin, end] with end > begin (length <= 2*pi).
struct AngleArc {
    double begin = 0.0;
    double end = 0.0;
    double length() const { return end - begin; }
    double midpoint() const { return 0.5 * (begin + end); }
    bool contains(double t) const {
        const double u = begin + wrap_angle(t - begin);
        return u <= end;
    }
};

/// Position of a point of the plane relative to the curve. For exterior
/// points carries the two tangency angles and the two arcs they cut.
struct PlaneClass {
    PlaneLabel label = PlaneLabel::Interior;
    double theta1 = 0.0; // tangency angles, theta1 < theta2, in [0, 2*pi)
    double theta2 = 0.0;
    AngleArc minus_arc; // arc where g < 0 (the side of the curve facing z)
    AngleArc plus_arc;  // arc where g > 0
    double min_g = 0.0; // refined minimum of g over the circle (diagnostic)
};

/// Convex curve with strictly positive curvature, stored through its
/// support function h(theta). The curve point with outward normal
/// e^{i theta} is lambda(theta) = (h + i h') e^{i theta}; the unit tangent
/// in this parametrization is exactly i e^{i theta}, and the radius of
/// curvature is rho = h + h''.
class SupportCurve {
public:
    static constexpr int kDefaultGrid = 4096;
    static constexpr int kDefaultScan = 1024;
    static constexpr double kThetaTol = 1e-12;

    static SupportCurve circle(double r) {
        if (!(r > 0.0)) throw ParseError("circle radius must be positive");
        TrigSeries s;
        s.c0 = r;
        SupportCurve c = build(std::move(s), kDefaultGrid);
        c.spec_ = "circle:" + fmt17(r);
        return c;
    }

    /// Support function of the ellipse x^2/a^2 + y^2/b^2 = 1, projected
    /// onto a finite cosine series until the sampled residual is at most
    /// kEllipseFitTol.
    static SupportCurve ellipse(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0))
            throw ParseError("ellipse semi-axes must be positive");
        auto truth = [a, b](double t) {
            const double c = std::cos(t), s = std::sin(t);
            return std::sqrt(a * a * c * c + b * b * s * s);
        };
        const int n = kDefaultGrid;
        std::vector<double> sample(n);
        for (int j = 0; j < n; ++j) sample[j] = truth(kTwoPi * j / n);

        TrigSeries series;
        double residual = 0.0;
        for (int harmonics = 8; harmonics <= 512; harmonics *= 2) {
            series = project(sample, harmonics);
            residual = 0.0;
            for (int j = 0; j < 2 * n; ++j) {
                const double t = kTwoPi * (j + 0.5) / (2 * n);
                residual = std::max(residual, std::abs(series.eval(t) - truth(t)));
            }
            if (residual <= kEllipseFitTol) break;
        }
        if (residual > kEllipseFitTol)
            throw ParseError("ellipse support series fit residual " +
                             fmt17(residual) + " exceeds " + fmt17(kEllipseFitTol));
        SupportCurve c = build(std::move(series), kDefaultGrid);
        c.fit_residual_ = residual;
        c.spec_ = "ellipse:" + fmt17(a) + "," + fmt17(b);
        return c;
    }

    static SupportCurve from_series(TrigSeries h, int grid = kDefaultGrid) {
        SupportCurve c = build(std::move(h), grid);
        c.spec_ = series_spec(c.h_);
        return c;
    }

    /// Parses "circle:R", "ellipse:A,B" or "fourier:c0,a1,b1,a2,b2,...".
    static SupportCurve parse(const std::string& spec);

    /// Skips the positivity checks. Only useful to exercise the failure
    /// paths of downstream code on bad curve data.
    static SupportCurve unvalidated(TrigSeries h, int grid = kDefaultGrid) {
        SupportCurve c;
        c.h_ = std::move(h);
        c.grid_ = grid;
        c.finish();
        c.spec_ = series_spec(c.h_);
        return c;
    }

    double h(double theta) const { return h_.eval(theta); }
    TrigSeries::Derivs h_derivs(double theta) const { return h_.eval_all(theta); }

    /// g(theta) = h(theta) - Re(z e^{-i theta}); equals
    /// Im((z - lambda)/lambda') and is positive iff z is strictly on the
    /// inner side of the tangent line at angle theta.
    double g(double theta, Complex z) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return h_.eval(theta) - (z.real() * c + z.imag() * s);
    }

    /// lambda(theta) = (h + i h') e^{i theta}.
    Complex point(double theta) const {
        const auto d = h_.eval_all(theta);
        return Complex(d.h, d.dh) * std::polar(1.0, theta);
    }

    /// Exactly i e^{i theta}; unit modulus by construction.
    Complex unit_tangent(double theta) const {
        return Complex(0.0, 1.0) * std::polar(1.0, theta);
    }

    Complex line_point(double theta, double t) const {
        return point(theta) + t * unit_tangent(theta);
    }

    double radius_of_curvature(double theta) const {
        const auto d = h_.eval_all(theta);
        return d.h + d.d2h;
    }

    double max_radius() const { return m_; }   // m = max |lambda|
    double min_support() const { return h_min_; }
    double fit_residual() const { return fit_residual_; }
    int grid_size() const { return grid_; }
    const std::string& spec() const { return spec_; }

    static double on_curve_tol(Complex z) { return 1e-9 * (1.0 + std::abs(z)); }

    PlaneClass classify(Complex z) const;

private:
    SupportCurve() = default;

    static SupportCurve build(TrigSeries h, int grid) {
        SupportCurve c;
        c.h_ = std::move(h);
        c.grid_ = grid;
        c.validate();
        c.finish();
        return c;
    }

    void validate() const {
        for (int j = 0; j < grid_; ++j) {
            const double t = kTwoPi * j / grid_;
            const auto d = h_.eval_all(t);
            if (!(d.h > 0.0))
                throw NotInterior("support function h <= 0 at theta = " + fmt17(t));
            if (!(d.h + d.d2h > 0.0))
                throw CurvatureViolation("h + h'' <= 0 at theta = " + fmt17(t) +
                                         " (value " + fmt17(d.h + d.d2h) + ")");
        }
    }

    void finish() {
        // Grid extrema of |lambda|^2 = h^2 + h'^2 and of h, then a local
        // golden-section polish so the reported m and h_min hold off-grid.
        auto r2 = [this](double t) {
            const auto d = h_.eval_all(t);
            return d.h * d.h + d.dh * d.dh;
        };
        const double step = kTwoPi / grid_;
        double best_r2 = -1.0, best_t = 0.0, best_h = 0.0, best_ht = 0.0;
        bool first = true;
        for (int j = 0; j < grid_; ++j) {
            const double t = step * j;
            const double v = r2(t);
            if (v > best_r2) { best_r2 = v; best_t = t; }
            const double hv = h_.eval(t);
            if (first || hv < best_h) { best_h = hv; best_ht = t; first = false; }
        }
        auto neg_r2 = [&](double t) { return -r2(t); };
        m_ = std::sqrt(-detail::golden_min(neg_r2, best_t - step, best_t + step).second);
        auto hf = [this](double t) { return h_.eval(t); };
        h_min_ = detail::golden_min(hf, best_ht - step, best_ht + step).second;
    }

    /// Discrete Fourier projection of uniformly sampled values onto the
    /// first `harmonics` modes; this is the least-squares fit in the
    /// truncated basis.
    static TrigSeries project(const std::vector<double>& sample, int harmonics) {
        const int n = static_cast<int>(sample.size());
        TrigSeries s;
        s.c0 = 0.0;
        for (double v : sample) s.c0 += v;
        s.c0 /= n;
        s.cos_coef.assign(harmonics, 0.0);
        s.sin_coef.assign(harmonics, 0.0);
        for (int k = 1; k <= harmonics; ++k) {
            double a = 0.0, b = 0.0;
            for (int j = 0; j < n; ++j) {
                const double t = kTwoPi * j * k / n;
                a += sample[j] * std::cos(t);
                b += sample[j] * std::sin(t);
            }
            s.cos_coef[k - 1] = 2.0 * a / n;
            s.sin_coef[k - 1] = 2.0 * b / n;
        }
        return s;
    }

    static std::string series_spec(const TrigSeries& s) {
        std::string out = "fourier:" + fmt17(s.c0);
        const std::size_t n = std::max(s.cos_coef.size(), s.sin_coef.size());
        for (std::size_t i = 0; i < n; ++i) {
            out += "," + fmt17(i < s.cos_coef.size() ? s.cos_coef[i] : 0.0);
            out += "," + fmt17(i < s.sin_coef.size() ? s.sin_coef[i] : 0.0);
        }
        return out;
    }

    static constexpr double kEllipseFitTol = 1e-10;

    TrigSeries h_;
    int grid_ = kDefaultGrid;
    int scan_ = kDefaultScan;
    double m_ = 0.0;
    double h_min_ = 0.0;
    double fit_residual_ = 0.0;
    std::string spec_;
};

inline PlaneClass SupportCurve::classify(Complex z) const {
    const int n = scan_;
    const double step = kTwoPi / n;
    const double tol = on_curve_tol(z);

    std::vector<double> gv(n);
    int imin = 0;
    for (int j = 0; j < n; ++j) {
        gv[j] = g(step * j, z);
        if (gv[j] < gv[imin]) imin = j;
    }
    auto gf = [&](double t) { return g(t, z); };
    const double t0 = step * imin;
    auto [tmin, gmin] = detail::golden_min(gf, t0 - step, t0 + step);

    PlaneClass pc;
    pc.min_g = gmin;
    if (gmin > tol) { pc.label = PlaneLabel::Interior; return pc; }
    if (gmin >= -tol) { pc.label = PlaneLabel::OnCurve; return pc; }
    pc.label = PlaneLabel::Exterior;

    // Sign-change brackets on the scan grid.
    std::vector<std::pair<double, double>> brackets;
    for (int j = 0; j < n; ++j) {
        const bool pa = gv[j] > 0.0;
        const bool pb = gv[(j + 1) % n] > 0.0;
        if (pa != pb) brackets.emplace_back(step * j, step * (j + 1));
    }
    if (brackets.size() > 2)
        throw DegenerateTangency("found " + std::to_string(brackets.size()) +
                                 " tangency brackets for z = " + fmt17(z.real()) +
                                 "+" + fmt17(z.imag()) + "i; curve data is not convex");
    if (brackets.size() < 2) {
        // Negative dip narrower than the scan step: bracket it around the
        // refined minimum instead.
        double lo = tmin, hi = tmin;
        int guard = 0;
        while (!(g(lo, z) > 0.0) && ++guard < n) lo -= step;
        guard = 0;
        while (!(g(hi, z) > 0.0) && ++guard < n) hi += step;
        brackets = {{lo, tmin}, {tmin, hi}};
    }

    auto bisect = [&](double a, double b) {
        const bool pa = g(a, z) > 0.0;
        while (b - a > kThetaTol) {
            const double mid = 0.5 * (a + b);
            if ((g(mid, z) > 0.0) == pa) a = mid; else b = mid;
        }
        return wrap_angle(0.5 * (a + b));
    };
    double r1 = bisect(brackets[0].first, brackets[0].second);
    double r2 = bisect(brackets[1].first, brackets[1].second);
    if (r1 > r2) std::swap(r1, r2);
    pc.theta1 = r1;
    pc.theta2 = r2;
    if (g(0.5 * (r1 + r2), z) < 0.0) {
        pc.minus_arc = {r1, r2};
        pc.plus_arc = {r2, r1 + kTwoPi};
    } else {
        pc.minus_arc = {r2, r1 + kTwoPi};
        pc.plus_arc = {r1, r2};
    }
    return pc;
}

inline SupportCurve SupportCurve::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ParseError("curve spec must look like kind:params, got \"" + spec + "\"");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);

    std::vector<double> nums;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        const std::string tok = body.substr(pos, comma == std::string::npos
                                                     ? std::string::npos
                                                     : comma - pos);
        try {
            std::size_t used = 0;
            nums.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError("bad number \"" + tok + "\" in curve spec \"" + spec + "\"");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }

    if (kind == "circle") {
        if (nums.size() != 1) throw ParseError("circle:R takes one parameter");
        return circle(nums[0]);
    }
    if (kind == "ellipse") {
        if (nums.size() != 2) throw ParseError("ellipse:A,B takes two parameters");
        return ellipse(nums[0], nums[1]);
    }
    if (kind == "fourier") {
        if (nums.empty()) throw ParseError("fourier spec needs at least c0");
        TrigSeries s;
        s.c0 = nums[0];
        for (std::size_t i = 1; i < nums.size(); i += 2) {
            s.cos_coef.push_back(nums[i]);
            s.sin_coef.push_back(i + 1 < nums.size() ? nums[i + 1] : 0.0);
        }
        return from_series(std::move(s));
    }
    throw ParseError("unknown curve kind \"" + kind + "\"");
}

} // namespace lineext
