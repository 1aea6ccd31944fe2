#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lineext/curve.hpp"
#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

/// One sample of a parametrized contour: position and exact theta-derivative.
struct LoopSample {
    double theta;
    Complex pos;
    Complex dpos;
};

/// Oriented sampled contour. `closed` loops cover a full period; arc loops
/// run between two tangency angles and both endpoints sit at the closure
/// point. Samples are ordered by increasing theta and refined so that no
/// chord exceeds max_chord_rel times the loop diameter.
struct Loop {
    std::vector<LoopSample> samples;
    bool closed = true;
    std::optional<Complex> closure;
    std::string tag;     // "full" | "inner" | "outer" | "branch+" | "branch-"
    int orientation = 0; // +1 counterclockwise, -1 clockwise (shoelace sign)

    /// Bounding-box diagonal; a 2-approximation of the true diameter,
    /// which is all the refinement and guard logic needs.
    double diameter() const {
        double re0 = samples.front().pos.real(), re1 = re0;
        double im0 = samples.front().pos.imag(), im1 = im0;
        for (const auto& s : samples) {
            re0 = std::min(re0, s.pos.real());
            re1 = std::max(re1, s.pos.real());
            im0 = std::min(im0, s.pos.imag());
            im1 = std::max(im1, s.pos.imag());
        }
        return std::hypot(re1 - re0, im1 - im0);
    }

    double min_distance(Complex p) const {
        double d = std::abs(p - samples.front().pos);
        for (const auto& s : samples) d = std::min(d, std::abs(p - s.pos));
        return d;
    }

    /// Distance from p to the sampled polyline (point-to-segment), a much
    /// tighter bound than the nearest sample when p sits close to a chord.
    double min_distance_segments(Complex p) const {
        double best = std::abs(p - samples.front().pos);
        const std::size_t n = samples.size();
        const std::size_t last = closed ? n : n - 1;
        for (std::size_t i = 0; i < last; ++i) {
            const Complex a = samples[i].pos;
            const Complex b = samples[(i + 1) % n].pos;
            const Complex ab = b - a;
            const double len2 = std::norm(ab);
            double t = 0.0;
            if (len2 > 0.0) {
                t = ((p.real() - a.real()) * ab.real() +
                     (p.imag() - a.imag()) * ab.imag()) / len2;
                t = std::clamp(t, 0.0, 1.0);
            }
            best = std::min(best, std::abs(p - (a + t * ab)));
        }
        return best;
    }

    /// Sample farthest from the closure point (a safe representative of
    /// the arc interior), or just the midpoint sample for closed loops.
    const LoopSample& representative() const {
        if (!closure) return samples[samples.size() / 2];
        std::size_t best = 0;
        double dist = -1.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = std::abs(samples[i].pos - *closure);
            if (d > dist) { dist = d; best = i; }
        }
        return samples[best];
    }
};

struct SliceOptions {
    int base_samples = 512;
    double max_chord_rel = 1e-2; // refinement target relative to diameter
    int max_refine_rounds = 12;
};

/// w-coordinate of the point of the complexified tangent line at angle
/// theta lying over z:  w(theta) = conj(lambda) - e^{-2 i theta} (z - lambda).
inline Complex gamma_point(const SupportCurve& curve, Complex z, double theta) {
    const Complex lam = curve.point(theta);
    return std::conj(lam) - std::polar(1.0, -2.0 * theta) * (z - lam);
}

/// Exact theta-derivative of gamma_point: 2 i e^{-2 i theta} (z - lambda).
inline Complex gamma_derivative(const SupportCurve& curve, Complex z, double theta) {
    const Complex lam = curve.point(theta);
    return Complex(0.0, 2.0) * std::polar(1.0, -2.0 * theta) * (z - lam);
}

/// z-coordinate of the point of the line at angle theta lying over w:
/// z(theta) = lambda - e^{2 i theta} (w - conj(lambda)).
inline Complex sigma_point(const SupportCurve& curve, Complex w, double theta) {
    const Complex lam = curve.point(theta);
    return lam - std::polar(1.0, 2.0 * theta) * (w - std::conj(lam));
}

inline Complex sigma_derivative(const SupportCurve& curve, Complex w, double theta) {
    const Complex lam = curve.point(theta);
    return Complex(0.0, -2.0) * std::polar(1.0, 2.0 * theta) * (w - std::conj(lam));
}

namespace detail {

inline int polygon_orientation(const std::vector<LoopSample>& samples) {
    double area2 = 0.0;
    const std::size_t n = samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = samples[i].pos;
        const Complex b = samples[(i + 1) % n].pos;
        area2 += a.real() * b.imag() - b.real() * a.imag();
    }
    return area2 > 0.0 ? 1 : area2 < 0.0 ? -1 : 0;
}

/// Adaptive theta-subdivision until every chord (including the wrap chord
/// for closed loops) is below max_chord_rel * diameter.
template <class Eval>
inline void refine_loop(Loop& loop, Eval&& eval, const SliceOptions& opt) {
    for (int round = 0; round < opt.max_refine_rounds; ++round) {
        const double target = opt.max_chord_rel * loop.diameter();
        if (!(target > 0.0)) return; // degenerate (single-point) loop
        std::vector<LoopSample> refined;
        refined.reserve(loop.samples.size() * 2);
        bool changed = false;
        const std::size_t n = loop.samples.size();
        const std::size_t last = loop.closed ? n : n - 1;
        for (std::size_t i = 0; i < last; ++i) {
            const auto& a = loop.samples[i];
            const auto& b = loop.samples[(i + 1) % n];
            refined.push_back(a);
            double tb = b.theta;
            if (loop.closed && i + 1 == n) tb += kTwoPi;
            if (std::abs(b.pos - a.pos) > target) {
                refined.push_back(eval(0.5 * (a.theta + tb)));
                changed = true;
            }
        }
        if (!loop.closed) refined.push_back(loop.samples.back());
        loop.samples = std::move(refined);
        if (!changed) return;
    }
}

template <class Eval>
inline Loop sample_closed(Eval&& eval, const SliceOptions& opt, std::string tag) {
    Loop loop;
    loop.closed = true;
    loop.tag = std::move(tag);
    loop.samples.reserve(opt.base_samples);
    for (int j = 0; j < opt.base_samples; ++j)
        loop.samples.push_back(eval(kTwoPi * j / opt.base_samples));
    refine_loop(loop, eval, opt);
    loop.orientation = polygon_orientation(loop.samples);
    return loop;
}

template <class Eval>
inline Loop sample_arc(Eval&& eval, double t0, double t1, Complex closure,
                       const SliceOptions& opt, std::string tag) {
    Loop loop;
    loop.closed = false;
    loop.closure = closure;
    loop.tag = std::move(tag);
    const int n = std::max(opt.base_samples, 8);
    loop.samples.reserve(n + 1);
    for (int j = 0; j <= n; ++j)
        loop.samples.push_back(eval(t0 + (t1 - t0) * j / n));
    refine_loop(loop, eval, opt);
    loop.orientation = polygon_orientation(loop.samples);
    return loop;
}

} // namespace detail

/// Integer winding of a sampled loop around p, by accumulated argument.
/// Throws TooCloseToContour when p is so close to the polyline that a
/// single step turns by almost pi, or when the total fails to land on an
/// integer within the 0.25 guard.
inline int winding_number(const Loop& loop, Complex p) {
    const double diam = loop.diameter();
    if (loop.min_distance(p) < 1e-9 * (1.0 + diam))
        throw TooCloseToContour("winding: point on the contour");
    double total = 0.0;
    const std::size_t n = loop.samples.size();
    Complex prev = loop.samples[0].pos - p;
    for (std::size_t i = 1; i <= n; ++i) {
        const Complex cur = loop.samples[i % n].pos - p;
        const double step = std::arg(cur / prev);
        if (!(std::abs(step) <= 2.9))
            throw TooCloseToContour("winding: sampling too coarse near the point");
        total += step;
        prev = cur;
    }
    const double turns = total / kTwoPi;
    const double rounded = std::round(turns);
    if (!(std::abs(turns - rounded) < 0.25))
        throw TooCloseToContour("winding: non-integer accumulated argument " +
                                fmt17(turns));
    return static_cast<int>(rounded);
}

/// Winding count with on-demand subdivision: segments subtending a wide
/// angle at p are split through the analytic parametrization until every
/// step is small, so points much closer to the contour than the stored
/// sample spacing still get an exact count.
template <class PosFn>
inline int winding_number_adaptive(const Loop& loop, Complex p, PosFn&& pos_at) {
    const double diam = loop.diameter();
    if (loop.min_distance(p) < 1e-9 * (1.0 + diam))
        throw TooCloseToContour("winding: point on the contour");
    double total = 0.0;
    struct Seg { double ta; Complex pa; double tb; Complex pb; int depth; };
    std::vector<Seg> stack;
    const std::size_t n = loop.samples.size();
    const std::size_t last = loop.closed ? n : n - 1;
    for (std::size_t i = 0; i < last; ++i) {
        const auto& a = loop.samples[i];
        const auto& b = loop.samples[(i + 1) % n];
        double tb = b.theta;
        if (loop.closed && i + 1 == n) tb += kTwoPi;
        stack.push_back({a.theta, a.pos, tb, b.pos, 0});
        while (!stack.empty()) {
            const Seg s = stack.back();
            stack.pop_back();
            const double step = std::arg((s.pb - p) / (s.pa - p));
            if (std::abs(step) <= 0.5 || s.depth >= 48) {
                if (!(std::abs(step) <= 2.9))
                    throw TooCloseToContour("winding: point too close to resolve");
                total += step;
                continue;
            }
            const double tm = 0.5 * (s.ta + s.tb);
            const Complex pm = pos_at(tm);
            stack.push_back({s.ta, s.pa, tm, pm, s.depth + 1});
            stack.push_back({tm, pm, s.tb, s.pb, s.depth + 1});
        }
    }
    const double turns = total / kTwoPi;
    const double rounded = std::round(turns);
    if (!(std::abs(turns - rounded) < 0.25))
        throw TooCloseToContour("winding: non-integer accumulated argument " +
                                fmt17(turns));
    return static_cast<int>(rounded);
}

/// The slice {w : (z, w) in M}. For interior z a single closed loop; for
/// exterior z two arc loops joined at conj(z), the inner one traced over
/// the tangency arc facing z.
struct GammaSlice {
    Complex z;
    PlaneClass plane;
    std::vector<Loop> loops; // [full] or [inner, outer]

    bool split() const { return loops.size() == 2; }
    const Loop& full() const { return loops.front(); }
    const Loop& inner() const { return loops.front(); }
    const Loop& outer() const { return loops.back(); }
};

inline GammaSlice build_gamma(const SupportCurve& curve, Complex z,
                              const SliceOptions& opt = {}) {
    GammaSlice slice;
    slice.z = z;
    slice.plane = curve.classify(z);
    auto eval = [&](double t) {
        return LoopSample{t, gamma_point(curve, z, t), gamma_derivative(curve, z, t)};
    };
    if (slice.plane.label == PlaneLabel::OnCurve)
        throw OnCurveError("build_gamma: z is on the curve within tolerance");
    if (slice.plane.label == PlaneLabel::Interior) {
        slice.loops.push_back(detail::sample_closed(eval, opt, "full"));
        return slice;
    }
    const Complex closure = std::conj(z);
    Loop inner = detail::sample_arc(eval, slice.plane.minus_arc.begin,
                                    slice.plane.minus_arc.end, closure, opt, "inner");
    Loop outer = detail::sample_arc(eval, slice.plane.plus_arc.begin,
                                    slice.plane.plus_arc.end, closure, opt, "outer");
    const double ctol = 1e-9 * (1.0 + std::abs(z));
    for (const Loop* l : {&inner, &outer}) {
        if (std::abs(l->samples.front().pos - closure) > ctol ||
            std::abs(l->samples.back().pos - closure) > ctol)
            throw Error("build_gamma: loop endpoints missed the closure point");
    }
    slice.loops.push_back(std::move(inner));
    slice.loops.push_back(std::move(outer));
    return slice;
}

/// The slice {z : (z, w) in M}, i.e. the same surface cut the other way.
/// Pointwise it is the conjugate of build_gamma at conj(w); built here from
/// its own parametrization so the identity stays testable.
inline GammaSlice z_slice(const SupportCurve& curve, Complex w,
                          const SliceOptions& opt = {}) {
    GammaSlice slice;
    slice.z = w; // fixed coordinate of this slice
    slice.plane = curve.classify(std::conj(w));
    auto eval = [&](double t) {
        return LoopSample{t, sigma_point(curve, w, t), sigma_derivative(curve, w, t)};
    };
    if (slice.plane.label == PlaneLabel::OnCurve)
        throw OnCurveError("z_slice: conj(w) is on the curve within tolerance");
    if (slice.plane.label == PlaneLabel::Interior) {
        slice.loops.push_back(detail::sample_closed(eval, opt, "full"));
        return slice;
    }
    const Complex closure = std::conj(w);
    slice.loops.push_back(detail::sample_arc(eval, slice.plane.minus_arc.begin,
                                             slice.plane.minus_arc.end, closure, opt,
                                             "inner"));
    slice.loops.push_back(detail::sample_arc(eval, slice.plane.plus_arc.begin,
                                             slice.plane.plus_arc.end, closure, opt,
                                             "outer"));
    return slice;
}

/// Winding of the full slice parametrization around w = 0 (defined whenever
/// 0 stays clear of the contour): -1 for interior z, -2 once |z| is large
/// enough that the -e^{-2 i theta} z term dominates.
inline int slice_index(const SupportCurve& curve, Complex z,
                       const SliceOptions& opt = {}) {
    const PlaneClass pc = curve.classify(z);
    if (pc.label == PlaneLabel::OnCurve)
        throw OnCurveError("slice_index: z is on the curve within tolerance");
    auto eval = [&](double t) {
        return LoopSample{t, gamma_point(curve, z, t), gamma_derivative(curve, z, t)};
    };
    const Loop loop = detail::sample_closed(eval, opt, "full");
    return winding_number(loop, Complex(0.0, 0.0));
}

enum class Region { OmegaPlus, OmegaMinus, OmegaZero, OnM };

/// Classification of a point of C^2 against the surface, with the numbers
/// that produced it.
struct RegionLabel {
    Region region = Region::OmegaZero;
    bool used_fast_path = false;
    std::optional<int> winding_inner;
    std::optional<int> winding_outer;
    std::optional<double> dist_to_m;   // min over theta of |w - w(theta)|
    std::optional<double> nearest_theta;
    bool on_sigma = false; // |w - conj(z)| within tolerance
    bool on_pi_e = false;  // on_sigma with z exterior
};

struct ClassifyOptions {
    bool use_fast_path = true;
    SliceOptions slice;
};

inline double on_m_tol(Complex z, Complex w) {
    return 1e-8 * (1.0 + std::abs(z) + std::abs(w));
}

namespace detail {

/// Min over theta of |w - gamma_point(z, theta)|: scan plus golden polish.
inline std::pair<double, double> nearest_on_slice(const SupportCurve& curve,
                                                  Complex z, Complex w,
                                                  int scan = 1024) {
    const double step = kTwoPi / scan;
    double best = 0.0, bestd = -1.0;
    for (int j = 0; j < scan; ++j) {
        const double t = step * j;
        const double d = std::abs(w - gamma_point(curve, z, t));
        if (bestd < 0.0 || d < bestd) { bestd = d; best = t; }
    }
    auto f = [&](double t) { return std::abs(w - gamma_point(curve, z, t)); };
    auto [tmin, dmin] = golden_min(f, best - step, best + step);
    return {wrap_angle(tmin), dmin};
}

} // namespace detail

/// Labels (z, w) as one of the three components of the complement of M, or
/// as on M within a scale-aware band. Winding numbers of the slice loops
/// decide the component; the 2m estimate gives a short-circuit far from
/// the surface.
inline RegionLabel classify_point2(const SupportCurve& curve, Complex z, Complex w,
                                   const ClassifyOptions& opt = {}) {
    const double m = curve.max_radius();
    RegionLabel out;
    out.on_sigma = std::abs(w - std::conj(z)) <= 1e-9 * (1.0 + std::abs(z));

    if (opt.use_fast_path) {
        // The whole surface satisfies ||w| - |z|| <= 2m, so these points
        // cannot be on or inside the slice contours.
        if (std::abs(w) - std::abs(z) > 2.0 * m) {
            out.region = Region::OmegaPlus;
            out.used_fast_path = true;
            return out;
        }
        if (std::abs(z) - std::abs(w) > 2.0 * m) {
            out.region = Region::OmegaMinus;
            out.used_fast_path = true;
            return out;
        }
    }

    auto [theta_near, dist] = detail::nearest_on_slice(curve, z, w);
    out.dist_to_m = dist;
    out.nearest_theta = theta_near;
    if (dist <= on_m_tol(z, w)) {
        out.region = Region::OnM;
        out.on_pi_e = out.on_sigma &&
                      curve.classify(z).label == PlaneLabel::Exterior;
        return out;
    }

    const PlaneClass pc = curve.classify(z);
    auto pos_at = [&](double t) { return gamma_point(curve, z, t); };
    if (pc.label != PlaneLabel::Exterior) {
        // Single closed slice loop (the inner loop is empty here; a z in
        // the on-curve band has a collapsed inner loop, same topology).
        auto eval = [&](double t) {
            return LoopSample{t, gamma_point(curve, z, t),
                              gamma_derivative(curve, z, t)};
        };
        const Loop loop = detail::sample_closed(eval, opt.slice, "full");
        const int wind = winding_number_adaptive(loop, w, pos_at);
        out.winding_outer = wind;
        out.region = wind == 0 ? Region::OmegaPlus : Region::OmegaZero;
        return out;
    }

    const GammaSlice slice = build_gamma(curve, z, opt.slice);
    const int wi = winding_number_adaptive(slice.inner(), w, pos_at);
    const int wo = winding_number_adaptive(slice.outer(), w, pos_at);
    out.winding_inner = wi;
    out.winding_outer = wo;
    if (wi != 0) out.region = Region::OmegaMinus;
    else if (wo != 0) out.region = Region::OmegaZero;
    else out.region = Region::OmegaPlus;
    return out;
}

/// Classify many w against one prebuilt gamma slice (used for rasters,
/// where rebuilding the slice per point would dominate). OnM uses the
/// distance to the sampled contour. Expects a build_gamma slice; the
/// conjugate slices from z_slice have swapped coordinate semantics.
inline RegionLabel classify_with_slice(const GammaSlice& slice, Complex w) {
    RegionLabel out;
    const Complex z = slice.z;
    out.on_sigma = std::abs(w - std::conj(z)) <= 1e-9 * (1.0 + std::abs(z));
    double dist = slice.loops.front().min_distance(w);
    for (const auto& l : slice.loops) dist = std::min(dist, l.min_distance(w));
    out.dist_to_m = dist;
    if (dist <= on_m_tol(z, w)) {
        out.region = Region::OnM;
        out.on_pi_e = out.on_sigma && slice.plane.label == PlaneLabel::Exterior;
        return out;
    }
    if (!slice.split()) {
        const int wind = winding_number(slice.full(), w);
        out.winding_outer = wind;
        out.region = wind == 0 ? Region::OmegaPlus : Region::OmegaZero;
        return out;
    }
    const int wi = winding_number(slice.inner(), w);
    const int wo = winding_number(slice.outer(), w);
    out.winding_inner = wi;
    out.winding_outer = wo;
    if (wi != 0) out.region = Region::OmegaMinus;
    else if (wo != 0) out.region = Region::OmegaZero;
    else out.region = Region::OmegaPlus;
    return out;
}

/// Intersection of the surface with the quadric {z w = c}, as two branch
/// loops in the z coordinate. On the line at angle theta the quadric cuts
/// the points z = (h +/- i s) e^{i theta} with s = sqrt(c - h^2) tracked
/// continuously in theta; the paired w is (h -/+ i s) e^{-i theta} = c / z.
struct KSlice {
    Complex c;
    bool admissible = false; // |c| above the branch-point margin
    bool degenerate = false; // c in the positive-real band
    std::vector<Loop> loops; // [branch+, branch-]

    /// Loop with the larger mean |z|.
    const Loop& outer() const { return loops[outer_index]; }
    const Loop& inner() const { return loops[1 - outer_index]; }
    int outer_index = 0;
};

struct KSliceOptions {
    double delta_c = 0.2;       // admissibility margin over m^2
    int samples = 512;
    double return_tol = 1e-8;   // branch must close up after one period
};

inline KSlice k_slice(const SupportCurve& curve, Complex c,
                      const KSliceOptions& opt = {}) {
    const double m = curve.max_radius();
    if (std::abs(c) <= m * m * (1.0 + opt.delta_c))
        throw InadmissibleC("k_slice: |c| = " + fmt17(std::abs(c)) +
                            " inside the branch-point margin " +
                            fmt17(m * m * (1.0 + opt.delta_c)));

    KSlice out;
    out.c = c;
    out.admissible = true;
    out.degenerate = c.real() > 0.0 && std::abs(c.imag()) <= 1e-12 * std::abs(c);

    // The quadratic for the line parameter has linear coefficient
    // b = Im(lambda' conj(lambda)), which in this parametrization is h
    // itself. Cross-check the identity on a few angles.
    for (int j = 0; j < 8; ++j) {
        const double t = kTwoPi * j / 8.0;
        const double b = std::imag(curve.unit_tangent(t) * std::conj(curve.point(t)));
        if (std::abs(b - curve.h(t)) > 1e-10 * (1.0 + std::abs(b)))
            throw Error("k_slice: b = Im(lambda' conj(lambda)) != h(theta)");
    }

    const int n = opt.samples;
    // Continuous branch of sqrt(c - h^2): at each step pick the square
    // root closer to the previous value. In the degenerate (positive real
    // c) case the radicand stays positive real, so this reduces to the
    // real square root and the two branch loops coincide as sets with
    // {|z| = sqrt(c), w = conj(z)}.
    std::vector<double> theta(n);
    std::vector<Complex> s(n);
    Complex prev = std::sqrt(c - Complex(curve.h(0.0) * curve.h(0.0)));
    for (int j = 0; j < n; ++j) {
        theta[j] = kTwoPi * j / n;
        const double hv = curve.h(theta[j]);
        const Complex r = std::sqrt(c - Complex(hv * hv));
        s[j] = std::abs(r - prev) <= std::abs(-r - prev) ? r : -r;
        prev = s[j];
    }
    {
        const double hv = curve.h(0.0);
        const Complex r = std::sqrt(c - Complex(hv * hv));
        const Complex back = std::abs(r - prev) <= std::abs(-r - prev) ? r : -r;
        if (std::abs(back - s[0]) > opt.return_tol * (1.0 + std::abs(s[0])))
            throw BranchTrackingError("k_slice: branch failed to return to start");
    }

    auto make_loop = [&](double sign, std::string tag) {
        Loop loop;
        loop.closed = true;
        loop.tag = std::move(tag);
        loop.samples.reserve(n);
        for (int j = 0; j < n; ++j) {
            const auto d = curve.h_derivs(theta[j]);
            const Complex sv = sign * s[j];
            const Complex rot = std::polar(1.0, theta[j]);
            const Complex pos = (d.h + Complex(0.0, 1.0) * sv) * rot;
            // s' = -h h' / s on the tracked branch; s != 0 by admissibility
            const Complex ds = -d.h * d.dh / sv;
            const Complex dpos =
                (Complex(d.dh, 0.0) + Complex(0.0, 1.0) * ds) * rot +
                Complex(0.0, 1.0) * (d.h + Complex(0.0, 1.0) * sv) * rot;
            loop.samples.push_back({theta[j], pos, dpos});
        }
        loop.orientation = detail::polygon_orientation(loop.samples);
        return loop;
    };
    out.loops.push_back(make_loop(+1.0, "branch+"));
    out.loops.push_back(make_loop(-1.0, "branch-"));

    double mean0 = 0.0, mean1 = 0.0;
    for (const auto& sm : out.loops[0].samples) mean0 += std::abs(sm.pos);
    for (const auto& sm : out.loops[1].samples) mean1 += std::abs(sm.pos);
    out.outer_index = mean0 >= mean1 ? 0 : 1;
    return out;
}

} // namespace lineext
