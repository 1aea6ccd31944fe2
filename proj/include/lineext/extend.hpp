#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lineext/curve.hpp"
#include "lineext/linedata.hpp"
#include "lineext/quadrature.hpp"
#include "lineext/slices.hpp"
#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

enum class Method { CauchyMinus, CauchyPlus, CauchyAnnulus, GlobalFit, OnM };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::CauchyMinus: return "CauchyMinus";
        case Method::CauchyPlus: return "CauchyPlus";
        case Method::CauchyAnnulus: return "CauchyAnnulus";
        case Method::GlobalFit: return "GlobalFit";
        case Method::OnM: return "OnM";
    }
    return "unknown";
}

struct ExtensionResult {
    Complex value{0.0, 0.0};
    Method method = Method::CauchyMinus;
    RegionLabel region;
    double err_est = 0.0; // |value at doubled nodes - value at base nodes|
};

namespace detail {

/// Node-refinement factor for a target at relative distance `rel` from the
/// contour: 1 outside the guard band, near_refine_factor once inside it,
/// and an error when even that cannot resolve the kernel.
inline int guard_factor(double rel, const QuadratureConfig& cfg, const char* who) {
    if (rel >= cfg.guard_rel) return 1;
    if (rel >= cfg.guard_rel / cfg.near_refine_factor) return cfg.near_refine_factor;
    throw TooCloseToContour(std::string(who) + ": target at relative distance " +
                            fmt17(rel) + " from the contour");
}

/// Cauchy integral (1 / 2 pi i) int F dzeta / (zeta - target) over an open
/// arc, normalized so the target is enclosed with winding +1. Panels are
/// graded toward the parameter nearest the target, so near-contour points
/// stay resolvable. Returns the doubled-panel value and the node-doubling
/// error estimate.
template <class Pos, class Deriv, class FieldVal>
inline std::pair<Complex, double> cauchy_over_arc(const AngleArc& arc, Pos&& pos,
                                                  Deriv&& deriv, FieldVal&& fval,
                                                  Complex target, int winding,
                                                  int factor,
                                                  const QuadratureConfig& cfg) {
    // parameter of the contour point nearest the target, by scan + polish
    double t_star = arc.begin, best = 1e300;
    for (int j = 0; j <= 256; ++j) {
        const double t = arc.begin + arc.length() * j / 256.0;
        const double d = std::abs(pos(t) - target);
        if (d < best) { best = d; t_star = t; }
    }
    auto dist = [&](double t) { return std::abs(pos(t) - target); };
    const double step = arc.length() / 256.0;
    auto [tmin, dmin] = golden_min(dist, t_star - step, t_star + step);
    tmin = std::clamp(tmin, arc.begin, arc.end);
    const double speed = std::abs(deriv(tmin));
    const double pole_scale = speed > 0.0 ? dmin / speed : 0.0;

    auto integrand = [&](double t) {
        const Complex zeta = pos(t);
        return fval(t, zeta) * deriv(t) / (zeta - target);
    };
    const Complex norm = Complex(0.0, kTwoPi) * static_cast<double>(winding);
    const int p1 = cfg.arc_panels * factor;
    const Complex v1 = integrate_arc_graded(integrand, arc.begin, arc.end, p1,
                                            cfg.arc_nodes_per_panel, tmin, pole_scale) /
                       norm;
    const Complex v2 = integrate_arc_graded(integrand, arc.begin, arc.end, 2 * p1,
                                            cfg.arc_nodes_per_panel, tmin, pole_scale) /
                       norm;
    return {v2, std::abs(v2 - v1)};
}

} // namespace detail

/// Extension into the component where w sits inside the inner slice loop:
/// (1 / 2 pi i) int over the inner loop of F(z, zeta) dzeta / (zeta - w),
/// where along the loop F(z, zeta(theta)) is the line value f_theta(z).
inline ExtensionResult cauchy_minus(const LineField& field, const SupportCurve& curve,
                                    Complex z, Complex w,
                                    const QuadratureConfig& cfg = {},
                                    std::optional<RegionLabel> known = {}) {
    const RegionLabel label = known ? *known : classify_point2(curve, z, w);
    if (label.region != Region::OmegaMinus)
        throw RegionError("cauchy_minus: point not in the inner component");

    const GammaSlice slice = build_gamma(curve, z);
    const Loop& loop = slice.inner();
    const int wind = winding_number_adaptive(
        loop, w, [&](double t) { return gamma_point(curve, z, t); });
    const double rel = loop.min_distance_segments(w) / loop.diameter();
    const int factor = detail::guard_factor(rel, cfg, "cauchy_minus");

    auto [value, err] = detail::cauchy_over_arc(
        slice.plane.minus_arc,
        [&](double t) { return gamma_point(curve, z, t); },
        [&](double t) { return gamma_derivative(curve, z, t); },
        [&](double t, Complex) { return field(t, z); }, w, wind, factor, cfg);
    return {value, Method::CauchyMinus, label, err};
}

/// Extension into the outer component via the slice in the z coordinate:
/// (1 / 2 pi i) int over the inner z-slice loop of F(zeta, w) dzeta / (zeta - z),
/// where on the loop F(zeta(theta), w) is the line value f_theta(zeta(theta)).
inline ExtensionResult cauchy_plus(const LineField& field, const SupportCurve& curve,
                                   Complex z, Complex w,
                                   const QuadratureConfig& cfg = {},
                                   std::optional<RegionLabel> known = {}) {
    const RegionLabel label = known ? *known : classify_point2(curve, z, w);
    if (label.region != Region::OmegaPlus)
        throw RegionError("cauchy_plus: point not in the outer component");

    const GammaSlice slice = z_slice(curve, w); // arcs come from conj(w)
    if (!slice.split())
        throw RegionError("cauchy_plus: conj(w) is not exterior");
    const Loop& loop = slice.inner();
    const int wind = winding_number_adaptive(
        loop, z, [&](double t) { return sigma_point(curve, w, t); });
    const double rel = loop.min_distance_segments(z) / loop.diameter();
    const int factor = detail::guard_factor(rel, cfg, "cauchy_plus");

    auto [value, err] = detail::cauchy_over_arc(
        slice.plane.minus_arc,
        [&](double t) { return sigma_point(curve, w, t); },
        [&](double t) { return sigma_derivative(curve, w, t); },
        [&](double t, Complex zeta) { return field(t, zeta); }, z, wind, factor, cfg);
    return {value, Method::CauchyPlus, label, err};
}

/// Extension into the middle component through the quadric zw = c carrying
/// the point: annulus Cauchy formula over the two branch loops, outer minus
/// inner, each normalized to positive orientation around the origin.
inline ExtensionResult cauchy_annulus(const LineField& field, const SupportCurve& curve,
                                      Complex z, Complex w,
                                      const QuadratureConfig& cfg = {},
                                      const KSliceOptions& kopt = {},
                                      std::optional<RegionLabel> known = {}) {
    const RegionLabel label = known ? *known : classify_point2(curve, z, w);
    if (label.region != Region::OmegaZero)
        throw RegionError("cauchy_annulus: point not in the middle component");

    const Complex c = z * w;
    const KSlice probe = k_slice(curve, c, kopt);
    if (probe.degenerate)
        throw DegenerateAnnulus("cauchy_annulus: zw on the positive-real band");

    const double diam = probe.outer().diameter();
    const double rel = std::min(probe.outer().min_distance_segments(z),
                                probe.inner().min_distance_segments(z)) / diam;
    const int factor = detail::guard_factor(rel, cfg, "cauchy_annulus");

    const int n_out = winding_number(probe.outer(), Complex(0, 0));
    const int n_in = winding_number(probe.inner(), Complex(0, 0));
    if (n_out == 0 || n_in == 0)
        throw Error("cauchy_annulus: branch loop does not enclose the origin");

    // Branch-loop samples are uniform in theta, so the nodal sum is the
    // periodic trapezoid rule with the loop's own resolution.
    auto one_pass = [&](int nodes) {
        KSliceOptions ko = kopt;
        ko.samples = nodes;
        const KSlice k = k_slice(curve, c, ko);
        auto piece = [&](const Loop& loop, int wind) {
            Complex sum = 0.0;
            for (const auto& smp : loop.samples)
                sum += field(smp.theta, smp.pos) * smp.dpos / (smp.pos - z);
            sum *= kTwoPi / static_cast<double>(loop.samples.size());
            return sum / (Complex(0.0, kTwoPi) * static_cast<double>(wind));
        };
        return piece(k.outer(), n_out) - piece(k.inner(), n_in);
    };

    const int base = cfg.loop_nodes * factor;
    const Complex v1 = one_pass(base);
    const Complex v2 = one_pass(2 * base);
    return {v2, Method::CauchyAnnulus, label, std::abs(v2 - v1)};
}

/// Total-degree bivariate polynomial sum c_jk z^j w^k, j + k <= degree.
class BivariatePoly {
public:
    BivariatePoly() = default;
    BivariatePoly(int degree, std::vector<Complex> coef)
        : degree_(degree), coef_(std::move(coef)) {
        if (static_cast<int>(coef_.size()) != basis_size(degree_))
            throw Error("BivariatePoly: coefficient count mismatch");
    }

    static int basis_size(int degree) { return (degree + 1) * (degree + 2) / 2; }

    /// Flat index of z^j w^k in the degree-graded ordering.
    static int index_of(int j, int k) {
        const int d = j + k;
        return d * (d + 1) / 2 + k;
    }

    int degree() const { return degree_; }

    Complex coefficient(int j, int k) const {
        if (j < 0 || k < 0 || j + k > degree_) return {0.0, 0.0};
        return coef_[index_of(j, k)];
    }

    Complex eval(Complex z, Complex w) const {
        Complex sum = 0.0;
        for (int d = 0; d <= degree_; ++d)
            for (int k = 0; k <= d; ++k)
                sum += coef_[index_of(d - k, k)] * GroundTruth::pow_int(z, d - k) *
                       GroundTruth::pow_int(w, k);
        return sum;
    }

    const std::vector<Complex>& coefficients() const { return coef_; }

private:
    int degree_ = 0;
    std::vector<Complex> coef_{Complex(0.0, 0.0)};
};

/// One admissible inner-component point: exterior base z, target w strictly
/// inside the inner slice loop and clear of it.
inline std::pair<Complex, Complex> sample_omega_minus(const SupportCurve& curve,
                                                      Rng& rng,
                                                      double rmin_factor = 1.3,
                                                      double rmax_factor = 3.5) {
    const double m = curve.max_radius();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Complex z = rng.in_annulus(rmin_factor * m, rmax_factor * m);
        if (curve.classify(z).label != PlaneLabel::Exterior) continue;
        const GammaSlice slice = build_gamma(curve, z);
        const Loop& loop = slice.inner();
        double re0 = 1e300, re1 = -1e300, im0 = 1e300, im1 = -1e300;
        for (const auto& s : loop.samples) {
            re0 = std::min(re0, s.pos.real());
            re1 = std::max(re1, s.pos.real());
            im0 = std::min(im0, s.pos.imag());
            im1 = std::max(im1, s.pos.imag());
        }
        const double diam = loop.diameter();
        for (int draw = 0; draw < 64; ++draw) {
            const Complex w = rng.in_box(re0, re1, im0, im1);
            if (loop.min_distance(w) < 0.05 * diam) continue;
            try {
                if (winding_number(loop, w) == 0) continue;
            } catch (const TooCloseToContour&) {
                continue;
            }
            return {z, w};
        }
    }
    throw Error("sample_omega_minus: rejection sampling failed");
}

/// Admissible outer-component point, as the involution image of an inner one.
inline std::pair<Complex, Complex> sample_omega_plus(const SupportCurve& curve,
                                                     Rng& rng,
                                                     double rmin_factor = 1.3,
                                                     double rmax_factor = 3.5) {
    auto [z, w] = sample_omega_minus(curve, rng, rmin_factor, rmax_factor);
    return {std::conj(w), std::conj(z)};
}

/// Admissible middle-component point between the two branch loops of an
/// off-real quadric, clear of both.
inline std::pair<Complex, Complex> sample_omega_zero(const SupportCurve& curve,
                                                     Rng& rng) {
    const double m = curve.max_radius();
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double radius = rng.uniform(std::sqrt(1.5) * m, 4.0 * m);
        const double phase = rng.uniform(0.35, kTwoPi - 0.35);
        const Complex c = std::polar(radius * radius, phase);
        KSlice k;
        try {
            k = k_slice(curve, c);
        } catch (const Error&) {
            continue;
        }
        const double psi = rng.uniform(0.0, kTwoPi);
        auto radius_toward = [&](const Loop& loop) {
            double best = 1e300, r = 0.0;
            for (const auto& s : loop.samples) {
                const double gap = std::abs(std::arg(s.pos * std::polar(1.0, -psi)));
                if (gap < best) { best = gap; r = std::abs(s.pos); }
            }
            return r;
        };
        const double r_out = radius_toward(k.outer());
        const double r_in = radius_toward(k.inner());
        const Complex z = std::polar(0.5 * (r_out + r_in), psi);
        const double gap = std::abs(r_out - r_in);
        if (k.outer().min_distance(z) < 0.2 * gap) continue;
        if (k.inner().min_distance(z) < 0.2 * gap) continue;
        const Complex w = c / z;
        try {
            if (classify_point2(curve, z, w).region != Region::OmegaZero) continue;
        } catch (const Error&) {
            continue;
        }
        return {z, w};
    }
    throw Error("sample_omega_zero: rejection sampling failed");
}

/// How global_fit draws its sample points from the three reachable regions.
struct SamplePlan {
    int per_region = 70;
    std::uint64_t seed = 20240817ull;
    double heldout_fraction = 0.25;
    double min_radius_factor = 1.3;
    double max_radius_factor = 3.5;
};

struct GlobalFitResult {
    BivariatePoly poly;
    double train_residual = 0.0;
    double heldout_residual = 0.0;
    double condition = 0.0;
    int n_train = 0;
    int n_heldout = 0;
};

/// Least-squares polynomial model of the pieced extension, sampled where
/// the direct operators work. Stands in for evaluation at the points the
/// quadric route cannot reach.
inline GlobalFitResult global_fit(const LineField& field, const SupportCurve& curve,
                                  int degree, const SamplePlan& plan = {},
                                  const QuadratureConfig& cfg = {}) {
    if (degree < 0) throw ParseError("global_fit: degree must be nonnegative");
    Rng rng(plan.seed);

    std::vector<std::pair<Complex, Complex>> points;
    std::vector<Complex> values;
    for (int i = 0; i < plan.per_region; ++i) {
        {
            auto [z, w] = sample_omega_minus(curve, rng, plan.min_radius_factor,
                                             plan.max_radius_factor);
            points.emplace_back(z, w);
            values.push_back(cauchy_minus(field, curve, z, w, cfg).value);
        }
        {
            auto [z, w] = sample_omega_plus(curve, rng, plan.min_radius_factor,
                                            plan.max_radius_factor);
            points.emplace_back(z, w);
            values.push_back(cauchy_plus(field, curve, z, w, cfg).value);
        }
        {
            auto [z, w] = sample_omega_zero(curve, rng);
            points.emplace_back(z, w);
            values.push_back(cauchy_annulus(field, curve, z, w, cfg).value);
        }
    }

    const int total = static_cast<int>(points.size());
    const int heldout = std::max(1, static_cast<int>(total * plan.heldout_fraction));
    const int train = total - heldout;
    if (train < BivariatePoly::basis_size(degree))
        throw InsufficientSamples("global_fit: " + std::to_string(train) +
                                  " training samples for " +
                                  std::to_string(BivariatePoly::basis_size(degree)) +
                                  " basis functions");

    double sz = 0.0, sw = 0.0;
    for (const auto& [z, w] : points) {
        sz = std::max(sz, std::abs(z));
        sw = std::max(sw, std::abs(w));
    }
    if (sz == 0.0) sz = 1.0;
    if (sw == 0.0) sw = 1.0;

    const int cols = BivariatePoly::basis_size(degree);
    Eigen::MatrixXcd a(train, cols);
    Eigen::VectorXcd b(train);
    for (int i = 0; i < train; ++i) {
        const Complex zs = points[i].first / sz;
        const Complex ws = points[i].second / sw;
        for (int d = 0; d <= degree; ++d)
            for (int k = 0; k <= d; ++k)
                a(i, BivariatePoly::index_of(d - k, k)) =
                    GroundTruth::pow_int(zs, d - k) * GroundTruth::pow_int(ws, k);
        b(i) = values[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cond = svd.singularValues()(0) /
                        svd.singularValues()(svd.singularValues().size() - 1);
    if (!(cond < 1e12))
        throw IllConditionedFit("global_fit: condition estimate " + fmt17(cond));
    const Eigen::VectorXcd x = svd.solve(b);

    std::vector<Complex> coef(cols);
    for (int d = 0; d <= degree; ++d)
        for (int k = 0; k <= d; ++k) {
            const int idx = BivariatePoly::index_of(d - k, k);
            coef[idx] = x(idx) / (GroundTruth::pow_int(Complex(sz, 0.0), d - k) *
                                  GroundTruth::pow_int(Complex(sw, 0.0), k));
        }

    GlobalFitResult out;
    out.poly = BivariatePoly(degree, std::move(coef));
    out.condition = cond;
    out.n_train = train;
    out.n_heldout = heldout;
    for (int i = 0; i < total; ++i) {
        const double r =
            std::abs(out.poly.eval(points[i].first, points[i].second) - values[i]);
        if (i < train) out.train_residual = std::max(out.train_residual, r);
        else out.heldout_residual = std::max(out.heldout_residual, r);
    }
    return out;
}

struct ExtendOptions {
    const BivariatePoly* fallback = nullptr; // enables the GlobalFit route
    double fallback_err = 0.0;               // reported err_est for fallback values
    bool rotate_real_c = false;              // perturb c off the positive-real band
    double rotate_eta = 1e-6;
    KSliceOptions kslice;
};

/// Classifies the point and routes it to the matching operator. Surface
/// points evaluate the line data at the nearest line; middle-component
/// points whose quadric is unreachable fall back to the global fit when
/// one is supplied.
inline ExtensionResult extend(const LineField& field, const SupportCurve& curve,
                              Complex z, Complex w, const QuadratureConfig& cfg = {},
                              const ExtendOptions& opt = {}) {
    const RegionLabel label = classify_point2(curve, z, w);
    switch (label.region) {
        case Region::OnM: {
            ExtensionResult r;
            r.value = field(label.nearest_theta.value_or(0.0), z);
            r.method = Method::OnM;
            r.region = label;
            return r;
        }
        case Region::OmegaMinus:
            return cauchy_minus(field, curve, z, w, cfg, label);
        case Region::OmegaPlus:
            return cauchy_plus(field, curve, z, w, cfg, label);
        case Region::OmegaZero:
            break;
    }

    const Complex c = z * w;
    const double m = curve.max_radius();
    const bool admissible = std::abs(c) > m * m * (1.0 + opt.kslice.delta_c);
    const bool real_band =
        c.real() > 0.0 && std::abs(c.imag()) <= 1e-12 * std::abs(c);

    if (admissible && !real_band) {
        try {
            return cauchy_annulus(field, curve, z, w, cfg, opt.kslice, label);
        } catch (const TooCloseToContour&) {
            // razor-thin annulus near the positive reals; the rotation
            // escape below can still evaluate it
            if (!opt.rotate_real_c) throw;
        }
    }

    if (admissible && opt.rotate_real_c) {
        // evaluate on quadrics rotated away from the positive reals and
        // extrapolate back (two-point Richardson in the rotation angle)
        const double dir = std::arg(c) >= 0.0 ? 1.0 : -1.0;
        const ExtensionResult f1 = cauchy_annulus(
            field, curve, z, w * std::polar(1.0, dir * opt.rotate_eta), cfg,
            opt.kslice);
        const ExtensionResult f2 = cauchy_annulus(
            field, curve, z, w * std::polar(1.0, dir * 2.0 * opt.rotate_eta), cfg,
            opt.kslice);
        ExtensionResult r;
        r.value = 2.0 * f1.value - f2.value;
        r.method = Method::CauchyAnnulus;
        r.region = label;
        r.err_est = std::abs(f1.value - f2.value) + f1.err_est + f2.err_est;
        return r;
    }

    if (opt.fallback) {
        ExtensionResult r;
        r.value = opt.fallback->eval(z, w);
        r.method = Method::GlobalFit;
        r.region = label;
        r.err_est = opt.fallback_err;
        return r;
    }
    throw UnreachablePoint("extend: zw = " + fmt17(c.real()) + "+" + fmt17(c.imag()) +
                           "i " +
                           (admissible ? "lies on the positive-real band"
                                       : "is below the quadric margin") +
                           " and no fallback is enabled");
}

} // namespace lineext
