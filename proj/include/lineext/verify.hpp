#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lineext/extend.hpp"
#include "lineext/rangetest.hpp"

namespace lineext::verify {

struct CriterionResult {
    int index = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

namespace detail {

inline std::string eng(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

template <class Fn>
inline CriterionResult timed(int index, std::string name, double budget_seconds,
                             Fn&& body) {
    CriterionResult r;
    r.index = index;
    r.name = std::move(name);
    const auto start = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
    if (r.seconds >= budget_seconds) {
        r.pass = false;
        r.detail += " [over the " + eng(budget_seconds) + " s runtime budget]";
    }
    return r;
}

inline std::vector<SupportCurve> test_curves() {
    return {SupportCurve::circle(1.0), SupportCurve::ellipse(2.0, 1.0)};
}

} // namespace detail

/// Tangent modulus, derivative identity, and the support-form bridge of
/// the half-plane inequality.
inline CriterionResult curve_identities(std::uint64_t seed = 1) {
    return detail::timed(1, "curve identities", 1.0, [&](CriterionResult& r) {
        double worst_tau = 0.0, worst_fd = 0.0, worst_g = 0.0;
        for (const SupportCurve& c : detail::test_curves()) {
            Rng rng(seed);
            for (int i = 0; i < 1000; ++i) {
                const double t = rng.uniform(0.0, kTwoPi);
                worst_tau = std::max(worst_tau,
                                     std::abs(std::abs(c.unit_tangent(t)) - 1.0));
                const double d = 1e-4;
                const Complex fd = (c.point(t + d) - c.point(t - d)) / (2.0 * d);
                const Complex exact =
                    Complex(0, 1) * c.radius_of_curvature(t) * std::polar(1.0, t);
                worst_fd = std::max(worst_fd, std::abs(fd - exact) / std::abs(exact));
            }
            for (int i = 0; i < 10000; ++i) {
                const double t = rng.uniform(0.0, kTwoPi);
                const Complex z = rng.in_box(-6, 6, -6, 6);
                const double lhs = std::imag((z - c.point(t)) / c.unit_tangent(t));
                worst_g = std::max(worst_g, std::abs(lhs - c.g(t, z)) /
                                                (1.0 + std::abs(z)));
            }
        }
        r.pass = worst_tau <= 4e-16 && worst_fd <= 1e-6 && worst_g <= 1e-12;
        r.detail = "max ||tangent|-1| = " + detail::eng(worst_tau) +
                   ", max d-lambda fd rel err = " + detail::eng(worst_fd) +
                   ", max g-identity residual = " + detail::eng(worst_g);
    });
}

/// The 2m envelope of the slice parametrization and the far-field index -2.
inline CriterionResult envelope_and_index(std::uint64_t seed = 2) {
    return detail::timed(2, "2m estimate and slice index", 5.0, [&](CriterionResult& r) {
        double worst = -1e300;
        int bad_index = 0;
        for (const SupportCurve& c : detail::test_curves()) {
            const double m = c.max_radius();
            Rng rng(seed);
            for (int i = 0; i < 10000; ++i) {
                const double t = rng.uniform(0.0, kTwoPi);
                const Complex z = rng.in_box(-8, 8, -8, 8);
                const Complex center = -std::polar(1.0, -2.0 * t) * z;
                const double excess = std::abs(gamma_point(c, z, t) - center) -
                                      2.0 * m - 1e-12 * (1.0 + std::abs(z));
                worst = std::max(worst, excess);
            }
            for (int i = 0; i < 100; ++i) {
                const Complex z = rng.in_annulus(2.5 * m, 6.0 * m);
                if (slice_index(c, z) != -2) ++bad_index;
            }
        }
        r.pass = worst <= 0.0 && bad_index == 0;
        r.detail = "max bound excess = " + detail::eng(worst) + ", wrong indices = " +
                   std::to_string(bad_index) + "/200";
    });
}

/// Degeneration of the quadric slice on the positive reals, and the
/// annulus confinement off them.
inline CriterionResult quadric_degeneration(std::uint64_t = 3) {
    return detail::timed(3, "quadric slice degeneration", 1.0, [&](CriterionResult& r) {
        const SupportCurve c = SupportCurve::circle(1.0);
        const double m = c.max_radius();
        double worst_radius = 0.0, worst_conj = 0.0;
        const KSlice real_k = k_slice(c, {25, 0});
        for (const auto& loop : real_k.loops) {
            for (const auto& s : loop.samples) {
                worst_radius =
                    std::max(worst_radius, std::abs(std::abs(s.pos) - 5.0));
                worst_conj = std::max(
                    worst_conj, std::abs(real_k.c / s.pos - std::conj(s.pos)));
            }
        }
        const KSlice imag_k = k_slice(c, {0, 25});
        double min_mutual = 1e300, worst_annulus = 0.0;
        for (const auto& a : imag_k.loops[0].samples)
            for (const auto& b : imag_k.loops[1].samples)
                min_mutual = std::min(min_mutual, std::abs(a.pos - b.pos));
        for (const auto& loop : imag_k.loops)
            for (const auto& s : loop.samples)
                worst_annulus =
                    std::max(worst_annulus, std::abs(std::abs(s.pos) - 5.0));
        const bool nested =
            winding_number(imag_k.outer(), imag_k.inner().representative().pos) != 0;
        r.pass = worst_radius <= 1e-10 && worst_conj <= 1e-10 && min_mutual > 0.0 &&
                 nested && worst_annulus <= 2.0 * m;
        r.detail = "real c: max ||z|-5| = " + detail::eng(worst_radius) +
                   ", max |w - conj z| = " + detail::eng(worst_conj) +
                   "; imag c: mutual distance " + detail::eng(min_mutual) +
                   ", max ||z|-5| = " + detail::eng(worst_annulus) +
                   (nested ? ", nested" : ", NOT nested");
    });
}

/// The three Cauchy operators against the generating entire functions.
inline CriterionResult extension_oracles(std::uint64_t seed = 4) {
    return detail::timed(4, "extension oracle equivalence", 30.0, [&](CriterionResult& r) {
        const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);
        const QuadratureConfig cfg = QuadratureConfig::with_total_nodes(512);
        Rng rng(seed);
        std::vector<std::pair<Complex, Complex>> minus_pts, plus_pts, zero_pts;
        for (int i = 0; i < 50; ++i) {
            minus_pts.push_back(sample_omega_minus(e, rng));
            plus_pts.push_back(sample_omega_plus(e, rng));
            zero_pts.push_back(sample_omega_zero(e, rng));
        }
        const std::vector<GroundTruth> truths = {
            GroundTruth::constant(1.0),
            GroundTruth::polynomial({{1, 0, 1.0}}),
            GroundTruth::polynomial({{0, 1, 1.0}}),
            GroundTruth::polynomial({{1, 1, 1.0}}),
            GroundTruth::polynomial({{2, 0, 1.0}, {0, 2, 3.0}}),
            GroundTruth::exponential({0.3, 0}, {0.2, 0})};
        double worst_poly = 0.0, worst_exp = 0.0;
        for (const auto& f0 : truths) {
            const LineField field = from_ground_truth(e, f0);
            double& worst = f0.is_polynomial() ? worst_poly : worst_exp;
            auto record = [&](Complex got, Complex want) {
                worst = std::max(worst,
                                 std::abs(got - want) / std::max(1.0, std::abs(want)));
            };
            for (const auto& [z, w] : minus_pts)
                record(cauchy_minus(field, e, z, w, cfg).value, f0.eval(z, w));
            for (const auto& [z, w] : plus_pts)
                record(cauchy_plus(field, e, z, w, cfg).value, f0.eval(z, w));
            for (const auto& [z, w] : zero_pts)
                record(cauchy_annulus(field, e, z, w, cfg).value, f0.eval(z, w));
        }
        r.pass = worst_poly <= 1e-10 && worst_exp <= 1e-6;
        r.detail = "max rel err: polynomials " + detail::eng(worst_poly) +
                   " (<= 1e-10), exponential " + detail::eng(worst_exp) +
                   " (<= 1e-6), 150 points x 6 truths";
    });
}

/// Vanishing moments for trace data, detection of corrupted data, and the
/// collapse of the moments along a boundary approach.
inline CriterionResult moment_conditions(std::uint64_t = 5) {
    return detail::timed(5, "moment conditions", 10.0, [&](CriterionResult& r) {
        const SupportCurve c = SupportCurve::circle(1.0);
        const LineField good =
            from_ground_truth(c, GroundTruth::exponential({0.3, 0}, {0.2, 0}));
        const LineField bad = corrupt(good, 1e-3);

        std::vector<Complex> zs = default_z_rings(c);
        zs.resize(20);
        double consistent_max = 0.0, corrupted_max = 0.0;
        for (const Complex z : zs) {
            for (const auto& e : moments(good, c, z, 8).entries)
                consistent_max = std::max(consistent_max, e.normalized);
            for (const auto& e : moments(bad, c, z, 8).entries)
                corrupted_max = std::max(corrupted_max, e.normalized);
        }

        const std::vector<Complex> approach = normal_approach(c, 0.0, 1.0, 11);
        const std::vector<double> shrink = boundary_shrink_check(bad, c, approach, 2);
        const double ratio = shrink.back() / shrink.front();

        r.pass = consistent_max <= 1e-8 && corrupted_max >= 10.0 * consistent_max &&
                 ratio <= 1e-2;
        r.detail = "consistent max = " + detail::eng(consistent_max) +
                   " (<= 1e-8), corrupted max = " + detail::eng(corrupted_max) +
                   " (margin " + detail::eng(corrupted_max /
                                             std::max(consistent_max, 1e-300)) +
                   "x), shrink final/initial = " + detail::eng(ratio) + " (<= 1e-2)";
    });
}

/// Cancellation of the two-component quadric moments along the approach of
/// c to the positive reals, and its failure for corrupted data.
inline CriterionResult quadric_cancellation(std::uint64_t = 6) {
    return detail::timed(6, "quadric moment cancellation", 10.0, [&](CriterionResult& r) {
        const SupportCurve c = SupportCurve::circle(1.0);
        const LineField good =
            from_ground_truth(c, GroundTruth::exponential({0, 0}, {0.2, 0}));
        const LineField bad = corrupt(good, 1e-3);
        std::vector<double> etas;
        for (int j = 0; j <= 8; ++j) etas.push_back((kPi / 2) * std::pow(2.0, -j));

        double consistent_max = 0.0, consistent_final = 0.0, corrupted_final = 0.0;
        for (int n = 0; n <= 8; ++n) {
            const KcCancellation kg = kc_moment_cancellation(good, c, 25.0, etas, n);
            for (double mag : kg.magnitude)
                consistent_max = std::max(consistent_max, mag / kg.scale);
            consistent_final =
                std::max(consistent_final, kg.magnitude.back() / kg.scale);
            const KcCancellation kb = kc_moment_cancellation(bad, c, 25.0, etas, n);
            corrupted_final =
                std::max(corrupted_final, kb.magnitude.back() / kb.scale);
        }
        r.pass = consistent_max <= 1e-3 &&
                 corrupted_final >= 10.0 * std::max(consistent_final, 1e-300);
        r.detail = "consistent max = " + detail::eng(consistent_max) +
                   " (<= 1e-3), corrupted final = " + detail::eng(corrupted_final) +
                   " (margin " +
                   detail::eng(corrupted_final / std::max(consistent_final, 1e-300)) +
                   "x)";
    });
}

/// The conjugate-swap involution on region labels, and agreement of the
/// 2m short-circuit with the winding-based classification.
inline CriterionResult symmetry_and_classification(std::uint64_t seed = 7) {
    return detail::timed(7, "involution symmetry and fast path", 5.0, [&](CriterionResult& r) {
        const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);
        const double m = e.max_radius();
        Rng rng(seed);
        int sym_checked = 0, sym_bad = 0, fast_checked = 0, fast_bad = 0;
        while (sym_checked < 1000) {
            const Complex z = rng.in_box(-7, 7, -7, 7);
            const Complex w = rng.in_box(-7, 7, -7, 7);
            RegionLabel a, b;
            try {
                a = classify_point2(e, z, w);
                b = classify_point2(e, std::conj(w), std::conj(z));
            } catch (const Error&) {
                continue;
            }
            if (a.region == Region::OnM || b.region == Region::OnM) continue;
            if (a.dist_to_m && *a.dist_to_m < 10.0 * on_m_tol(z, w)) continue;
            ++sym_checked;
            const Region want = a.region == Region::OmegaPlus ? Region::OmegaMinus
                               : a.region == Region::OmegaMinus ? Region::OmegaPlus
                                                                : a.region;
            if (b.region != want) ++sym_bad;

            if (std::abs(std::abs(w) - std::abs(z)) > 2.0 * m) {
                ++fast_checked;
                ClassifyOptions no_fast;
                no_fast.use_fast_path = false;
                const RegionLabel full = classify_point2(e, z, w, no_fast);
                const RegionLabel fast = classify_point2(e, z, w);
                if (!fast.used_fast_path || full.region != fast.region) ++fast_bad;
            }
        }
        r.pass = sym_bad == 0 && fast_bad == 0 && fast_checked > 0;
        r.detail = "symmetry violations " + std::to_string(sym_bad) + "/1000" +
                   ", fast-path disagreements " + std::to_string(fast_bad) + "/" +
                   std::to_string(fast_checked);
    });
}

/// Entire-function consistency of the pieced extension: a degree-2 global
/// fit recovers the generating polynomial.
inline CriterionResult global_fit_consistency(std::uint64_t = 8) {
    return detail::timed(8, "global fit coefficient recovery", 10.0, [&](CriterionResult& r) {
        const SupportCurve c = SupportCurve::circle(1.0);
        const GroundTruth f0 = GroundTruth::polynomial({{2, 0, 1.0}, {1, 1, 1.0}});
        const LineField field = from_ground_truth(c, f0);
        const GlobalFitResult fit = global_fit(field, c, 2);
        double worst_coef = 0.0;
        for (int d = 0; d <= 2; ++d)
            for (int k = 0; k <= d; ++k) {
                const Complex want = (d - k == 2 && k == 0) || (d - k == 1 && k == 1)
                                         ? Complex(1, 0)
                                         : Complex(0, 0);
                worst_coef = std::max(worst_coef,
                                      std::abs(fit.poly.coefficient(d - k, k) - want));
            }
        r.pass = worst_coef <= 1e-8 && fit.heldout_residual <= 1e-8;
        r.detail = "max coefficient error = " + detail::eng(worst_coef) +
                   ", held-out residual = " + detail::eng(fit.heldout_residual) +
                   " (both <= 1e-8)";
    });
}

inline std::vector<CriterionResult> run_all() {
    return {curve_identities(),        envelope_and_index(),
            quadric_degeneration(),    extension_oracles(),
            moment_conditions(),       quadric_cancellation(),
            symmetry_and_classification(), global_fit_consistency()};
}

} // namespace lineext::verify
