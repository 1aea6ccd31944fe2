#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "lineext/curve.hpp"
#include "lineext/util.hpp"

using namespace lineext;

namespace {

// Support function of the ellipse x^2/a^2 + y^2/b^2 = 1, independent of
// the series representation under test.
double ellipse_h(double a, double b, double t) {
    const double c = std::cos(t), s = std::sin(t);
    return std::sqrt(a * a * c * c + b * b * s * s);
}

} // namespace

TEST_CASE("circle support data", "[curve]") {
    const SupportCurve c = SupportCurve::circle(1.0);
    CHECK(c.h(0.3) == Catch::Approx(1.0));
    CHECK(c.max_radius() == Catch::Approx(1.0));
    CHECK(c.min_support() == Catch::Approx(1.0));
    CHECK(c.radius_of_curvature(1.1) == Catch::Approx(1.0));
    CHECK(std::abs(c.point(0.0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(c.point(kPi / 3) - std::polar(1.0, kPi / 3)) < 1e-15);
}

TEST_CASE("ellipse support data", "[curve]") {
    const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);
    CHECK(e.fit_residual() <= 1e-10);
    CHECK(e.h(0.0) == Catch::Approx(2.0).margin(1e-10));
    CHECK(e.h(kPi / 2) == Catch::Approx(1.0).margin(1e-10));
    CHECK(e.max_radius() == Catch::Approx(2.0).margin(1e-9));
    CHECK(std::abs(e.point(kPi / 2) - Complex(0.0, 1.0)) < 1e-9);

    // rho = a^2 b^2 / h^3 for an ellipse
    CHECK(e.radius_of_curvature(0.0) == Catch::Approx(0.5).margin(1e-8));
    CHECK(e.radius_of_curvature(kPi / 2) == Catch::Approx(4.0).margin(1e-8));

    // brute-force curvature from the exact support function
    const double t = 0.7, d = 1e-5;
    const double rho_fd = ellipse_h(2, 1, t) +
                          (ellipse_h(2, 1, t + d) - 2 * ellipse_h(2, 1, t) +
                           ellipse_h(2, 1, t - d)) / (d * d);
    CHECK(e.radius_of_curvature(t) == Catch::Approx(rho_fd).margin(1e-5));

    // series fit residual against the closed form, off the fit grid
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double tt = rng.uniform(0.0, kTwoPi);
        CHECK(std::abs(e.h(tt) - ellipse_h(2, 1, tt)) <= 2e-10);
    }
}

TEST_CASE("eccentric ellipses still fit the series budget", "[curve]") {
    const SupportCurve e = SupportCurve::ellipse(10.0, 1.0);
    CHECK(e.fit_residual() <= 1e-10);
    CHECK(e.max_radius() == Catch::Approx(10.0).margin(1e-8));
    CHECK(e.radius_of_curvature(0.0) == Catch::Approx(0.1).margin(1e-8));
    CHECK(e.radius_of_curvature(kPi / 2) == Catch::Approx(100.0).margin(1e-6));
}

TEST_CASE("curve validation failures", "[curve]") {
    TrigSeries bad_curvature; // h = 1 + 0.9 cos 2t  ->  h + h'' = 1 - 2.7 cos 2t
    bad_curvature.c0 = 1.0;
    bad_curvature.cos_coef = {0.0, 0.9};
    bad_curvature.sin_coef = {0.0, 0.0};
    CHECK_THROWS_AS(SupportCurve::from_series(bad_curvature), CurvatureViolation);
    CHECK_THROWS_AS(SupportCurve::parse("fourier:1,0,0,0.9"), CurvatureViolation);

    TrigSeries not_interior; // h = 1 + 2 cos t dips negative, h + h'' = 1
    not_interior.c0 = 1.0;
    not_interior.cos_coef = {2.0};
    CHECK_THROWS_AS(SupportCurve::from_series(not_interior), NotInterior);

    CHECK_THROWS_AS(SupportCurve::circle(-1.0), ParseError);
    CHECK_THROWS_AS(SupportCurve::parse("circle:oops"), ParseError);
    CHECK_THROWS_AS(SupportCurve::parse("blob:1"), ParseError);
    CHECK_THROWS_AS(SupportCurve::parse("nocolon"), ParseError);
}

TEST_CASE("unit tangent and line points", "[curve]") {
    const SupportCurve c = SupportCurve::circle(1.0);
    const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);

    CHECK(std::abs(c.unit_tangent(0.0) - Complex(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(c.unit_tangent(kPi / 2) - Complex(-1.0, 0.0)) < 1e-15);

    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double t = rng.uniform(0.0, kTwoPi);
        CHECK(std::abs(std::abs(e.unit_tangent(t)) - 1.0) <= 4e-16);
    }

    CHECK(std::abs(c.line_point(0.0, 0.0) - Complex(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(c.line_point(0.0, 2.0) - Complex(1.0, 2.0)) < 1e-15);
    CHECK(std::abs(e.line_point(0.0, 1.0) - Complex(2.0, 1.0)) < 1e-9);

    // line points satisfy h(theta) = Re(z e^{-i theta})
    for (int i = 0; i < 200; ++i) {
        const double t = rng.uniform(0.0, kTwoPi);
        const double u = rng.uniform(-5.0, 5.0);
        const Complex z = e.line_point(t, u);
        CHECK(std::abs(e.g(t, z)) <= 1e-13 * (1.0 + std::abs(z)));
    }
}

TEST_CASE("tangent derivative identity", "[curve]") {
    // d lambda / d theta = i rho e^{i theta}
    const double d = 1e-4;
    for (const SupportCurve& c :
         {SupportCurve::circle(1.0), SupportCurve::ellipse(2.0, 1.0)}) {
        Rng rng(7);
        for (int i = 0; i < 300; ++i) {
            const double t = rng.uniform(0.0, kTwoPi);
            const Complex fd = (c.point(t + d) - c.point(t - d)) / (2.0 * d);
            const Complex exact =
                Complex(0, 1) * c.radius_of_curvature(t) * std::polar(1.0, t);
            CHECK(std::abs(fd - exact) / std::abs(exact) <= 1e-6);
        }
    }
}

TEST_CASE("g identity bridges the tangent-line half-plane form", "[curve]") {
    const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        const double t = rng.uniform(0.0, kTwoPi);
        const Complex z = rng.in_box(-6, 6, -6, 6);
        const double lhs = std::imag((z - e.point(t)) / e.unit_tangent(t));
        CHECK(std::abs(lhs - e.g(t, z)) <= 1e-12 * (1.0 + std::abs(z)));
    }
}

TEST_CASE("max radius is attained", "[curve]") {
    for (const SupportCurve& c :
         {SupportCurve::circle(1.5), SupportCurve::ellipse(2.0, 1.0)}) {
        const double m = c.max_radius();
        double best = 0.0;
        for (int j = 0; j < 4096; ++j) {
            const double r = std::abs(c.point(kTwoPi * j / 4096));
            CHECK(r <= m + 1e-12);
            best = std::max(best, r);
        }
        CHECK(best >= m - 1e-6);
    }
}

TEST_CASE("tangent winds once per period", "[curve]") {
    const SupportCurve e = SupportCurve::ellipse(2.0, 1.0);
    double total = 0.0;
    const int n = 256;
    Complex prev = e.unit_tangent(0.0);
    for (int j = 1; j <= n; ++j) {
        const Complex cur = e.unit_tangent(kTwoPi * j / n);
        total += std::arg(cur / prev);
        prev = cur;
    }
    CHECK(total == Catch::Approx(kTwoPi).margin(1e-9));
}

TEST_CASE("plane classification of reference points", "[curve]") {
    const SupportCurve c = SupportCurve::circle(1.0);

    CHECK(c.classify(Complex(0, 0)).label == PlaneLabel::Interior);
    CHECK(c.classify(Complex(1, 0)).label == PlaneLabel::OnCurve);

    const PlaneClass p3 = c.classify(Complex(3, 0));
    REQUIRE(p3.label == PlaneLabel::Exterior);
    const double t0 = std::acos(1.0 / 3.0);
    CHECK(p3.theta1 == Catch::Approx(t0).margin(1e-9));
    CHECK(p3.theta2 == Catch::Approx(kTwoPi - t0).margin(1e-9));
    CHECK(p3.minus_arc.contains(0.0));
    CHECK(p3.plus_arc.contains(kPi));

    const PlaneClass p2i = c.classify(Complex(0, 2));
    REQUIRE(p2i.label == PlaneLabel::Exterior);
    CHECK(p2i.theta1 == Catch::Approx(kPi / 6).margin(1e-9));
    CHECK(p2i.theta2 == Catch::Approx(5 * kPi / 6).margin(1e-9));
    CHECK(p2i.minus_arc.contains(kPi / 2));

    // tangency residual and arc sign constancy
    for (const Complex z : {Complex(3, 0), Complex(0, 2), Complex(-2.5, 1.5)}) {
        const PlaneClass pc = c.classify(z);
        REQUIRE(pc.label == PlaneLabel::Exterior);
        CHECK(std::abs(c.g(pc.theta1, z)) <= 1e-9 * (1.0 + std::abs(z)));
        CHECK(std::abs(c.g(pc.theta2, z)) <= 1e-9 * (1.0 + std::abs(z)));
        for (int j = 1; j < 32; ++j) {
            const double tm =
                pc.minus_arc.begin + pc.minus_arc.length() * j / 32.0;
            const double tp =
                pc.plus_arc.begin + pc.plus_arc.length() * j / 32.0;
            CHECK(c.g(tm, z) < 0.0);
            CHECK(c.g(tp, z) > 0.0);
        }
    }
}

TEST_CASE("classification close to the curve", "[curve]") {
    const SupportCurve c = SupportCurve::circle(1.0);
    // far inside the band
    CHECK(c.classify(Complex(1.0 - 1e-6, 0)).label == PlaneLabel::Interior);
    // dip narrower than the scan grid still classifies exterior
    const PlaneClass pc = c.classify(Complex(1.0 + 1e-6, 0));
    REQUIRE(pc.label == PlaneLabel::Exterior);
    CHECK(pc.theta2 - pc.theta1 > 0.0);
    // inside the scale-aware band
    CHECK(c.classify(Complex(1.0 + 1e-10, 0)).label == PlaneLabel::OnCurve);
}

TEST_CASE("degenerate tangency detection on invalid data", "[curve]") {
    TrigSeries wavy; // h = 1 + 0.5 cos 3t: fails convexity, g has 4 roots
    wavy.c0 = 1.0;
    wavy.cos_coef = {0.0, 0.0, 0.5};
    const SupportCurve bad = SupportCurve::unvalidated(wavy);
    CHECK_THROWS_AS(bad.classify(Complex(1.4, 0.0)), DegenerateTangency);
}

TEST_CASE("curve spec round trip", "[curve]") {
    const SupportCurve c = SupportCurve::parse("circle:2.5");
    CHECK(c.max_radius() == Catch::Approx(2.5));
    const SupportCurve e = SupportCurve::parse("ellipse:2,1");
    CHECK(e.h(0.0) == Catch::Approx(2.0).margin(1e-10));
    const SupportCurve f = SupportCurve::parse("fourier:1,0,0,0.1,0");
    CHECK(f.h(0.0) == Catch::Approx(1.1));
}
