#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "lineext/curve.hpp"
#include "lineext/linedata.hpp"
#include "lineext/quadrature.hpp"
#include "lineext/slices.hpp"
#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

struct MomentEntry {
    Complex z{0.0, 0.0};
    int n = 0;
    Complex moment{0.0, 0.0};
    double scale = 0.0;      // max |F| on the contour times contour length
    double normalized = 0.0; // |moment| / scale
    bool pass = false;
};

struct ConsistencyEntry {
    Complex z{0.0, 0.0};
    double residual = 0.0;
    double normalized = 0.0;
    bool pass = false;
};

struct MomentReport {
    std::string curve_spec;
    std::string field_provenance;
    int n_max = 0;
    double tol_m = 0.0;
    std::vector<MomentEntry> entries;
    std::vector<ConsistencyEntry> consistency;
    std::vector<std::string> warnings;
    std::vector<std::string> errors;
    bool aggregate_pass = true;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["curve"] = curve_spec;
        j["field_provenance"] = field_provenance;
        j["n_max"] = n_max;
        j["tol_m"] = tol_m;
        j["entries"] = nlohmann::ordered_json::array();
        for (const auto& e : entries) {
            j["entries"].push_back({{"z", {e.z.real(), e.z.imag()}},
                                    {"n", e.n},
                                    {"moment_re", e.moment.real()},
                                    {"moment_im", e.moment.imag()},
                                    {"normalized", e.normalized},
                                    {"pass", e.pass}});
        }
        j["consistency"] = nlohmann::ordered_json::array();
        for (const auto& e : consistency) {
            j["consistency"].push_back({{"z", {e.z.real(), e.z.imag()}},
                                        {"residual", e.residual},
                                        {"normalized", e.normalized},
                                        {"pass", e.pass}});
        }
        j["warnings"] = warnings;
        j["errors"] = errors;
        j["aggregate_pass"] = aggregate_pass;
        return j;
    }
};

inline constexpr double kDefaultMomentTol = 1e-7;

namespace detail {
inline std::string format_z(Complex z) {
    return fmt17(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt17(std::abs(z.imag())) + "i";
}
} // namespace detail

/// Moments int zeta^n F(z, zeta) dzeta over the inner slice loop of an
/// exterior z, for 0 <= n <= n_max. For data in the range of the
/// construction these all vanish; the normalized magnitude measures how
/// far the data is from extendable.
inline MomentReport moments(const LineField& field, const SupportCurve& curve,
                            Complex z, int n_max,
                            double tol_m = kDefaultMomentTol,
                            const QuadratureConfig& cfg = {}) {
    const PlaneClass pc = curve.classify(z);
    if (pc.label == PlaneLabel::OnCurve)
        throw OnCurveError("moments: z on the curve within tolerance");
    if (pc.label == PlaneLabel::Interior)
        throw RegionError("moments: z must be exterior (the inner loop is empty inside)");

    // shared Gauss-Legendre nodes over the inner arc
    const AngleArc arc = pc.minus_arc;
    const GaussLegendreRule& rule = gauss_legendre(cfg.arc_nodes_per_panel);
    struct Node { Complex zeta, dzeta, f; double weight; };
    std::vector<Node> nodes;
    nodes.reserve(cfg.arc_panels * cfg.arc_nodes_per_panel);
    const double panel_len = arc.length() / cfg.arc_panels;
    for (int p = 0; p < cfg.arc_panels; ++p) {
        const double mid = arc.begin + panel_len * (p + 0.5);
        for (int i = 0; i < cfg.arc_nodes_per_panel; ++i) {
            const double t = mid + 0.5 * panel_len * rule.node[i];
            nodes.push_back({gamma_point(curve, z, t), gamma_derivative(curve, z, t),
                             field(t, z), rule.weight[i] * 0.5 * panel_len});
        }
    }

    double length = 0.0, max_f = 0.0;
    for (const auto& nd : nodes) {
        length += std::abs(nd.dzeta) * nd.weight;
        max_f = std::max(max_f, std::abs(nd.f));
    }
    const double scale = std::max(max_f * length, 1e-300);

    MomentReport report;
    report.curve_spec = curve.spec();
    report.field_provenance = field.provenance_name();
    report.n_max = n_max;
    report.tol_m = tol_m;

    std::vector<Complex> power(nodes.size(), Complex(1.0, 0.0));
    for (int n = 0; n <= n_max; ++n) {
        Complex mn = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            mn += power[i] * nodes[i].f * nodes[i].dzeta * nodes[i].weight;
            power[i] *= nodes[i].zeta;
        }
        MomentEntry e;
        e.z = z;
        e.n = n;
        e.moment = mn;
        e.scale = scale;
        e.normalized = std::abs(mn) / scale;
        e.pass = e.normalized <= tol_m;
        report.aggregate_pass = report.aggregate_pass && e.pass;
        report.entries.push_back(e);
    }
    return report;
}

/// |m_n| along an approach sequence of exterior points; the inner loop
/// contracts into the limit point, so the sequence is driven to zero by
/// the collapsing contour length regardless of the data.
inline std::vector<double> boundary_shrink_check(const LineField& field,
                                                 const SupportCurve& curve,
                                                 const std::vector<Complex>& approach,
                                                 int n,
                                                 const QuadratureConfig& cfg = {}) {
    std::vector<double> out;
    out.reserve(approach.size());
    for (const Complex z : approach) {
        const MomentReport r = moments(field, curve, z, n, kDefaultMomentTol, cfg);
        out.push_back(std::abs(r.entries[n].moment));
    }
    return out;
}

/// Geometric approach sequence z_j = lambda(theta0) + offset0 2^{-j} n(theta0)
/// along the outward normal.
inline std::vector<Complex> normal_approach(const SupportCurve& curve, double theta0,
                                            double offset0, int count) {
    std::vector<Complex> out;
    const Complex normal = std::polar(1.0, theta0);
    for (int j = 0; j < count; ++j)
        out.push_back(curve.point(theta0) + offset0 * std::pow(2.0, -j) * normal);
    return out;
}

struct KcCancellation {
    int n = 0;
    std::vector<double> eta;
    std::vector<double> magnitude; // |M_n(c0 e^{i eta})|
    double scale = 0.0;            // max |F| times total contour length, last eta
};

/// Total boundary moment of the quadric annulus: the two branch-loop
/// integrals of zeta^n F(zeta, c/zeta) d zeta taken with the annulus
/// boundary orientation (outer positively, inner negatively). For range
/// data the two components cancel; corrupted data leaves a residue that
/// survives the approach of c to the positive reals.
inline KcCancellation kc_moment_cancellation(const LineField& field,
                                             const SupportCurve& curve, double c0,
                                             const std::vector<double>& etas, int n,
                                             const QuadratureConfig& cfg = {},
                                             KSliceOptions kopt = {}) {
    if (!(c0 > 0.0))
        throw InadmissibleC("kc_moment_cancellation: c0 must be positive real");
    KcCancellation out;
    out.n = n;
    kopt.samples = cfg.loop_nodes;
    for (const double eta : etas) {
        const Complex c = std::polar(c0, eta);
        const KSlice k = k_slice(curve, c, kopt);
        if (k.degenerate)
            throw DegenerateAnnulus("kc_moment_cancellation: eta = " + fmt17(eta) +
                                    " lands on the positive-real band");
        const int n_out = winding_number(k.outer(), Complex(0, 0));
        const int n_in = winding_number(k.inner(), Complex(0, 0));

        double max_f = 0.0, length = 0.0;
        auto piece = [&](const Loop& loop, int wind) {
            Complex sum = 0.0;
            for (const auto& smp : loop.samples) {
                const Complex f = field(smp.theta, smp.pos);
                max_f = std::max(max_f, std::abs(f));
                length += std::abs(smp.dpos) * kTwoPi / loop.samples.size();
                sum += GroundTruth::pow_int(smp.pos, n) * f * smp.dpos;
            }
            sum *= kTwoPi / static_cast<double>(loop.samples.size());
            return sum / static_cast<double>(wind);
        };
        const Complex total = piece(k.outer(), n_out) - piece(k.inner(), n_in);
        out.eta.push_back(eta);
        out.magnitude.push_back(std::abs(total));
        out.scale = std::max(max_f * length, 1e-300);
    }
    return out;
}

/// Default exterior sample set: rings at {1.5, 2.5, 4} m with eight angles
/// each, angles offset off the axes.
inline std::vector<Complex> default_z_rings(const SupportCurve& curve) {
    std::vector<Complex> out;
    for (const double factor : {1.5, 2.5, 4.0})
        for (int j = 0; j < 8; ++j)
            out.push_back(std::polar(factor * curve.max_radius(),
                                     kTwoPi * (j + 0.5) / 8.0));
    return out;
}

/// Runs the moment conditions plus the crossing-consistency check over a
/// set of exterior base points. Per-point failures are recorded in the
/// report instead of aborting the sweep.
inline MomentReport range_test(const LineField& field, const SupportCurve& curve,
                               const std::vector<Complex>& zs, int n_max,
                               double tol_m = kDefaultMomentTol,
                               const QuadratureConfig& cfg = {}) {
    MomentReport report;
    report.curve_spec = curve.spec();
    report.field_provenance = field.provenance_name();
    report.n_max = n_max;
    report.tol_m = tol_m;
    if (zs.empty()) {
        report.warnings.push_back("empty z set: vacuous pass");
        return report;
    }
    for (const Complex z : zs) {
        try {
            MomentReport one = moments(field, curve, z, n_max, tol_m, cfg);
            report.aggregate_pass = report.aggregate_pass && one.aggregate_pass;
            report.entries.insert(report.entries.end(), one.entries.begin(),
                                  one.entries.end());
            const PlaneClass pc = curve.classify(z);
            ConsistencyEntry ce;
            ce.z = z;
            ce.residual = consistency_check(field, curve, z);
            const double ref =
                1.0 + std::max(std::abs(field(pc.theta1, z)), std::abs(field(pc.theta2, z)));
            ce.normalized = ce.residual / ref;
            ce.pass = ce.normalized <= tol_m;
            report.aggregate_pass = report.aggregate_pass && ce.pass;
            report.consistency.push_back(ce);
        } catch (const Error& err) {
            report.errors.push_back("z = " + detail::format_z(z) + ": " + err.what());
            report.aggregate_pass = false;
        }
    }
    return report;
}

} // namespace lineext
