#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lineext/curve.hpp"
#include "lineext/slices.hpp"
#include "lineext/types.hpp"
#include "lineext/util.hpp"

namespace lineext {

/// Entire function of two complex variables used to generate and check
/// line data: either a bivariate polynomial sum c_jk z^j w^k or an
/// exponential exp(alpha z + beta w).
class GroundTruth {
public:
    struct Term {
        int zdeg;
        int wdeg;
        Complex coef;
    };

    static GroundTruth polynomial(std::vector<Term> terms) {
        GroundTruth f;
        f.is_poly_ = true;
        for (const auto& t : terms) {
            if (t.zdeg < 0 || t.wdeg < 0 || t.zdeg > kMaxDegree || t.wdeg > kMaxDegree)
                throw ParseError("polynomial term degree out of range");
            if (!std::isfinite(t.coef.real()) || !std::isfinite(t.coef.imag()))
                throw ParseError("polynomial coefficient not finite");
        }
        f.terms_ = std::move(terms);
        return f;
    }

    static GroundTruth constant(Complex v) { return polynomial({{0, 0, v}}); }

    static GroundTruth exponential(Complex alpha, Complex beta) {
        GroundTruth f;
        f.is_poly_ = false;
        f.alpha_ = alpha;
        f.beta_ = beta;
        return f;
    }

    /// Parses "poly:j,k,re,im;j,k,re,im;..." or "exp:re_a,im_a,re_b,im_b".
    static GroundTruth parse(const std::string& spec);

    Complex eval(Complex z, Complex w) const {
        if (!is_poly_) return std::exp(alpha_ * z + beta_ * w);
        Complex sum = 0.0;
        for (const auto& t : terms_)
            sum += t.coef * pow_int(z, t.zdeg) * pow_int(w, t.wdeg);
        return sum;
    }

    bool is_polynomial() const { return is_poly_; }
    const std::vector<Term>& terms() const { return terms_; }

    std::string describe() const {
        if (!is_poly_)
            return "exp:" + fmt17(alpha_.real()) + "," + fmt17(alpha_.imag()) + "," +
                   fmt17(beta_.real()) + "," + fmt17(beta_.imag());
        std::string out = "poly:";
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            if (i) out += ";";
            out += std::to_string(terms_[i].zdeg) + "," + std::to_string(terms_[i].wdeg) +
                   "," + fmt17(terms_[i].coef.real()) + "," + fmt17(terms_[i].coef.imag());
        }
        return out;
    }

    static Complex pow_int(Complex base, int e) {
        Complex out = 1.0;
        while (e > 0) {
            if (e & 1) out *= base;
            base *= base;
            e >>= 1;
        }
        return out;
    }

private:
    static constexpr int kMaxDegree = 64;
    bool is_poly_ = true;
    std::vector<Term> terms_;
    Complex alpha_{0.0, 0.0}, beta_{0.0, 0.0};
};

/// Per-line entire data: theta selects the tangent line, and the stored
/// oracle evaluates that line's entire function anywhere in C. Immutable
/// and reentrant; copies share the underlying oracle.
class LineField {
public:
    enum class Provenance { GroundTruth, Fitted, Corrupted };
    using Eval = std::function<Complex(double theta, Complex zeta)>;

    LineField(Eval eval, Provenance provenance, std::string description)
        : eval_(std::make_shared<Eval>(std::move(eval))),
          provenance_(provenance),
          description_(std::move(description)) {}

    Complex operator()(double theta, Complex zeta) const {
        return (*eval_)(theta, zeta);
    }

    Provenance provenance() const { return provenance_; }

    const char* provenance_name() const {
        switch (provenance_) {
            case Provenance::GroundTruth: return "ground-truth-backed";
            case Provenance::Fitted: return "fitted";
            case Provenance::Corrupted: return "corrupted";
        }
        return "unknown";
    }

    const std::string& description() const { return description_; }

private:
    std::shared_ptr<const Eval> eval_;
    Provenance provenance_;
    std::string description_;
};

/// Restriction of a two-variable entire function to the line family: on
/// the line at angle theta, w = conj(lambda) - e^{-2 i theta} (zeta - lambda),
/// so each per-line function is entire in zeta.
inline LineField from_ground_truth(const SupportCurve& curve, GroundTruth f0) {
    auto eval = [curve, f0](double theta, Complex zeta) {
        const Complex lam = curve.point(theta);
        const Complex w = std::conj(lam) - std::polar(1.0, -2.0 * theta) * (zeta - lam);
        return f0.eval(zeta, w);
    };
    return LineField(std::move(eval), LineField::Provenance::GroundTruth,
                     f0.describe());
}

/// Value of the aggregate surface function at the point of the line at
/// angle theta over z, i.e. at (z, gamma_point(z, theta)).
inline Complex eval_on_m(const LineField& field, double theta, Complex z) {
    return field(theta, z);
}

/// Additive per-line perturbation amplitude * g(theta); produces data that
/// is no longer the trace of any single entire function.
inline LineField corrupt(const LineField& base, double amplitude,
                         std::function<double(double)> g = {}) {
    if (!g) g = [](double theta) { return std::cos(theta); };
    auto eval = [base, amplitude, g = std::move(g)](double theta, Complex zeta) {
        return base(theta, zeta) + amplitude * g(theta);
    };
    return LineField(std::move(eval), LineField::Provenance::Corrupted,
                     base.description() + "+corrupt:" + fmt17(amplitude));
}

/// |f_{theta1}(z) - f_{theta2}(z)| over the two tangent lines through an
/// exterior z; zero for data that agrees at the line crossings.
inline double consistency_check(const LineField& field, const SupportCurve& curve,
                                Complex z) {
    const PlaneClass pc = curve.classify(z);
    if (pc.label == PlaneLabel::OnCurve)
        throw OnCurveError("consistency_check: z on the curve within tolerance");
    if (pc.label == PlaneLabel::Interior)
        throw RegionError("consistency_check: z must be exterior");
    return std::abs(field(pc.theta1, z) - field(pc.theta2, z));
}

/// One tangent line's worth of real-parameter samples: values of the
/// boundary function at lambda + t lambda' for real t.
struct LineSamples {
    double theta = 0.0;
    std::vector<double> t;
    std::vector<Complex> value;
};

struct LineFitDiagnostics {
    double theta = 0.0;
    double residual = 0.0; // max |fit - sample| over this line's samples
    double condition = 0.0;
};

struct FittedLineField {
    LineField field;
    std::vector<LineFitDiagnostics> diagnostics;
    double max_residual = 0.0;
};

/// Per-line least-squares polynomial fit in the real line parameter,
/// re-expressed in the complex coordinate along the line. Evaluation at
/// angles between fitted lines interpolates the coefficient vectors
/// linearly (periodically) in theta.
inline FittedLineField fit_from_real_samples(const SupportCurve& curve,
                                             std::vector<LineSamples> lines,
                                             int degree,
                                             double condition_limit = 1e12) {
    if (degree < 0) throw ParseError("fit degree must be nonnegative");
    if (lines.empty()) throw InsufficientSamples("no lines to fit");
    std::sort(lines.begin(), lines.end(),
              [](const LineSamples& a, const LineSamples& b) { return a.theta < b.theta; });

    struct FittedLine {
        double theta;
        std::vector<Complex> coef; // in u = (zeta - lambda)/lambda'
    };
    auto fitted = std::make_shared<std::vector<FittedLine>>();
    std::vector<LineFitDiagnostics> diags;
    double max_residual = 0.0;

    for (const auto& line : lines) {
        const int n = static_cast<int>(line.t.size());
        if (n != static_cast<int>(line.value.size()))
            throw ParseError("line sample table has mismatched columns");
        double scale = 0.0;
        for (double t : line.t) scale = std::max(scale, std::abs(t));
        if (scale == 0.0) scale = 1.0;
        std::vector<double> sorted = line.t;
        std::sort(sorted.begin(), sorted.end());
        int distinct = n == 0 ? 0 : 1;
        for (int i = 1; i < n; ++i)
            if (sorted[i] - sorted[i - 1] > 1e-12 * (1.0 + scale)) ++distinct;
        if (distinct < degree + 1)
            throw InsufficientSamples("line theta = " + fmt17(line.theta) + " has " +
                                      std::to_string(distinct) +
                                      " distinct parameters for degree " +
                                      std::to_string(degree));

        Eigen::MatrixXd a(n, degree + 1);
        Eigen::VectorXcd b(n);
        for (int i = 0; i < n; ++i) {
            double p = 1.0;
            for (int k = 0; k <= degree; ++k) {
                a(i, k) = p;
                p *= line.t[i] / scale;
            }
            b(i) = line.value[i];
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double cond = svd.singularValues()(0) /
                            svd.singularValues()(svd.singularValues().size() - 1);
        if (!(cond < condition_limit))
            throw IllConditionedFit("line theta = " + fmt17(line.theta) +
                                    " normal system condition " + fmt17(cond));
        const Eigen::VectorXcd sol =
            svd.solve(b.real().eval()).cast<Complex>() +
            Complex(0, 1) * svd.solve(b.imag().eval()).cast<Complex>();

        double residual = 0.0;
        for (int i = 0; i < n; ++i) {
            Complex fit = 0.0;
            double p = 1.0;
            for (int k = 0; k <= degree; ++k) {
                fit += sol(k) * p;
                p *= line.t[i] / scale;
            }
            residual = std::max(residual, std::abs(fit - b(i)));
        }
        max_residual = std::max(max_residual, residual);
        diags.push_back({line.theta, residual, cond});

        FittedLine fl;
        fl.theta = wrap_angle(line.theta);
        fl.coef.resize(degree + 1);
        double rescale = 1.0;
        for (int k = 0; k <= degree; ++k) {
            fl.coef[k] = sol(k) / rescale;
            rescale *= scale;
        }
        fitted->push_back(std::move(fl));
    }
    std::sort(fitted->begin(), fitted->end(),
              [](const FittedLine& a, const FittedLine& b) { return a.theta < b.theta; });

    auto eval = [curve, fitted, degree](double theta, Complex zeta) {
        const double t = wrap_angle(theta);
        const auto& lines = *fitted;
        std::vector<Complex> coef(degree + 1);
        if (lines.size() == 1) {
            coef = lines[0].coef;
        } else {
            // periodic bracketing of t between consecutive fitted angles
            std::size_t hi = 0;
            while (hi < lines.size() && lines[hi].theta <= t) ++hi;
            const std::size_t ia = (hi == 0 ? lines.size() : hi) - 1;
            const std::size_t ib = hi % lines.size();
            double span = lines[ib].theta - lines[ia].theta;
            double local = t - lines[ia].theta;
            if (span <= 0.0) span += kTwoPi;
            if (local < 0.0) local += kTwoPi;
            const double alpha = span == 0.0 ? 0.0 : local / span;
            for (int k = 0; k <= degree; ++k)
                coef[k] = (1.0 - alpha) * lines[ia].coef[k] + alpha * lines[ib].coef[k];
        }
        const Complex u = (zeta - curve.point(t)) / curve.unit_tangent(t);
        Complex sum = 0.0, p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            sum += coef[k] * p;
            p *= u;
        }
        return sum;
    };

    FittedLineField out{LineField(std::move(eval), LineField::Provenance::Fitted,
                                  "fitted:degree=" + std::to_string(degree)),
                        std::move(diags), max_residual};
    return out;
}

inline GroundTruth GroundTruth::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ParseError("truth spec must look like kind:params, got \"" + spec + "\"");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);

    auto parse_nums = [&](const std::string& text) {
        std::vector<double> nums;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto comma = text.find(',', pos);
            const std::string tok =
                text.substr(pos, comma == std::string::npos ? std::string::npos
                                                            : comma - pos);
            try {
                std::size_t used = 0;
                nums.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError("bad number \"" + tok + "\" in truth spec \"" + spec +
                                 "\"");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        return nums;
    };

    if (kind == "exp") {
        const auto nums = parse_nums(body);
        if (nums.size() != 4)
            throw ParseError("exp spec takes re_a,im_a,re_b,im_b");
        return exponential({nums[0], nums[1]}, {nums[2], nums[3]});
    }
    if (kind == "poly") {
        std::vector<Term> terms;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const auto semi = body.find(';', pos);
            const std::string group =
                body.substr(pos, semi == std::string::npos ? std::string::npos
                                                           : semi - pos);
            const auto nums = parse_nums(group);
            if (nums.size() != 4)
                throw ParseError("each poly term takes j,k,re,im");
            const double jd = nums[0], kd = nums[1];
            if (jd != std::floor(jd) || kd != std::floor(kd))
                throw ParseError("poly degrees must be integers");
            terms.push_back({static_cast<int>(jd), static_cast<int>(kd),
                             {nums[2], nums[3]}});
            if (semi == std::string::npos) break;
            pos = semi + 1;
        }
        return polynomial(std::move(terms));
    }
    throw ParseError("unknown truth kind \"" + kind + "\"");
}

} // namespace lineext
