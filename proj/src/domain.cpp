#include "bilap/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace bilap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

} // namespace

ConvexDomain::ConvexDomain(double a0, std::vector<FourierMode> modes, std::size_t samples)
    : a0_(a0), modes_(std::move(modes)) {
    if (!(a0_ > 0.0) || !std::isfinite(a0_)) throw ParameterError("a0 must be positive and finite");
    if (samples < 1024) throw ParameterError("need at least 1024 boundary samples");
    std::set<int> seen;
    for (const auto& m : modes_) {
        if (m.k == 1) throw ParameterError("mode k = 1 is a translation and is not accepted");
        if (m.k < 2) throw ParameterError("support modes need k >= 2, got " + std::to_string(m.k));
        if (!std::isfinite(m.a) || !std::isfinite(m.b)) throw ParameterError("support coefficients must be finite");
        if (!seen.insert(m.k).second) throw ParameterError("mode k = " + std::to_string(m.k) + " given twice");
    }
    std::sort(modes_.begin(), modes_.end(), [](const FourierMode& x, const FourierMode& y) { return x.k < y.k; });

    rho_.resize(samples);
    kappa_.resize(samples);
    min_rho_ = std::numeric_limits<double>::infinity();
    max_rho_ = -std::numeric_limits<double>::infinity();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        rho_[i] = rho(theta(i));
        if (rho_[i] < min_rho_) {
            min_rho_ = rho_[i];
            worst = i;
        }
        max_rho_ = std::max(max_rho_, rho_[i]);
    }
    if (!(min_rho_ > 0.0)) {
        std::ostringstream msg;
        msg << "support function is not strictly convex: rho = " << min_rho_ << " at theta = " << theta(worst);
        throw NonConvexError(msg.str(), theta(worst));
    }
    for (std::size_t i = 0; i < samples; ++i) kappa_[i] = 1.0 / rho_[i];
    // Cauchy: the k >= 2 terms integrate to zero
    perimeter_ = kTwoPi * a0_;
}

double ConvexDomain::theta(std::size_t i) const {
    return kTwoPi * static_cast<double>(i) / static_cast<double>(rho_.size());
}

double ConvexDomain::support(double theta) const {
    double h = a0_;
    for (const auto& m : modes_) h += m.a * std::cos(m.k * theta) + m.b * std::sin(m.k * theta);
    return h;
}

double ConvexDomain::rho(double theta) const {
    double r = a0_;
    for (const auto& m : modes_) {
        const double k2 = static_cast<double>(m.k) * m.k;
        r += (1.0 - k2) * (m.a * std::cos(m.k * theta) + m.b * std::sin(m.k * theta));
    }
    return r;
}

double ConvexDomain::total_curvature() const {
    double s = 0.0;
    for (std::size_t i = 0; i < rho_.size(); ++i) s += kappa_[i] * rho_[i];
    return s * kTwoPi / static_cast<double>(rho_.size());
}

ConvexDomain domain_from_support(double a0, std::vector<FourierMode> modes, std::size_t samples) {
    return ConvexDomain(a0, std::move(modes), samples);
}

double curvature_weight(const ConvexDomain& d, double t) {
    if (!(t >= 0.0)) throw ParameterError("curvature_weight: t must be non-negative");
    const auto& rho = d.rho_samples();
    double s = 0.0;
    for (double r : rho) s += 1.0 / (r + t);
    return s * kTwoPi / static_cast<double>(rho.size());
}

ConstraintMargins constraint_margins(const ConvexDomain& d, double radius) {
    if (!(radius > 0.0)) throw ParameterError("radius must be positive");
    ConstraintMargins out;
    out.curvature_margin = 1.0 / radius - d.max_kappa();
    out.perimeter_excess = d.perimeter() - kTwoPi * radius;
    out.congruent_to_disk = std::all_of(d.modes().begin(), d.modes().end(), [&](const FourierMode& m) {
        return std::abs(m.a) <= 1e-12 * d.a0() && std::abs(m.b) <= 1e-12 * d.a0();
    });
    out.hypothesis_satisfied = out.curvature_margin >= -1e-12 / radius;
    return out;
}

ConvexDomain parse_domain(std::istream& in, std::size_t samples) {
    std::optional<double> a0;
    std::vector<FourierMode> modes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto fail = [&](const std::string& why) {
            throw ParameterError("domain file line " + std::to_string(lineno) + ": " + why);
        };
        if (key == "a0") {
            double v = 0.0;
            if (!(ls >> v)) fail("expected a0 <value>");
            if (a0) fail("a0 given twice");
            a0 = v;
        } else if (key == "coeff") {
            FourierMode m;
            if (!(ls >> m.k >> m.a >> m.b)) fail("expected coeff <k> <a_k> <b_k>");
            modes.push_back(m);
        } else {
            fail("unknown key '" + key + "'");
        }
        std::string extra;
        if (ls >> extra) fail("trailing text '" + extra + "'");
    }
    if (!a0) throw ParameterError("domain file has no a0 line");
    return ConvexDomain(*a0, std::move(modes), samples);
}

ConvexDomain load_domain(const std::string& path, std::size_t samples) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open domain file " + path);
    return parse_domain(in, samples);
}

} // namespace bilap
