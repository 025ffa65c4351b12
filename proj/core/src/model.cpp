#include "crossdiff/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crossdiff {

RateFunction RateFunction::zero() {
    return RateFunction{};
}

RateFunction RateFunction::constant(double value) {
    RateFunction r;
    r.kind_ = Kind::Constant;
    r.offset_ = value;
    return r;
}

RateFunction RateFunction::affine(double alpha, double w_p) {
    if (!(w_p > 0.0)) throw std::invalid_argument("RateFunction::affine: w_p must be positive");
    RateFunction r;
    r.kind_ = Kind::Affine;
    r.offset_ = alpha * w_p;
    r.slope_ = -alpha;
    return r;
}

RateFunction RateFunction::piecewise_linear(std::vector<double> w, std::vector<double> value) {
    if (w.size() < 2 || w.size() != value.size())
        throw std::invalid_argument("RateFunction::piecewise_linear: need >= 2 matching knots");
    for (std::size_t k = 1; k < w.size(); ++k)
        if (!(w[k] > w[k - 1]))
            throw std::invalid_argument(
                "RateFunction::piecewise_linear: knots must be strictly increasing");
    RateFunction r;
    r.kind_ = Kind::PiecewiseLinear;
    r.knots_w_ = std::move(w);
    r.knots_v_ = std::move(value);
    return r;
}

double RateFunction::operator()(double w) const {
    switch (kind_) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return offset_;
        case Kind::Affine:
            return offset_ + slope_ * w;
        case Kind::PiecewiseLinear: {
            if (w <= knots_w_.front()) return knots_v_.front();
            if (w >= knots_w_.back()) return knots_v_.back();
            const auto it = std::upper_bound(knots_w_.begin(), knots_w_.end(), w);
            const std::size_t hi = static_cast<std::size_t>(it - knots_w_.begin());
            const std::size_t lo = hi - 1;
            const double s = (w - knots_w_[lo]) / (knots_w_[hi] - knots_w_[lo]);
            return knots_v_[lo] + s * (knots_v_[hi] - knots_v_[lo]);
        }
    }
    return 0.0;
}

double GrowthModel::E(double w) const {
    return std::min(std::min(F1(w), F2(w)), std::min(G1(w), G2(w)));
}

GrowthModel zero_model(double w_p) {
    GrowthModel m;
    m.w_p = w_p;
    return m;
}

GrowthModel logistic_model(double alpha, double w_p) {
    GrowthModel m;
    m.w_p = w_p;
    m.F1 = m.F2 = m.G1 = m.G2 = RateFunction::affine(alpha, w_p);
    return m;
}

double theta_p(double s, double w_p) {
    if (!(w_p > 0.0)) throw std::invalid_argument("theta_p: w_p must be positive");
    if (s <= 0.0) return 0.0;
    if (s >= w_p) return w_p;
    return s;
}

std::pair<double, double> reaction_rates(double u1, double u2, double w,
                                         const GrowthModel& model) {
    return {u1 * model.F1(w) + u2 * model.G1(w), u1 * model.F2(w) + u2 * model.G2(w)};
}

bool quadratic_form_nonneg(double A, double B, double C) {
    if (A < 0.0 || C < 0.0) return false;
    // degenerate case split: a vanishing square coefficient forces B = 0,
    // otherwise a mixed-term sign choice drives the form negative
    if (A == 0.0) return B == 0.0;
    if (C == 0.0) return B == 0.0;
    return B * B <= 4.0 * A * C;
}

ReactionBound reaction_bound(const GrowthModel& model, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("reaction_bound: n_samples must be >= 2");
    double mf = 0.0, mg = 0.0;   // clamped at 0: the bound only needs an upper envelope
    for (int k = 0; k < n_samples; ++k) {
        const double w = model.w_p * static_cast<double>(k) / (n_samples - 1);
        mf = std::max(mf, model.F(w));
        mg = std::max(mg, model.G(w));
    }
    return ReactionBound{std::max(mf, mg)};
}

namespace {

double max_adjacent_jump(const GrowthModel& m, double hi, int n) {
    double jump = 0.0;
    double pf1 = m.F1(0.0), pf2 = m.F2(0.0), pg1 = m.G1(0.0), pg2 = m.G2(0.0);
    for (int k = 1; k < n; ++k) {
        const double w = hi * static_cast<double>(k) / (n - 1);
        const double f1 = m.F1(w), f2 = m.F2(w), g1 = m.G1(w), g2 = m.G2(w);
        jump = std::max({jump, std::fabs(f1 - pf1), std::fabs(f2 - pf2), std::fabs(g1 - pg1),
                         std::fabs(g2 - pg2)});
        pf1 = f1;
        pf2 = f2;
        pg1 = g1;
        pg2 = g2;
    }
    return jump;
}

}  // namespace

H1Report validate_h1(const GrowthModel& model, double W_max, int n_samples) {
    if (!(W_max > model.w_p))
        throw std::invalid_argument("validate_h1: W_max must exceed w_p");
    if (n_samples < 2) throw std::invalid_argument("validate_h1: n_samples must be >= 2");

    const double hi = std::max(W_max, 2.0 * model.w_p);
    H1Report rep;
    rep.sum_f_nonpos.worst_value = -1.0;
    rep.sum_g_nonpos.worst_value = -1.0;
    rep.min_nonneg.worst_value = 1.0;

    for (int k = 0; k < n_samples; ++k) {
        const double w = hi * static_cast<double>(k) / (n_samples - 1);
        if (w >= model.w_p) {
            const double f = model.F(w);
            if (f > rep.sum_f_nonpos.worst_value) {
                rep.sum_f_nonpos.worst_value = f;
                rep.sum_f_nonpos.worst_w = w;
            }
            const double g = model.G(w);
            if (g > rep.sum_g_nonpos.worst_value) {
                rep.sum_g_nonpos.worst_value = g;
                rep.sum_g_nonpos.worst_w = w;
            }
        } else {
            const double e = model.E(w);
            if (e < rep.min_nonneg.worst_value) {
                rep.min_nonneg.worst_value = e;
                rep.min_nonneg.worst_w = w;
            }
        }
    }
    rep.sum_f_nonpos.pass = rep.sum_f_nonpos.worst_value <= 0.0;
    rep.sum_g_nonpos.pass = rep.sum_g_nonpos.worst_value <= 0.0;
    rep.min_nonneg.pass = rep.min_nonneg.worst_value >= 0.0;

    // continuity probe: refining the sample grid should shrink the largest
    // adjacent jump; a genuine discontinuity keeps it O(1)
    const double jump_coarse = max_adjacent_jump(model, hi, n_samples);
    const double jump_fine = max_adjacent_jump(model, hi, 2 * n_samples - 1);
    rep.max_jump = jump_coarse;
    rep.continuity_ratio = jump_coarse > 0.0 ? jump_fine / jump_coarse : 0.0;
    rep.continuity_ok = jump_coarse <= 1e-14 || rep.continuity_ratio <= 0.9;
    return rep;
}

std::string H1Report::describe() const {
    std::ostringstream os;
    auto line = [&os](const char* name, const H1Check& c, const char* relation) {
        os << name << ": " << (c.pass ? "pass" : "fail");
        if (!c.pass)
            os << " (worst " << relation << " " << c.worst_value << " at w = " << c.worst_w << ")";
        os << "\n";
    };
    line("F1+F2 <= 0 on [w_p, W_max]", sum_f_nonpos, "value");
    line("G1+G2 <= 0 on [w_p, W_max]", sum_g_nonpos, "value");
    line("min rate >= 0 on [0, w_p)", min_nonneg, "value");
    os << "continuity: " << (continuity_ok ? "pass" : "fail")
       << " (jump ratio " << continuity_ratio << ")\n";
    return os.str();
}

std::vector<std::string> validate_params(const Params& p) {
    std::vector<std::string> errs;
    if (!(p.mu > 0.0)) errs.push_back("mu must be positive");
    if (!(p.nu > 0.0)) errs.push_back("nu must be positive");
    if (!(p.gamma > 1.0)) errs.push_back("gamma must be > 1");
    if (!(p.epsilon >= 0.0)) errs.push_back("epsilon must be >= 0");
    if (!(p.picard_tol > 0.0)) errs.push_back("picard_tol must be positive");
    if (!(p.linear_tol > 0.0)) errs.push_back("linear_tol must be positive");
    if (p.max_picard < 1) errs.push_back("max_picard must be >= 1");
    return errs;
}

}  // namespace crossdiff
