#pragma once

#include <string>
#include <utility>
#include <vector>

namespace crossdiff {

/// Growth rate as a function of the total density w. The built-in family
/// (zero, constant, logistic-affine, piecewise-linear table) keeps configs
/// serializable and makes the structural validation below meaningful;
/// arbitrary code injection is deliberately not supported.
class RateFunction {
public:
    enum class Kind { Zero, Constant, Affine, PiecewiseLinear };

    RateFunction() = default;

    static RateFunction zero();
    static RateFunction constant(double value);
    /// alpha * (w_p - w): nonnegative below the threshold, nonpositive above.
    static RateFunction affine(double alpha, double w_p);
    /// Linear interpolation through (w_k, value_k); constant beyond the ends.
    /// Knots must be strictly increasing, at least two of them.
    static RateFunction piecewise_linear(std::vector<double> w, std::vector<double> value);

    double operator()(double w) const;

    Kind kind() const { return kind_; }
    double constant_value() const { return offset_; }
    double affine_alpha() const { return -slope_; }
    const std::vector<double>& knots() const { return knots_w_; }
    const std::vector<double>& values() const { return knots_v_; }

private:
    Kind kind_ = Kind::Zero;
    double offset_ = 0.0;   // constant / affine: value = offset_ + slope_ * w
    double slope_ = 0.0;
    std::vector<double> knots_w_;
    std::vector<double> knots_v_;
};

/// The four rate functions plus the homeostatic threshold w_p > 0.
struct GrowthModel {
    RateFunction F1, F2, G1, G2;
    double w_p = 1.0;

    double F(double w) const { return F1(w) + F2(w); }
    double G(double w) const { return G1(w) + G2(w); }
    double E(double w) const;   // min of the four rates at w
};

GrowthModel zero_model(double w_p = 1.0);
/// All four rates affine alpha*(w_p - w); the stock test model.
GrowthModel logistic_model(double alpha, double w_p);

/// Clamp to [0, w_p]: 0 for s <= 0, s in between, w_p for s >= w_p.
/// Monotone nondecreasing and 1-Lipschitz. Rejects w_p <= 0.
double theta_p(double s, double w_p);

/// R1 = u1*F1(w) + u2*G1(w), R2 = u1*F2(w) + u2*G2(w).
std::pair<double, double> reaction_rates(double u1, double u2, double w,
                                         const GrowthModel& model);

/// true iff A|xi|^2 + B xi.eta + C|eta|^2 >= 0 for all xi, eta in R^d.
/// Closed form: A >= 0, C >= 0, B^2 <= 4AC, with the degenerate rule
/// A = 0 (or C = 0) forcing B = 0 spelled out explicitly.
bool quadratic_form_nonneg(double A, double B, double C);

/// Sampled bound M0 = max(0, max_{[0,w_p]} F, max_{[0,w_p]} G); admissible
/// reactions then satisfy 0 <= R <= w_p * M0.
struct ReactionBound {
    double M0 = 0.0;
};

/// Dense sampling on [0, w_p] with both endpoints included; refining with
/// nested sample sets (n -> 2n-1) makes the estimate monotone nondecreasing.
ReactionBound reaction_bound(const GrowthModel& model, int n_samples);

struct H1Check {
    bool pass = true;
    double worst_w = 0.0;       // sample location of the worst violation
    double worst_value = 0.0;   // signed margin; negative side depends on check
};

/// Sampling report for the three structural inequalities: F <= 0 and G <= 0 on
/// [w_p, W_max], min of the four rates >= 0 on [0, w_p). Also estimates a
/// continuity ratio (max adjacent-sample jump at 2n vs n samples; ~0.5 for the
/// built-in family, ~1 across a genuine jump).
struct H1Report {
    H1Check sum_f_nonpos;
    H1Check sum_g_nonpos;
    H1Check min_nonneg;
    double continuity_ratio = 0.0;
    double max_jump = 0.0;
    bool continuity_ok = true;

    bool pass() const {
        return sum_f_nonpos.pass && sum_g_nonpos.pass && min_nonneg.pass && continuity_ok;
    }
    std::string describe() const;
};

/// Never throws on a violating model; returns the structured report.
/// Samples [0, max(W_max, 2*w_p)]. Requires W_max > w_p and n_samples >= 2.
H1Report validate_h1(const GrowthModel& model, double W_max, int n_samples = 10000);

/// Mobilities, exponent and numerical tolerances of the regularized scheme.
struct Params {
    double mu = 1.0;
    double nu = 1.0;
    double gamma = 2.0;        // > 1
    double epsilon = 1e-4;     // >= 0; = 0 only for the limit-equation oracle
    double picard_tol = 1e-10;
    double linear_tol = 1e-12;
    int max_picard = 50;

    /// Lift u1(.,0) by epsilon at run start; the active floor for w is then
    /// epsilon instead of 0 and volume fractions stay well defined.
    bool lift_initial = false;

    double epsilon_floor() const { return lift_initial ? epsilon : 0.0; }
};

/// Range checks (mu, nu > 0; gamma > 1; epsilon >= 0; positive tolerances).
/// Returns one message per violation; empty means valid.
std::vector<std::string> validate_params(const Params& p);

}  // namespace crossdiff
