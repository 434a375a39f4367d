#pragma once

#include <string>
#include <vector>

namespace hle {

enum class DomainKind { interval, ball, rectangle };

/// Bounded domain containing the origin. Interval (-R,R) in n=1, ball |x|<R
/// (radial class) in n>=2, rectangle (-Lx,Lx)x(-Ly,Ly) in n=2.
struct DomainDescriptor {
    DomainKind kind = DomainKind::interval;
    double extent_x = 1.0; // radius for interval/ball, half-width for rectangle
    double extent_y = 1.0; // rectangle half-height, ignored otherwise

    static DomainDescriptor interval(double radius);
    static DomainDescriptor ball(double radius);
    static DomainDescriptor rectangle(double half_width, double half_height);

    std::string name() const;
};

/// Full parameterization of the weighted eigenvalue system: dimension n,
/// exponent p > 1, weight exponents a (v-equation weight |x|^a) and
/// b (u-equation weight |x|^b), and the domain.
struct ProblemSpec {
    int n = 1;
    double p = 2.0;
    double a = 0.0;
    double b = 0.0;
    DomainDescriptor domain;
};

struct DerivedExponents {
    double p_conjugate; // p/(p-1)
    double s;           // a(p-1)
    double p_hat;       // p if s >= 0, np/(n-s) if s < 0
};

/// Positive pair (lambda1, lambda2) carrying the eigenvalue mu through
/// lambda1^p * lambda2^{p'} = mu^{p'}.
struct EigenvalueSplit {
    double lambda1;
    double lambda2;
    double mu;
};

struct AdmissibilityCondition {
    std::string name;
    double margin = 0.0; // signed distance to the threshold; pass iff > 0
    bool pass = false;
    bool implied = false; // condition automatic given the others (n = 1, 2)
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCondition> conditions;
    bool admissible = false;
    bool low_dimension_automatic = false; // n <= 2: weight-sum condition implied
    std::string summary() const;
};

/// Checks the admissibility conditions (a > -n, b > -n, the weight-sum
/// condition, s > n-np, s+b+2p > 0) and reports each with a signed margin.
/// Inadmissible specs yield a failing report, not an error.
AdmissibilityReport validate(const ProblemSpec& spec);

DerivedExponents derive_exponents(const ProblemSpec& spec);
DerivedExponents derive_exponents(double p, double a, int n);

/// Closed-form positive splitting of mu with lambda1/lambda2 = ratio.
/// Throws ConfigError for non-positive mu or ratio.
EigenvalueSplit split_eigenvalue(double mu, double p, double ratio);

/// Residual of the splitting identity, |lambda1^p lambda2^{p'} - mu^{p'}|
/// relative to mu^{p'}, evaluated in log space.
double splitting_identity_residual(const EigenvalueSplit& split, double p);

} // namespace hle
