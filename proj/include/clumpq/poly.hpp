#pragma once

#include <complex>
#include <vector>

#include "clumpq/model.hpp"

namespace clumpq {

// Denominator polynomial D(z) of the stationary generating function:
// coeffs[d] = StepLaw prob of increment d - ell for d != ell, and
// coeffs[ell] = -(1 - prob(0)). Degree 2*ell. D(1) = 0 because the step
// probabilities sum to 1, and z = q^2/p^2 is always a root (the increment
// law satisfies prob(d) (q^2/p^2)^d = prob(-d)).
struct DenominatorPoly {
  int ell = 1;
  std::vector<double> coeffs;  // coeffs[d], d = 0..2*ell
};

DenominatorPoly build_denominator(const ModelParams& params);

// All 2*ell roots of D, bucketed. unit_root and geometric_root are snapped
// to their exact values; inside/outside hold the remaining roots sorted by
// (real, imag) and closed under conjugation.
struct RootClassification {
  std::vector<std::complex<double>> inside;   // |z| < 1, expect ell-1 of them
  double unit_root = 1.0;                     // z = 1
  double geometric_root = 0.0;                // z* = q^2/p^2
  std::vector<std::complex<double>> outside;  // |z| > 1 besides z*
};

// Companion-matrix seeds polished by Newton iteration against the full
// polynomial; every root must meet residual < 1e-12 and sit at least 1e-7
// away from the unit circle, and exactly ell-1 roots must land inside,
// otherwise a StructuralError reports the assumption that broke.
RootClassification classify_roots(const DenominatorPoly& poly,
                                  const ModelParams& params);

// Small shared helpers, exposed for the solver modules and tests.
long double poly_eval(const std::vector<long double>& coeffs, long double x);
std::complex<long double> poly_eval(const std::vector<long double>& coeffs,
                                    std::complex<long double> z);
std::vector<long double> poly_derivative(const std::vector<long double>& coeffs);

// Divides by (1 - z); the remainder equals the value at z = 1 and is
// returned through *remainder when given. Each quotient coefficient is kept
// in whichever of its two renditions (prefix sum or negated suffix sum)
// accumulates less absolute mass, so the result is a faithful quotient only
// when the input vanishes at z = 1; the two renditions differ by exactly the
// remainder otherwise. Every polynomial stripped here is built to cancel its
// 1 - z factor, and callers check the returned remainder against zero.
std::vector<long double> strip_unit_root(const std::vector<long double>& coeffs,
                                         long double* remainder = nullptr);

}  // namespace clumpq
