#include "clumpq/poly.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "clumpq/errors.hpp"

namespace clumpq {

namespace {

using cld = std::complex<long double>;

long double abs_scale_at(const std::vector<long double>& coeffs, long double r) {
  long double scale = 0.0L;
  long double pw = 1.0L;
  for (long double c : coeffs) {
    scale += std::fabs(c) * pw;
    pw *= r;
  }
  return scale;
}

// One Newton refinement pass over a companion-matrix seed. The iteration
// runs on the full degree-2*ell polynomial so deflation error cannot leak
// into the polished value.
cld polish_root(const std::vector<long double>& coeffs,
                const std::vector<long double>& deriv, cld z) {
  for (int iter = 0; iter < 12; ++iter) {
    cld f = poly_eval(coeffs, z);
    cld fp = poly_eval(deriv, z);
    if (std::abs(fp) < 1e-300L) {
      throw StructuralError("root polishing hit a vanishing derivative");
    }
    cld step = f / fp;
    z -= step;
    if (std::abs(step) <= 1e-18L * (1.0L + std::abs(z))) break;
  }
  return z;
}

std::vector<long double> deflate(const std::vector<long double>& coeffs,
                                 long double root, long double* remainder) {
  const size_t n = coeffs.size() - 1;
  std::vector<long double> quot(n);
  quot[n - 1] = coeffs[n];
  for (size_t i = n - 1; i >= 1; --i) {
    quot[i - 1] = coeffs[i] + root * quot[i];
  }
  if (remainder != nullptr) *remainder = coeffs[0] + root * quot[0];
  return quot;
}

}  // namespace

long double poly_eval(const std::vector<long double>& coeffs, long double x) {
  long double acc = 0.0L;
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

std::complex<long double> poly_eval(const std::vector<long double>& coeffs,
                                    std::complex<long double> z) {
  cld acc(0.0L, 0.0L);
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
  return acc;
}

std::vector<long double> poly_derivative(const std::vector<long double>& coeffs) {
  if (coeffs.size() <= 1) return {0.0L};
  std::vector<long double> out(coeffs.size() - 1);
  for (size_t i = 1; i < coeffs.size(); ++i) {
    out[i - 1] = static_cast<long double>(i) * coeffs[i];
  }
  return out;
}

std::vector<long double> strip_unit_root(const std::vector<long double>& coeffs,
                                         long double* remainder) {
  const size_t n = coeffs.size() - 1;
  std::vector<long double> quot(n);
  std::vector<long double> prefix_mass(n);
  long double run = 0.0L;
  long double run_mass = 0.0L;
  for (size_t i = 0; i < n; ++i) {
    run += coeffs[i];
    run_mass += std::fabs(coeffs[i]);
    quot[i] = run;
    prefix_mass[i] = run_mass;
  }
  if (remainder != nullptr) *remainder = run + coeffs[n];
  // Each quotient coefficient is both a prefix and (up to the remainder) a
  // negated suffix of the input. Rounding noise in either rendition scales
  // with the absolute mass of the terms it sums, so keep the side that sums
  // less mass. Comparing the two results instead would tie whenever the
  // coefficient is genuinely small and could keep a cancellation-ridden
  // prefix over an exact suffix of the same size.
  long double suffix = -coeffs[n];
  long double suffix_mass = std::fabs(coeffs[n]);
  for (size_t i = n; i-- > 0;) {
    if (suffix_mass < prefix_mass[i]) quot[i] = suffix;
    suffix -= coeffs[i];
    suffix_mass += std::fabs(coeffs[i]);
  }
  return quot;
}

DenominatorPoly build_denominator(const ModelParams& params) {
  const StepLaw law = step_law(params);
  DenominatorPoly poly;
  poly.ell = params.ell;
  poly.coeffs = law.probs;
  poly.coeffs[params.ell] = -(1.0 - law.probs[params.ell]);
  return poly;
}

RootClassification classify_roots(const DenominatorPoly& poly,
                                  const ModelParams& params) {
  if (poly.ell != params.ell) {
    throw std::invalid_argument("polynomial and parameters disagree on ell");
  }
  if (!(params.p > 0.0) || !(params.q > params.p)) {
    throw std::invalid_argument("root classification needs 0 < p < q");
  }
  const int ell = params.ell;
  const long double zstar = static_cast<long double>(params.q) * params.q /
                            (static_cast<long double>(params.p) * params.p);

  std::vector<long double> full(poly.coeffs.begin(), poly.coeffs.end());
  const std::vector<long double> deriv = poly_derivative(full);

  long double rem_unit = 0.0L;
  std::vector<long double> reduced = strip_unit_root(full, &rem_unit);
  if (std::fabs(rem_unit) > 1e-12L * abs_scale_at(full, 1.0L)) {
    throw StructuralError("denominator does not vanish at z = 1");
  }

  long double rem_geo = 0.0L;
  std::vector<long double> core = deflate(reduced, zstar, &rem_geo);
  if (std::fabs(rem_geo) > 1e-12L * abs_scale_at(reduced, zstar)) {
    throw StructuralError("denominator does not vanish at z = q^2/p^2");
  }

  RootClassification cls;
  cls.unit_root = 1.0;
  cls.geometric_root = params.q * params.q / (params.p * params.p);

  const size_t degree = core.size() - 1;  // 2*ell - 2
  if (degree > 0) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    const double lead = static_cast<double>(core[degree]);
    for (size_t i = 0; i + 1 < degree; ++i) companion(i + 1, i) = 1.0;
    for (size_t i = 0; i < degree; ++i) {
      companion(i, degree - 1) = -static_cast<double>(core[i]) / lead;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    if (solver.info() != Eigen::Success) {
      throw StructuralError("companion eigenvalue iteration failed");
    }

    std::vector<cld> polished;
    for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
      const std::complex<double> seed = solver.eigenvalues()[k];
      cld z = polish_root(full, deriv, cld(seed.real(), seed.imag()));
      if (std::fabs(z.imag()) <= 1e-9L * (1.0L + std::fabs(z.real()))) {
        z = cld(z.real(), 0.0L);
      }
      if (z.imag() < 0.0L) continue;  // conjugate re-added below
      polished.push_back(z);
    }

    std::vector<cld> roots;
    for (const cld& z : polished) {
      roots.push_back(z);
      if (z.imag() > 0.0L) roots.push_back(std::conj(z));
    }
    if (roots.size() != degree) {
      throw StructuralError("conjugate pairing of polished roots broke");
    }

    for (const cld& z : roots) {
      const long double resid = std::abs(poly_eval(full, z));
      if (resid > 1e-12L * abs_scale_at(full, std::abs(z))) {
        throw StructuralError("polished root has an oversized residual");
      }
      const long double mod = std::abs(z);
      if (std::fabs(mod - 1.0L) <= 1e-7L) {
        throw StructuralError("root landed inside the unit-circle guard band");
      }
      if (std::abs(z - cld(zstar, 0.0L)) <= 1e-8L * (1.0L + zstar)) {
        throw StructuralError("root collided with the geometric root");
      }
      std::complex<double> zd(static_cast<double>(z.real()),
                              static_cast<double>(z.imag()));
      if (mod < 1.0L) {
        cls.inside.push_back(zd);
      } else {
        cls.outside.push_back(zd);
      }
    }
    for (size_t a = 0; a < roots.size(); ++a) {
      for (size_t b = a + 1; b < roots.size(); ++b) {
        if (std::abs(roots[a] - roots[b]) <=
            1e-8L * (1.0L + std::abs(roots[a]))) {
          throw StructuralError("two polished roots collapsed together");
        }
      }
    }
  }

  const auto by_re_im = [](const std::complex<double>& a,
                           const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  };
  std::sort(cls.inside.begin(), cls.inside.end(), by_re_im);
  std::sort(cls.outside.begin(), cls.outside.end(), by_re_im);

  if (static_cast<int>(cls.inside.size()) != ell - 1) {
    throw StructuralError("expected ell - 1 roots inside the unit disk, found " +
                          std::to_string(cls.inside.size()));
  }
  return cls;
}

}  // namespace clumpq
