#include "clumpq/gfsolver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "clumpq/errors.hpp"
#include "clumpq/linalg.hpp"
#include "clumpq/report.hpp"

namespace clumpq {

namespace {

using cld = std::complex<long double>;

// The boundary solve couples pi_0 ~ 1 to pi_{ell-1} ~ (p/q)^(2 ell - 2); by
// ell = 5, p = 0.1 the unknowns span eight orders of magnitude and the
// system's conditioning consumes all of long double's headroom (the solved
// pi_3 came back negative). Assembly and elimination run on the wide type
// and round once into the returned solution.
using wide = __float128;

// Linear combination of the boundary unknowns pi_0..pi_{ell-1}.
using Form = std::vector<wide>;

wide wabs(wide v) { return v < 0 ? -v : v; }

struct CWide {
  wide re;
  wide im;
};

CWide eval_form_poly(const std::vector<Form>& coeffs, int unknown, CWide z) {
  CWide acc{0, 0};
  for (size_t pw = coeffs.size(); pw-- > 0;) {
    const wide re = acc.re * z.re - acc.im * z.im + coeffs[pw][unknown];
    acc.im = acc.re * z.im + acc.im * z.re;
    acc.re = re;
  }
  return acc;
}

// Same per-coefficient rendition selection as strip_unit_root in poly.cpp,
// restated on the wide type for the boundary assembly.
std::vector<wide> strip_unit_root_wide(const std::vector<wide>& coeffs,
                                       wide* remainder) {
  const size_t n = coeffs.size() - 1;
  std::vector<wide> quot(n);
  std::vector<wide> prefix_mass(n);
  wide run = 0;
  wide run_mass = 0;
  for (size_t i = 0; i < n; ++i) {
    run += coeffs[i];
    run_mass += wabs(coeffs[i]);
    quot[i] = run;
    prefix_mass[i] = run_mass;
  }
  if (remainder != nullptr) *remainder = run + coeffs[n];
  wide suffix = -coeffs[n];
  wide suffix_mass = wabs(coeffs[n]);
  for (size_t i = n; i-- > 0;) {
    if (suffix_mass < prefix_mass[i]) quot[i] = suffix;
    suffix -= coeffs[i];
    suffix_mass += wabs(coeffs[i]);
  }
  return quot;
}

// Residue of N/Dred at a simple root r, expressed as the amplitude A_r of
// the pi_j ~ A_r r^{-j} mode.
cld residue_amplitude(const std::vector<long double>& num,
                      const std::vector<long double>& dred_deriv, cld r) {
  const cld deriv = poly_eval(dred_deriv, r);
  if (std::abs(deriv) < 1e-12L) {
    throw StructuralError(
        "reduced denominator derivative vanished at a root; amplitude is "
        "undefined");
  }
  return -poly_eval(num, r) / (r * deriv);
}

std::pair<std::vector<long double>, std::vector<long double>> rational_parts(
    const StationarySolution& solution) {
  if (solution.numerator.empty() || solution.reduced_denominator.empty()) {
    throw std::invalid_argument("solution is missing its rational form");
  }
  return {std::vector<long double>(solution.numerator.begin(),
                                   solution.numerator.end()),
          std::vector<long double>(solution.reduced_denominator.begin(),
                                   solution.reduced_denominator.end())};
}

}  // namespace

std::vector<double> stationary_oracle(const KernelMatrix& kernel) {
  if (kernel.size < 50) {
    throw std::invalid_argument("stationary oracle needs truncation >= 50");
  }
  const int n = kernel.size;
  std::vector<double> p = kernel.entries;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int c = 0; c < n; ++c) row += p[i * n + c];
    // Only the genuinely leaky rows get patched; adding the rounding noise
    // of already-stochastic rows to the last column would wreck the
    // relative accuracy of the far tail.
    const double leak = 1.0 - row;
    if (leak > 1e-13) p[i * n + (n - 1)] += leak;
  }
  return gth_stationary(std::move(p), n);
}

StationarySolution solve_boundary(const ModelParams& params, CycleOrder order,
                                  const RootClassification& classification) {
  const int ell = params.ell;
  if (static_cast<int>(classification.inside.size()) != ell - 1) {
    throw std::invalid_argument(
        "root classification does not belong to these parameters");
  }

  const StepLaw law = step_law(params);
  std::vector<wide> probs(law.probs.begin(), law.probs.end());
  const wide drop_all = probs[0];  // increment -ell, q^(2 ell)

  const KernelMatrix kernel = cycle_kernel(params, order, 4 * ell + 4);

  // pi_ell..pi_{2 ell} as linear forms in the unknowns. Column balance
  // pi_c = sum_i pi_i K[i][c] is exact for every column, and the highest
  // contributor to column c is row c + ell with weight q^(2 ell) in either
  // cycle order, so the balances at c = 0..ell unwind one level at a time.
  std::vector<Form> form(2 * ell + 1, Form(ell, 0));
  for (int j = 0; j < ell; ++j) form[j][j] = 1;
  for (int c = 0; c <= ell; ++c) {
    Form next = form[c];
    for (int i = 0; i < c + ell; ++i) {
      const wide w = kernel.at(i, c);
      if (w == 0) continue;
      for (int u = 0; u < ell; ++u) next[u] -= w * form[i][u];
    }
    for (int u = 0; u < ell; ++u) next[u] /= drop_all;
    form[c + ell] = next;
  }

  // Raw numerator of the tail generating function over j >= ell + 1. The
  // balance pi_c = sum_d probs(d) pi_{c-d} telescopes into
  // G(z) (1 - Phi(z)) = boundary corrections, and multiplying by -z^ell
  // turns the left side into G(z) D(z).
  const int start = ell + 1;
  std::vector<Form> nraw(3 * ell + 1, Form(ell, 0));
  for (int e = 1; e <= ell; ++e) {
    for (int k = start; k <= start + e - 1; ++k) {
      const int pw = ell - e + k;
      for (int u = 0; u < ell; ++u) {
        nraw[pw][u] += probs[ell - e] * form[k][u];
      }
    }
  }
  for (int d = 1; d <= ell; ++d) {
    for (int k = start - d; k <= start - 1; ++k) {
      const int pw = ell + d + k;
      for (int u = 0; u < ell; ++u) {
        nraw[pw][u] -= probs[ell + d] * form[k][u];
      }
    }
  }

  // Both N_raw and D vanish at z = 1; cancel the factor from each so the
  // normalization limit is exact instead of a numerical 0/0. The strip must
  // be the mass-based one: residues at the outside roots evaluate these
  // coefficients against |r|^pw, and a plain prefix strip leaves O(total
  // mass) rounding in the top coefficients, which the large roots amplify
  // past the value itself once p is small.
  wide peak = 0;
  for (const Form& f : nraw) {
    for (wide v : f) peak = std::max(peak, wabs(v));
  }
  std::vector<Form> ncoef(3 * ell, Form(ell, 0));
  std::vector<wide> column(3 * ell + 1);
  for (int u = 0; u < ell; ++u) {
    for (int pw = 0; pw <= 3 * ell; ++pw) column[pw] = nraw[pw][u];
    wide leftover = 0;
    const std::vector<wide> quot = strip_unit_root_wide(column, &leftover);
    if (wabs(leftover) > 1e-10 * peak) {
      throw StructuralError("numerator failed to cancel its 1 - z factor");
    }
    for (int pw = 0; pw < 3 * ell; ++pw) ncoef[pw][u] = quot[pw];
  }

  const DenominatorPoly dpoly = build_denominator(params);
  std::vector<wide> dfull(dpoly.coeffs.begin(), dpoly.coeffs.end());
  const std::vector<wide> dred = strip_unit_root_wide(dfull, nullptr);
  wide dred_at_one = 0;
  for (wide c : dred) dred_at_one += c;

  // One equation per inside root (real and imaginary parts for a conjugate
  // pair, counted once), plus total-mass normalization.
  std::vector<wide> mat(static_cast<size_t>(ell) * ell, 0);
  std::vector<wide> rhs(ell, 0);
  int row = 0;
  for (const std::complex<double>& zi : classification.inside) {
    if (zi.imag() < 0.0) continue;
    const CWide z{zi.real(), zi.imag()};
    std::vector<CWide> vals(ell);
    for (int u = 0; u < ell; ++u) vals[u] = eval_form_poly(ncoef, u, z);
    for (int u = 0; u < ell; ++u) mat[row * ell + u] = vals[u].re;
    rhs[row++] = 0;
    if (zi.imag() > 0.0) {
      for (int u = 0; u < ell; ++u) mat[row * ell + u] = vals[u].im;
      rhs[row++] = 0;
    }
  }
  for (int u = 0; u < ell; ++u) {
    wide nsum = 0;
    for (int pw = 0; pw < 3 * ell; ++pw) nsum += ncoef[pw][u];
    mat[row * ell + u] = 1 + form[ell][u] + nsum / dred_at_one;
  }
  rhs[row++] = 1;
  if (row != ell) {
    throw StructuralError("boundary system assembled the wrong row count");
  }

  // Equilibrate rows before eliminating; the root equations carry
  // coefficients of order q^(2 ell) while normalization sits near 1.
  for (int r = 0; r < ell; ++r) {
    wide big = 0;
    for (int u = 0; u < ell; ++u) {
      big = std::max(big, wabs(mat[r * ell + u]));
    }
    if (big <= 0) {
      throw StructuralError("boundary system produced an empty equation");
    }
    for (int u = 0; u < ell; ++u) mat[r * ell + u] /= big;
    rhs[r] /= big;
  }
  const std::vector<wide> x = solve_full_pivot(mat, rhs, ell);

  StationarySolution sol;
  sol.ell = ell;
  sol.order = order;
  sol.decay = (params.p / params.q) * (params.p / params.q);
  sol.boundary.resize(ell);
  for (int u = 0; u < ell; ++u) sol.boundary[u] = static_cast<double>(x[u]);

  std::vector<wide> pis(2 * ell + 1, 0);
  for (int j = 0; j <= 2 * ell; ++j) {
    wide acc = 0;
    for (int u = 0; u < ell; ++u) acc += form[j][u] * x[u];
    pis[j] = acc;
  }

  std::vector<wide> num(3 * ell, 0);
  for (int pw = 0; pw < 3 * ell; ++pw) {
    wide acc = 0;
    for (int u = 0; u < ell; ++u) acc += ncoef[pw][u] * x[u];
    num[pw] = acc;
  }
  sol.numerator.assign(num.begin(), num.end());
  sol.reduced_denominator.assign(dred.begin(), dred.end());

  wide nsum = 0;
  for (wide c : num) nsum += c;
  const wide tail = pis[ell] + nsum / dred_at_one;
  sol.tail_mass = static_cast<double>(tail);

  wide mass = tail;
  for (int u = 0; u < ell; ++u) mass += x[u];
  if (wabs(mass - 1) > 1e-10) {
    throw StructuralError("stationary mass failed to normalize");
  }

  sol.pi_vector.resize(kPiWindow);
  for (int j = 0; j < kPiWindow && j <= 2 * ell; ++j) {
    sol.pi_vector[j] = static_cast<double>(pis[j]);
  }
  sol.tail_amplitude = tail_amplitude(params, sol, classification);
  for (int j = 2 * ell + 1; j < kPiWindow; ++j) {
    sol.pi_vector[j] = stationary_tail(sol, classification, j);
  }
  const double floor_tol = -1e-12 * sol.boundary[0];
  for (int j = 0; j < kPiWindow; ++j) {
    double& v = sol.pi_vector[j];
    if (v < floor_tol) {
      throw StructuralError("stationary probability came out negative at j = " +
                            std::to_string(j) + " (" + format_double(v) +
                            " vs pi_0 " + format_double(sol.boundary[0]) + ")");
    }
    if (v < 0.0) v = 0.0;
  }
  return sol;
}

double tail_amplitude(const ModelParams& params,
                      const StationarySolution& solution,
                      const RootClassification& classification) {
  const int ell = params.ell;
  if (ell != solution.ell) {
    throw std::invalid_argument("solution does not belong to these parameters");
  }
  if (static_cast<int>(solution.pi_vector.size()) <= 2 * ell) {
    throw std::invalid_argument(
        "solution window is too short to carry the amplitude");
  }

  // Residue at the geometric root, folded through the step-law symmetry
  // probs(-e) = probs(+e) zstar^e. Every term below is pi_k zstar^k times a
  // plain probability sum, so nothing grows with zstar. Evaluating the
  // expanded numerator at zstar instead subtracts monomials as large as
  // zstar^(3 ell - 1) and loses the small-p cases to cancellation.
  const StepLaw law = step_law(params);
  const long double zstar =
      static_cast<long double>(classification.geometric_root);
  long double bracket = 0.0L;
  long double zk = 1.0L;
  for (int k = 1; k <= 2 * ell; ++k) {
    zk *= zstar;
    long double weight = 0.0L;
    if (k <= ell) {
      for (int d = ell + 1 - k; d <= ell; ++d) {
        weight -= static_cast<long double>(law.probs[ell - d]);
      }
    } else {
      for (int e = k - ell; e <= ell; ++e) {
        weight += static_cast<long double>(law.probs[ell + e]);
      }
    }
    bracket += weight * zk * static_cast<long double>(solution.pi_vector[k]);
  }

  // D'(zstar) = ell (q - p) zstar^(ell - 1) exactly, because Phi(zstar) = 1
  // and zstar Phi'(zstar) telescopes to the negated drift.
  const long double drift =
      static_cast<long double>(ell) *
      (static_cast<long double>(params.q) - static_cast<long double>(params.p));
  return static_cast<double>(-bracket / drift);
}

double stationary_tail(const StationarySolution& solution,
                       const RootClassification& classification, int j) {
  if (j < solution.ell + 1) {
    throw std::invalid_argument("tail reconstruction is valid for j > ell only");
  }
  const auto [num, dred] = rational_parts(solution);
  const std::vector<long double> deriv = poly_derivative(dred);
  const long double jj = static_cast<long double>(j);

  long double value = 0.0L;
  {
    // The geometric mode uses the stored amplitude, which is computed in a
    // cancellation-free form; see tail_amplitude.
    const long double zstar = classification.geometric_root;
    value += static_cast<long double>(solution.tail_amplitude) *
             std::pow(zstar, -jj);
  }
  // Inside roots carry zero weight by construction, so only the geometric
  // and outside modes appear; conjugate pairs enter through twice the real
  // part of the upper member.
  for (const std::complex<double>& rr : classification.outside) {
    if (rr.imag() < 0.0) continue;
    if (rr.imag() == 0.0) {
      const cld amp = residue_amplitude(num, deriv, cld(rr.real(), 0.0L));
      value += amp.real() * std::pow(static_cast<long double>(rr.real()), -jj);
    } else {
      const cld r(rr.real(), rr.imag());
      const cld amp = residue_amplitude(num, deriv, r);
      value += 2.0L * (amp * std::pow(r, cld(-jj, 0.0L))).real();
    }
  }
  return static_cast<double>(value);
}

}  // namespace clumpq
