#include "clumpq/clump.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "clumpq/closedform.hpp"
#include "clumpq/errors.hpp"
#include "clumpq/linalg.hpp"
#include "clumpq/rng.hpp"

namespace clumpq {

namespace {

// The hitting system inherits the reversal substitution's r^k column scaling
// and its inside roots cluster near the origin at small p; both together
// push the componentwise sensitivity past what long double can carry by
// ell = 5, so the assembly and the solve run on the wide type.
using wide = __float128;

// Affine combination of the unknowns (nu_0, nu_{-1}, ..., nu_{-ell}) plus a
// constant term in the last slot.
using Affine = std::vector<wide>;

wide wabs(wide v) { return v < 0 ? -v : v; }

struct CWide {
  wide re;
  wide im;
};

CWide cmul(CWide a, CWide b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

CWide cdiv(CWide a, CWide b) {
  const wide den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den,
          (a.im * b.re - a.re * b.im) / den};
}

CWide poly_eval_wide(const std::vector<wide>& coeffs, CWide z) {
  CWide acc{0, 0};
  for (size_t d = coeffs.size(); d-- > 0;) {
    acc = cmul(acc, z);
    acc.re += coeffs[d];
  }
  return acc;
}

// Newton steps against the wide rendition of the denominator; the root
// classification hands over double-precision roots, whose rounding alone is
// enough to shift the deepest hitting probability by 1e-10 once the
// evaluation rows turn near-parallel.
CWide polish_root_wide(const std::vector<wide>& dfull,
                       const std::vector<wide>& dprime, CWide z) {
  for (int it = 0; it < 3; ++it) {
    const CWide step = cdiv(poly_eval_wide(dfull, z), poly_eval_wide(dprime, z));
    z.re -= step.re;
    z.im -= step.im;
  }
  return z;
}

// Paths this far below the target have hit probability under 1e-20 for any
// p <= 0.45 and are abandoned as misses.
constexpr int kAbandonDepth = -150;

double clip_unit(double v, const char* what) {
  if (v < -1e-12 || v > 1.0 + 1e-9) {
    throw StructuralError(std::string(what) + " escaped [0, 1]");
  }
  return std::min(std::max(v, 0.0), 1.0);
}

}  // namespace

double HitProbabilities::at(int j) const {
  if (j == 0) return nu0;
  if (j > 0 && j <= static_cast<int>(nu_pos.size())) return nu_pos[j - 1];
  if (j < 0 && -j <= static_cast<int>(nu_neg.size())) return nu_neg[-j - 1];
  throw std::invalid_argument("hit probability index out of range");
}

HitProbabilities solve_hit_probs(const ModelParams& params) {
  const int ell = params.ell;
  const StepLaw law = step_law(params);
  std::vector<wide> probs(law.probs.begin(), law.probs.end());
  // The rows below lean on identities that hold only at exact unit mass
  // (the z = 1 equation and the doubled-return balance), and the rounded
  // law misses unit mass by ~1e-17. That defect enters the equations
  // directly and the near-parallel root rows amplify it six orders of
  // magnitude by ell = 5, so the law is renormalized on the wide type.
  wide mass = 0;
  for (const wide v : probs) mass += v;
  for (wide& v : probs) v /= mass;
  const wide p = params.p;
  const wide q = params.q;
  const wide r = (p * p) / (q * q);
  std::vector<wide> rpow(static_cast<size_t>(ell) + 1);
  rpow[0] = 1;
  for (int k = 1; k <= ell; ++k) rpow[k] = rpow[k - 1] * r;

  const DenominatorPoly dpoly = build_denominator(params);
  const RootClassification cls = classify_roots(dpoly, params);
  // Rebuilt from the step law rather than copied from dpoly: the roots must
  // satisfy the same rendition of the model the numerator rows encode, and
  // the double-rounded coeffs[ell] of dpoly is 1e-17 away from probs[ell]-1,
  // which the clustered inside roots magnify.
  std::vector<wide> dfull(probs.begin(), probs.end());
  dfull[ell] = probs[ell] - 1;
  std::vector<wide> dprime(dfull.size() - 1);
  for (size_t d = 1; d < dfull.size(); ++d) {
    dprime[d - 1] = static_cast<wide>(d) * dfull[d];
  }

  // Numerator of the hitting generating function, with positive-side
  // unknowns nu_k eliminated: nu_k = r^k nu_{-k} for k < ell, and the single
  // q^(2 ell) nu_ell occurrence (power z^ell) rewritten through the
  // doubled-return identity so that nu_0 enters the system.
  const int cidx = ell + 1;
  std::vector<Affine> nraw(2 * ell + 1, Affine(ell + 2, 0));
  for (int e = 1; e <= ell; ++e) {
    for (int k = 1; k <= e; ++k) {
      const int pw = ell - e + k;
      if (k < ell) {
        nraw[pw][k] += probs[ell - e] * rpow[k];
      } else {
        nraw[pw][0] += 1;
        nraw[pw][cidx] -= probs[ell];
        for (int d = 1; d <= ell - 1; ++d) {
          nraw[pw][d] -= 2 * probs[ell + d];
        }
        nraw[pw][ell] -= probs[2 * ell];
      }
    }
  }
  for (int d = 1; d <= ell; ++d) {
    nraw[ell + d][cidx] -= probs[ell + d];
    for (int i = 1; i <= d - 1; ++i) {
      nraw[ell + d - i][i] -= probs[ell + d];
    }
  }

  // The function converges past |z| = 1, so the numerator must vanish at
  // the inside roots and at z = 1; the doubled-return balance closes the
  // system.
  const int dim = ell + 1;
  std::vector<wide> mat(static_cast<size_t>(dim) * dim, 0);
  std::vector<wide> rhs(dim, 0);
  int row = 0;
  auto add_eval_rows = [&](CWide z, bool complex_pair) {
    // Horner over the power index, one pass for all slots.
    std::vector<CWide> acc(ell + 2, CWide{0, 0});
    for (size_t pw = nraw.size(); pw-- > 0;) {
      for (int u = 0; u <= ell + 1; ++u) {
        acc[u] = cmul(acc[u], z);
        acc[u].re += nraw[pw][u];
      }
    }
    for (int u = 0; u < dim; ++u) mat[row * dim + u] = acc[u].re;
    rhs[row++] = -acc[cidx].re;
    if (complex_pair) {
      for (int u = 0; u < dim; ++u) mat[row * dim + u] = acc[u].im;
      rhs[row++] = -acc[cidx].im;
    }
  };
  for (const std::complex<double>& zi : cls.inside) {
    if (zi.imag() < 0.0) continue;
    add_eval_rows(polish_root_wide(dfull, dprime, CWide{zi.real(), zi.imag()}),
                  zi.imag() > 0.0);
  }
  add_eval_rows(CWide{1, 0}, false);

  mat[row * dim + 0] = 1;
  for (int d = 1; d <= ell; ++d) mat[row * dim + d] = -2 * probs[ell + d];
  rhs[row++] = probs[ell];
  if (row != dim) {
    throw StructuralError("hitting system assembled the wrong row count");
  }

  for (int rr = 0; rr < dim; ++rr) {
    wide big = 0;
    for (int u = 0; u < dim; ++u) {
      big = std::max(big, wabs(mat[rr * dim + u]));
    }
    if (big <= 0) {
      throw StructuralError("hitting system produced an empty equation");
    }
    for (int u = 0; u < dim; ++u) mat[rr * dim + u] /= big;
    rhs[rr] /= big;
  }
  const std::vector<wide> x = solve_full_pivot(mat, rhs, dim);

  HitProbabilities hit;
  hit.ell = ell;
  hit.nu0 = static_cast<double>(x[0]);
  if (!(hit.nu0 > 0.0 && hit.nu0 < 1.0)) {
    throw StructuralError("return probability nu0 left (0, 1)");
  }
  hit.nu_neg.resize(ell);
  hit.nu_pos.resize(ell);
  for (int k = 1; k <= ell; ++k) {
    hit.nu_neg[k - 1] = clip_unit(static_cast<double>(x[k]), "nu_neg");
    hit.nu_pos[k - 1] =
        clip_unit(static_cast<double>(x[k] * rpow[k]), "nu_pos");
  }
  return hit;
}

HitProbabilities hit_probs_oracle(const ModelParams& params, int radius) {
  const int ell = params.ell;
  if (radius < 10 * ell || radius < 50) {
    throw std::invalid_argument("oracle window too small");
  }
  const StepLaw law = step_law(params);
  const int n = 2 * radius;
  const auto idx = [radius](int x) {
    return x < 0 ? x + radius : radius - 1 + x;
  };

  std::vector<long double> mat(static_cast<size_t>(n) * n, 0.0L);
  std::vector<long double> rhs(n, 0.0L);
  for (int x = -radius; x <= radius; ++x) {
    if (x == 0) continue;
    const int row = idx(x);
    mat[static_cast<size_t>(row) * n + row] += 1.0L;
    for (int inc = -ell; inc <= ell; ++inc) {
      const long double w = law.at(inc);
      const int next = x + inc;
      if (next == 0) {
        rhs[row] += w;
      } else if (next >= -radius && next <= radius) {
        mat[static_cast<size_t>(row) * n + idx(next)] -= w;
      }
    }
  }
  const std::vector<long double> h = solve_linear(mat, rhs);

  HitProbabilities out;
  out.ell = ell;
  long double nu0 = law.at(0);
  for (int inc = -ell; inc <= ell; ++inc) {
    if (inc != 0) nu0 += static_cast<long double>(law.at(inc)) * h[idx(inc)];
  }
  out.nu0 = static_cast<double>(nu0);
  out.nu_neg.resize(ell);
  out.nu_pos.resize(ell);
  for (int k = 1; k <= ell; ++k) {
    // nu_{-k} starts k ABOVE the target (position +k, drifting toward it);
    // nu_{k} starts k below and must climb against the drift.
    out.nu_neg[k - 1] = static_cast<double>(h[idx(k)]);
    out.nu_pos[k - 1] = static_cast<double>(h[idx(-k)]);
  }
  return out;
}

SojournEstimate sojourn_oracle(const ModelParams& params, int j_index,
                               long long trials, long long horizon,
                               std::uint64_t seed) {
  if (trials < 100000) {
    throw std::invalid_argument("sojourn oracle needs at least 1e5 trials");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  const int ell = params.ell;
  const double p = params.p;
  const double q = params.q;

  long long hits = 0;
  for (long long t = 0; t < trials; ++t) {
    CounterRng rng(seed, static_cast<std::uint64_t>(t));
    long long pos = -j_index;
    for (long long cyc = 0; cyc < horizon; ++cyc) {
      int delta = 0;
      for (int i = 0; i < ell; ++i) delta += rng.bernoulli(p) ? 1 : 0;
      for (int i = 0; i < ell; ++i) delta -= rng.bernoulli(q) ? 1 : 0;
      pos += delta;
      if (pos == 0) {
        ++hits;
        break;
      }
      if (pos < kAbandonDepth) break;
    }
  }

  SojournEstimate est;
  est.trials = trials;
  est.value = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error =
      std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(trials));
  return est;
}

ClumpSolution solve_clump_system(const ModelParams& params,
                                 const HitProbabilities& hit,
                                 double tail_amplitude) {
  if (hit.ell != params.ell) {
    throw std::invalid_argument("hit probabilities belong to a different ell");
  }
  const int ell = params.ell;
  const long double p = params.p;
  const long double q = params.q;
  const long double r = (p * p) / (q * q);

  // Visits to the absorbing set {0, -1, ..., -(ell-1)} (relative to the
  // reference level): lambda_i counts clumps entered at level -i, weighted
  // by the chance no deeper member is hit first. Everything is in units of
  // pi_j, which cancels from the rhs.
  std::vector<long double> mat(static_cast<size_t>(ell) * ell, 0.0L);
  std::vector<long double> rhs(ell, 0.0L);
  for (int i = 0; i < ell; ++i) {
    for (int k = 0; k < ell; ++k) {
      mat[i * ell + k] = (i == k) ? 1.0L : static_cast<long double>(hit.at(i - k));
    }
    rhs[i] = (1.0L - static_cast<long double>(hit.nu0)) *
             std::pow(r, static_cast<long double>(i));
  }
  const std::vector<long double> lam = solve_linear(mat, rhs);

  ClumpSolution sol;
  sol.ell = ell;
  sol.extrapolated = ell >= 4;
  sol.lambdas.resize(ell);
  long double total = 0.0L;
  for (int i = 0; i < ell; ++i) {
    if (!(lam[i] > 0.0L)) {
      throw StructuralError("clump intensity came out nonpositive");
    }
    sol.lambdas[i] = static_cast<double>(lam[i]);
    total += lam[i];
  }
  sol.lambda_over_pi = static_cast<double>(total);
  sol.expected_sojourn = static_cast<double>(1.0L / (1.0L - hit.nu0));
  sol.epsilon = static_cast<double>(
      1.0L / (2.0L * ell) * r * std::pow(q / p, static_cast<long double>(ell)) *
      total * static_cast<long double>(tail_amplitude));
  return sol;
}

ConjectureCheck conjecture_ratio(const ModelParams& params) {
  if (params.ell < 2) {
    throw std::invalid_argument("the ratio identity starts at ell = 2");
  }
  const DenominatorPoly dpoly = build_denominator(params);
  const RootClassification cls = classify_roots(dpoly, params);
  const StationarySolution sol =
      solve_boundary(params, CycleOrder::RedFirst, cls);
  const HitProbabilities hit = solve_hit_probs(params);
  const ClumpSolution clump = solve_clump_system(params, hit, sol.tail_amplitude);

  ConjectureCheck check;
  check.lhs = clump.lambda_over_pi;
  check.rhs = params.ell * params.q * params.q * sol.tail_amplitude;
  check.rel_gap = std::fabs(check.lhs - check.rhs) / std::fabs(check.rhs);
  check.extrapolated = params.ell >= 4;
  return check;
}

MaxPrediction predict_max_cdf(const ModelParams& params, long long n, int m_lo,
                              int m_hi) {
  if (n < 1) throw std::invalid_argument("horizon n must be positive");
  MaxPrediction pred;
  pred.n = n;
  pred.decay = (params.p / params.q) * (params.p / params.q);
  if (params.ell == 1) {
    pred.epsilon = epsilon1_closed(params);
  } else {
    const DenominatorPoly dpoly = build_denominator(params);
    const RootClassification cls = classify_roots(dpoly, params);
    const StationarySolution sol =
        solve_boundary(params, CycleOrder::RedFirst, cls);
    const HitProbabilities hit = solve_hit_probs(params);
    const ClumpSolution clump =
        solve_clump_system(params, hit, sol.tail_amplitude);
    pred.epsilon = clump.epsilon;
    pred.extrapolated = clump.extrapolated;
  }

  const auto cdf_at = [&](int m) {
    return std::exp(-pred.epsilon * static_cast<double>(n) *
                    std::pow(pred.decay, static_cast<double>(m)));
  };

  if (m_lo < 0 || m_hi < m_lo) {
    int m = 0;
    while (cdf_at(m) < 0.001 && m < 4000) ++m;
    pred.m_lo = m;
    while (cdf_at(m) < 0.999 && m < 4000) ++m;
    pred.m_hi = m;
  } else {
    pred.m_lo = m_lo;
    pred.m_hi = m_hi;
  }

  pred.cdf.reserve(pred.m_hi - pred.m_lo + 1);
  pred.mode_lo = pred.m_hi + 1;
  pred.mode_hi = pred.m_lo - 1;
  for (int m = pred.m_lo; m <= pred.m_hi; ++m) {
    const double c = cdf_at(m);
    pred.cdf.push_back(c);
    if (c >= 0.01 && m < pred.mode_lo) pred.mode_lo = m;
    if (c <= 0.99 && m > pred.mode_hi) pred.mode_hi = m;
  }
  return pred;
}

EpsilonPair epsilon_pair(const ModelParams& params) {
  if (params.ell > 3) {
    throw std::invalid_argument("epsilon pair is validated for ell <= 3");
  }
  const int ell = params.ell;
  const long double p = params.p;
  const long double q = params.q;
  const long double r = (p * p) / (q * q);

  const DenominatorPoly dpoly = build_denominator(params);
  const RootClassification cls = classify_roots(dpoly, params);
  const double a_red =
      solve_boundary(params, CycleOrder::RedFirst, cls).tail_amplitude;
  const double a_green =
      solve_boundary(params, CycleOrder::GreenFirst, cls).tail_amplitude;
  const HitProbabilities hit = solve_hit_probs(params);
  const long double lam =
      solve_clump_system(params, hit, a_red).lambda_over_pi;

  EpsilonPair pair;
  const long double scale = r / (2.0L * ell) * lam;
  pair.eps0 = static_cast<double>(scale * a_red);
  pair.eps1 = static_cast<double>(scale * a_green);

  const long double want = std::pow(p / q, static_cast<long double>(ell));
  const long double got = static_cast<long double>(pair.eps0) / pair.eps1;
  if (std::fabs(got - want) > 1e-9L * want) {
    throw StructuralError("epsilon_0/epsilon_1 drifted from (p/q)^ell");
  }
  return pair;
}

}  // namespace clumpq
