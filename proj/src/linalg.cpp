#include "clumpq/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "clumpq/errors.hpp"

namespace clumpq {

namespace {

__float128 qabs(__float128 v) { return v < 0 ? -v : v; }

struct LuFactors {
  std::vector<long double> lu;  // packed L\U
  std::vector<int> perm;
  int n = 0;
};

LuFactors factor(std::vector<long double> a, int n) {
  LuFactors f;
  f.n = n;
  f.perm.resize(static_cast<size_t>(n));
  long double max_piv = 0.0L, min_piv = 0.0L;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    long double best = fabsl(a[static_cast<size_t>(k) * n + k]);
    for (int i = k + 1; i < n; ++i) {
      const long double cand = fabsl(a[static_cast<size_t>(i) * n + k]);
      if (cand > best) {
        best = cand;
        piv = i;
      }
    }
    if (best == 0.0L) throw StructuralError("singular linear system");
    if (k == 0) {
      max_piv = min_piv = best;
    } else {
      if (best > max_piv) max_piv = best;
      if (best < min_piv) min_piv = best;
    }
    f.perm[static_cast<size_t>(k)] = piv;
    if (piv != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[static_cast<size_t>(k) * n + j],
                  a[static_cast<size_t>(piv) * n + j]);
      }
    }
    const long double d = a[static_cast<size_t>(k) * n + k];
    for (int i = k + 1; i < n; ++i) {
      const long double m = a[static_cast<size_t>(i) * n + k] / d;
      a[static_cast<size_t>(i) * n + k] = m;
      if (m != 0.0L) {
        for (int j = k + 1; j < n; ++j) {
          a[static_cast<size_t>(i) * n + j] -= m * a[static_cast<size_t>(k) * n + j];
        }
      }
    }
  }
  if (min_piv > 0.0L && max_piv / min_piv > 1e12L) {
    throw StructuralError("ill-conditioned linear system (pivot ratio ~" +
                          std::to_string(static_cast<double>(max_piv / min_piv)) +
                          ")");
  }
  f.lu = std::move(a);
  return f;
}

std::vector<long double> lu_solve(const LuFactors& f, std::vector<long double> b) {
  const int n = f.n;
  for (int k = 0; k < n; ++k) {
    std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(f.perm[static_cast<size_t>(k)])]);
    for (int i = k + 1; i < n; ++i) {
      b[static_cast<size_t>(i)] -= f.lu[static_cast<size_t>(i) * n + k] * b[static_cast<size_t>(k)];
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    long double s = b[static_cast<size_t>(k)];
    for (int j = k + 1; j < n; ++j) {
      s -= f.lu[static_cast<size_t>(k) * n + j] * b[static_cast<size_t>(j)];
    }
    b[static_cast<size_t>(k)] = s / f.lu[static_cast<size_t>(k) * n + k];
  }
  return b;
}

}  // namespace

std::vector<long double> solve_linear(const std::vector<long double>& a,
                                      const std::vector<long double>& b) {
  const int n = static_cast<int>(b.size());
  const LuFactors f = factor(a, n);
  std::vector<long double> x = lu_solve(f, b);
  // one refinement pass: cheap and recovers an extra couple of digits when
  // the right-hand side mixes scales
  std::vector<long double> r(b);
  for (int i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (int j = 0; j < n; ++j) acc += a[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
    r[static_cast<size_t>(i)] -= acc;
  }
  const std::vector<long double> dx = lu_solve(f, std::move(r));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] += dx[static_cast<size_t>(i)];
  return x;
}

std::vector<__float128> solve_full_pivot(std::vector<__float128> a,
                                         std::vector<__float128> b, int n) {
  std::vector<int> colperm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) colperm[static_cast<size_t>(i)] = i;
  __float128 first_pivot = 0;
  for (int k = 0; k < n; ++k) {
    int pr = k;
    int pc = k;
    __float128 best = 0;
    for (int r = k; r < n; ++r) {
      for (int c = k; c < n; ++c) {
        const __float128 v = qabs(a[static_cast<size_t>(r) * n + c]);
        if (v > best) {
          best = v;
          pr = r;
          pc = c;
        }
      }
    }
    if (k == 0) first_pivot = best;
    if (best <= first_pivot * 1e-30) {
      throw StructuralError("linear system is numerically singular");
    }
    if (pr != k) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(k) * n + c],
                  a[static_cast<size_t>(pr) * n + c]);
      }
      std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(pr)]);
    }
    if (pc != k) {
      for (int r = 0; r < n; ++r) {
        std::swap(a[static_cast<size_t>(r) * n + k],
                  a[static_cast<size_t>(r) * n + pc]);
      }
      std::swap(colperm[static_cast<size_t>(k)], colperm[static_cast<size_t>(pc)]);
    }
    for (int r = k + 1; r < n; ++r) {
      const __float128 m =
          a[static_cast<size_t>(r) * n + k] / a[static_cast<size_t>(k) * n + k];
      if (m == 0) continue;
      a[static_cast<size_t>(r) * n + k] = 0;
      for (int c = k + 1; c < n; ++c) {
        a[static_cast<size_t>(r) * n + c] -= m * a[static_cast<size_t>(k) * n + c];
      }
      b[static_cast<size_t>(r)] -= m * b[static_cast<size_t>(k)];
    }
  }
  std::vector<__float128> y(static_cast<size_t>(n));
  for (int k = n - 1; k >= 0; --k) {
    __float128 s = b[static_cast<size_t>(k)];
    for (int c = k + 1; c < n; ++c) {
      s -= a[static_cast<size_t>(k) * n + c] * y[static_cast<size_t>(c)];
    }
    y[static_cast<size_t>(k)] = s / a[static_cast<size_t>(k) * n + k];
  }
  std::vector<__float128> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(colperm[static_cast<size_t>(i)])] = y[static_cast<size_t>(i)];
  }
  return x;
}

std::vector<double> gth_stationary(std::vector<double> p, int n) {
  // eliminate states n-1 .. 1; all updates are additive, so no cancellation
  for (int k = n - 1; k >= 1; --k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += p[static_cast<size_t>(k) * n + j];
    if (s <= 0.0) throw StructuralError("reducible chain in stationary solve");
    for (int i = 0; i < k; ++i) p[static_cast<size_t>(i) * n + k] /= s;
    for (int i = 0; i < k; ++i) {
      const double pik = p[static_cast<size_t>(i) * n + k];
      if (pik == 0.0) continue;
      const double* rowk = &p[static_cast<size_t>(k) * n];
      double* rowi = &p[static_cast<size_t>(i) * n];
      for (int j = 0; j < k; ++j) rowi[j] += pik * rowk[j];
    }
  }
  std::vector<double> pi(static_cast<size_t>(n), 0.0);
  pi[0] = 1.0;
  for (int k = 1; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += pi[static_cast<size_t>(i)] * p[static_cast<size_t>(i) * n + k];
    pi[static_cast<size_t>(k)] = s;
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) v /= total;
  return pi;
}

}  // namespace clumpq
