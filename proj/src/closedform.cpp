#include "clumpq/closedform.hpp"

#include <quadmath.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "clumpq/errors.hpp"

namespace clumpq {

namespace {

// Radicands are exact-nonnegative expressions; anything more negative than
// rounding noise means a transcription slipped, so fail loudly instead of
// returning NaN.
long double checked_sqrt(long double radicand) {
  if (radicand < -1e-12L) {
    throw StructuralError("negative radicand in a closed-form evaluation");
  }
  return std::sqrt(std::max(radicand, 0.0L));
}

// Ascending-coefficient polynomial in p; keeps the long transcriptions in
// the same shape as the published displays.
long double poly_in(long double x, std::initializer_list<long double> asc) {
  long double acc = 0.0L;
  const long double* base = asc.begin();
  for (size_t i = asc.size(); i-- > 0;) acc = acc * x + base[i];
  return acc;
}

// The hitting-probability closed forms divide a three-way radical
// cancellation by p^6 (ell = 3) or p^5 (ell = 2); near p = 0.05 that wipes
// out ten digits, so this one family is evaluated in quad precision and
// rounded once on return.
using wide = __float128;

wide wide_poly(wide x, std::initializer_list<double> asc) {
  wide acc = 0;
  const double* base = asc.begin();
  for (size_t i = asc.size(); i-- > 0;) acc = acc * x + base[i];
  return acc;
}

wide wide_sqrt(wide radicand) {
  if (radicand < wide(-1e-12)) {
    throw StructuralError("negative radicand in a closed-form evaluation");
  }
  return sqrtq(radicand < 0 ? wide(0) : radicand);
}

long double theta_l2(long double p, long double q) {
  return std::sqrt(1.0L + 4.0L * p * q);
}

long double theta_l3(long double p, long double q) {
  return std::sqrt(1.0L + 4.0L * p * q + 16.0L * p * p * q * q);
}

long double chi2_value(long double p, long double q) {
  const long double th = theta_l2(p, q);
  const long double even = poly_in(p, {1.0L, 0.0L, -8.0L, 16.0L, -8.0L});
  return (q - p) * (q - p) / (4.0L * std::pow(q, 6.0L)) *
         (even + (q - p) * th);
}

long double u_l3(long double p) {
  return poly_in(p, {1.0L, -2.0L, 6.0L, -8.0L, 4.0L});
}

long double v_l3(long double p) {
  return poly_in(p, {1.0L, 0.0L, 6.0L, -28.0L, 54.0L, -48.0L, 16.0L});
}

long double alpha_l3(long double p) {
  return poly_in(p, {1.0L, -4.0L, 10.0L, -52.0L, 226.0L, -520.0L, 640.0L,
                     -400.0L, 100.0L});
}

long double gamma_l3(long double p) {
  return poly_in(p, {1.0L, -4.0L, 16.0L, -104.0L, 506.0L, -1808.0L, 5604.0L,
                     -15576.0L, 35574.0L, -61160.0L, 75152.0L, -63440.0L,
                     34840.0L, -11200.0L, 1600.0L});
}

long double chi3_value(long double p, long double q) {
  const long double th = theta_l3(p, q);
  const long double a = alpha_l3(p);
  const long double b = u_l3(p);
  const long double g = gamma_l3(p);
  const long double d = q - p;
  return d * d / (12.0L * p * std::pow(q, 9.0L)) *
         (a + d * d * b * th + d * std::sqrt(2.0L) * checked_sqrt(g + a * b * th));
}

// Shared numerator of A(p) and lambda/pi at ell = 3.
long double amp_core_l3(long double p, long double q) {
  const long double th = theta_l3(p, q);
  const long double d = q - p;
  return d * u_l3(p) + d * d * d * th +
         std::sqrt(2.0L) * d * d * checked_sqrt(v_l3(p) + u_l3(p) * th);
}

long double pow_ratio(long double num, long double den, int k) {
  return std::pow(num / den, static_cast<long double>(k));
}

[[noreturn]] void unsupported(const std::string& what) {
  throw std::invalid_argument("no published closed form for " + what);
}

}  // namespace

ThetaFamily theta_family(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  ThetaFamily t;
  t.theta1 = static_cast<double>(theta_l2(p, q));
  t.theta2 = static_cast<double>(theta_l3(p, q));
  return t;
}

ChiCoefficients chi_coefficients(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  ChiCoefficients c;
  c.u = static_cast<double>(u_l3(p));
  c.v = static_cast<double>(v_l3(p));
  c.alpha = static_cast<double>(alpha_l3(p));
  c.beta = c.u;
  c.gamma = static_cast<double>(gamma_l3(p));
  c.chi2 = static_cast<double>(chi2_value(p, q));
  c.chi3 = static_cast<double>(chi3_value(p, q));
  return c;
}

double pi_closed(const ModelParams& params, CycleOrder order, int j) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  const long double d = q - p;
  if (j < 0) unsupported("negative pi index");

  if (params.ell == 1) {
    const long double ratio = pow_ratio(p * p, q * q, j);
    if (order == CycleOrder::RedFirst) {
      return static_cast<double>(d / (q * q) * ratio);
    }
    if (j == 0) return static_cast<double>(d / q);
    return static_cast<double>(d / (p * q) * ratio);
  }
  if (order != CycleOrder::RedFirst) {
    unsupported("green-first boundaries above ell = 1");
  }

  if (params.ell == 2) {
    const long double th = theta_l2(p, q);
    switch (j) {
      case 0:
        return static_cast<double>(d * (3.0L - 2.0L * p - th) /
                                   (2.0L * std::pow(q, 4.0L)));
      case 1:
        return static_cast<double>(
            d * (-1.0L - p - 2.0L * p * q + (1.0L + p) * th) /
            std::pow(q, 5.0L));
      default:
        unsupported("pi index at ell = 2");
    }
  }

  if (params.ell == 3) {
    const long double th = theta_l3(p, q);
    switch (j) {
      case 0: {
        const long double rad =
            poly_in(p, {1.0L, 28.0L, -60.0L, 40.0L, -8.0L}) +
            poly_in(p, {7.0L, -10.0L, 4.0L}) * th;
        return static_cast<double>(
            d * (7.0L - 10.0L * p + 4.0L * p * p + th -
                 std::sqrt(2.0L) * checked_sqrt(rad)) /
            (4.0L * std::pow(q, 6.0L)));
      }
      case 1: {
        const long double rad =
            poly_in(p, {-1.0L, 30.0L, 71.0L, -84.0L, -100.0L, 120.0L, -24.0L}) +
            poly_in(p, {7.0L, 16.0L, -5.0L, -18.0L, 12.0L}) * th;
        return static_cast<double>(
            d * (-3.0L * poly_in(p, {1.0L, 7.0L, -10.0L, 4.0L}) -
                 3.0L * (1.0L + p) * th +
                 std::sqrt(6.0L) * checked_sqrt(rad)) /
            (4.0L * std::pow(q, 7.0L)));
      }
      case 2: {
        const long double rad =
            poly_in(p, {-1.0L, -16.0L, 64.0L, 656.0L, 52.0L, -1072.0L, 80.0L,
                        480.0L, -96.0L}) +
            poly_in(p, {1.0L, 14.0L, 120.0L, 80.0L, -92.0L, -24.0L, 48.0L}) * th;
        return static_cast<double>(
            d * (3.0L * poly_in(p, {-1.0L, 6.0L, 14.0L, -20.0L, 8.0L}) +
                 3.0L * (1.0L + 4.0L * p + 2.0L * p * p) * th -
                 std::sqrt(6.0L) * checked_sqrt(rad)) /
            (4.0L * std::pow(q, 8.0L)));
      }
      default:
        unsupported("pi index at ell = 3");
    }
  }
  unsupported("pi at ell > 3");
}

double nu_closed(const ModelParams& params, int j) {
  const wide p = params.p;
  // q must be the exact complement of p in working precision, not the
  // double-rounded copy: the radical numerators below only cancel down to
  // their p^6-sized values when p + q = 1 holds exactly, and a 1-ulp
  // violation is amplified by the 1/p^6 prefactor into the ninth digit.
  const wide q = 1 - wide(params.p);
  const wide d = q - p;

  if (params.ell == 1) {
    if (j == 0) return 2.0 * params.p;
    if (j == -1) return 1.0;
    unsupported("nu index at ell = 1");
  }

  if (params.ell == 2) {
    const wide th = wide_sqrt(1 + 4 * p * q);
    const wide base = wide_poly(p, {1.0, 0.0, -8.0, 16.0, -8.0}) - d * th;
    switch (j) {
      case 0:
        return static_cast<double>(
            (wide_poly(p, {-1.0, 2.0, 8.0, -8.0}) + d * d * th) /
            (4 * p * q));
      case -1:
        return static_cast<double>(base / (8 * p * p * p * q));
      case 1:
        return static_cast<double>(base / (8 * p * q * q * q));
      case -2:
        return static_cast<double>(
            (wide_poly(p, {-1.0, -2.0, 12.0, 0.0, -24.0, 24.0, -8.0}) +
             d * wide_poly(p, {1.0, 2.0, -4.0}) * th) /
            (8 * p * p * p * p * p * q));
      default:
        unsupported("nu index at ell = 2");
    }
  }

  if (params.ell == 3) {
    const wide th = wide_sqrt(1 + 4 * p * q + 16 * p * p * q * q);
    const wide d6 =
        wide_poly(p, {1.0, 0.0, 0.0, -256.0, 768.0, -768.0, 256.0});
    const wide p2 = p * p;
    switch (j) {
      case 0: {
        const wide rad =
            wide_poly(p, {-1.0, -8.0, 8.0}) *
                wide_poly(p, {-1.0, -2.0, -46.0, -32.0, 848.0, -2432.0,
                              3200.0, -2048.0, 512.0}) +
            wide_poly(p, {1.0, 8.0, 88.0, -448.0, 1888.0, -4864.0, 6400.0,
                          -4096.0, 1024.0}) *
                th;
        return static_cast<double>(
            (-2 * p *
                 wide_poly(p, {-3.0, -18.0, 92.0, -120.0, 816.0, -2816.0,
                               3840.0, -2304.0, 512.0}) +
             2 * d * d * d * wide_poly(p, {1.0, 4.0, 12.0, -32.0, 16.0}) * th -
             d * d * th * wide_sqrt(2) * wide_sqrt(rad)) /
            d6);
      }
      case -1: {
        const wide rad =
            d * d * wide_poly(p, {-1.0, -8.0, 8.0}) *
                wide_poly(p, {1.0, -8.0, -56.0, -128.0, 704.0, -768.0,
                              256.0}) +
            2 *
                wide_poly(p, {1.0, 0.0, -32.0, 64.0, 992.0, -4096.0, 6144.0,
                              -4096.0, 1024.0}) *
                th;
        return static_cast<double>(
            (-6 * p * q -
             d * d * wide_poly(p, {1.0, 0.0, 32.0, -64.0, 32.0}) * th +
             d * th * wide_sqrt(rad)) /
            (2 * p2 * d6));
      }
      case -2: {
        const wide rad =
            wide_poly(p, {-1.0, 8.0, 8.0, 288.0, -944.0, -3136.0, 3776.0,
                          -73728.0, 712704.0, -2445312.0, 4345856.0,
                          -4489216.0, 2736128.0, -917504.0, 131072.0}) +
            2 * wide_poly(p, {1.0, 4.0, 12.0, -32.0, 16.0}) *
                wide_poly(p, {1.0, -8.0, 40.0, -320.0, 1824.0, -4864.0,
                              6400.0, -4096.0, 1024.0}) *
                th;
        return static_cast<double>(
            (-6 * p2 * q * q *
                 wide_poly(p, {5.0, 0.0, 0.0, -256.0, 768.0, -768.0, 256.0}) -
             d * d * d * d * wide_poly(p, {1.0, 8.0, 24.0, -64.0, 32.0}) * th +
             d * th * wide_sqrt(rad)) /
            (2 * p2 * p2 * d6));
      }
      case -3: {
        const wide rad =
            wide_poly(p, {2.0, 24.0, 186.0, 272.0, -1239.0, -8796.0, 43998.0,
                          -51924.0, -581577.0, 3019604.0, -4358340.0,
                          -6991872.0, 38416256.0, -72366336.0, 79163136.0,
                          -54779904.0, 23804928.0, -5971968.0, 663552.0}) +
            2 *
                wide_poly(p, {1.0, 10.0, 69.0, -18.0, -330.0, -3840.0, 8160.0,
                              62940.0, -250095.0, 56320.0, 1459360.0,
                              -4044096.0, 5577696.0, -4608000.0, 2322432.0,
                              -663552.0, 82944.0}) *
                th;
        return static_cast<double>(
            (-2 * p *
                 wide_poly(p, {-3.0, -18.0, -33.0, 255.0, 441.0, -643.0,
                               -8448.0, 28416.0, -40448.0, 30720.0, -12288.0,
                               2048.0}) -
             d * d *
                 wide_poly(p, {-2.0, -10.0, -41.0, 190.0, 89.0, -1088.0,
                               1728.0, -1152.0, 288.0}) *
                 th -
             d * th * wide_sqrt(rad)) /
            (2 * p2 * p2 * p2 * d6));
      }
      case 1:
        return static_cast<double>(wide(nu_closed(params, -1)) * p2 /
                                   (q * q));
      case 2:
        return static_cast<double>(wide(nu_closed(params, -2)) * p2 * p2 /
                                   (q * q * q * q));
      default:
        unsupported("nu index at ell = 3");
    }
  }
  unsupported("nu at ell > 3");
}

double chi(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  if (params.ell == 2) return static_cast<double>(chi2_value(p, q));
  if (params.ell == 3) return static_cast<double>(chi3_value(p, q));
  unsupported("chi outside ell in {2,3}");
}

double amplitude_closed(const ModelParams& params, CycleOrder order) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  const long double d = q - p;
  if (params.ell == 1) {
    return static_cast<double>(order == CycleOrder::RedFirst ? d / (q * q)
                                                             : d / (p * q));
  }
  if (order != CycleOrder::RedFirst) {
    unsupported("green-first amplitude above ell = 1");
  }
  if (params.ell == 2) {
    const long double th = theta_l2(p, q);
    return static_cast<double>(d * (1.0L + d * th) / (4.0L * std::pow(q, 4.0L)));
  }
  if (params.ell == 3) {
    return static_cast<double>(amp_core_l3(p, q) / (12.0L * std::pow(q, 6.0L)));
  }
  unsupported("amplitude at ell > 3");
}

double lambda_closed(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  const long double d = q - p;
  if (params.ell == 1) return static_cast<double>(d);
  if (params.ell == 2) {
    const long double th = theta_l2(p, q);
    return static_cast<double>(d * (1.0L + d * th) / (2.0L * q * q));
  }
  if (params.ell == 3) {
    return static_cast<double>(amp_core_l3(p, q) / (4.0L * std::pow(q, 4.0L)));
  }
  unsupported("lambda/pi at ell > 3");
}

double epsilon1_closed(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  if (params.ell == 1) {
    return static_cast<double>(p * (q - p) * (q - p) / (2.0L * q * q * q));
  }
  if (params.ell == 2) return static_cast<double>(chi2_value(p, q) / 4.0L);
  if (params.ell == 3) return static_cast<double>(chi3_value(p, q) / 6.0L);
  unsupported("epsilon1 at ell > 3");
}

double slot_walk_pi(const ModelParams& params, int j) {
  if (j < 0) throw std::invalid_argument("slot-walk pi index must be >= 0");
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  return static_cast<double>((q - p) / q * pow_ratio(p, q, j));
}

double slot_walk_epsilon(const ModelParams& params) {
  const long double p = params.p;
  const long double q = 1.0L - static_cast<long double>(params.p);
  return static_cast<double>(p * (q - p) * (q - p) / (q * q));
}

}  // namespace clumpq
