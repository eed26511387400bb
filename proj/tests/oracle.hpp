#pragma once

// Independent reference formulas, written directly in the rearranged forms of
// the stability conditions rather than through the library's helpers.
// Intended for strictly interior parameters (every probability and rate in
// (0, 1)), where none of the divisions can hit zero.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ehcr/model.hpp"

namespace oracle {

struct P {
  double ppd, pss, spd, ssd;  // success probabilities
  double lep, les;
};

inline P from(const ehcr::SystemParams& s) {
  return {s.p_pd_success, s.p_ss_success, s.s_pd_success, s.s_sd_success, s.lambda_ep, s.lambda_es};
}

inline double mu_p(const P& p) { return (p.ppd + (1.0 - p.ppd) * p.pss) * p.lep; }
inline double mu_p_noncoop(const P& p) { return p.ppd * p.lep; }
inline double idle(const P& p, double lp, double mup) { return 1.0 - p.lep * lp / mup; }
inline double es(const P& p, double i) { return std::min(1.0, p.les / i); }

// Dominant system I: PU stability, relay stability solved for lambda_p, SU bound.
inline bool r1(const P& p, double a, double lp, double ls) {
  const double mup = mu_p(p);
  if (!(lp < mup)) return false;
  const double i = idle(p, lp, mup);
  const double e = es(p, i);
  const double relay_coef = (1.0 - p.ppd) * p.pss * p.lep;
  if (!(lp < (1.0 - a) * p.spd / relay_coef * e * i * mup)) return false;
  const double bracket = 1.0 - relay_coef * (lp / mup) / (p.spd * e * i);
  return ls < p.ssd * e * i * bracket;
}

// Dominant system II: PU stability, SU bound, relay stability solved for lambda_p.
inline bool r2(const P& p, double a, double lp, double ls) {
  const double mup = mu_p(p);
  if (!(lp < mup)) return false;
  const double i = idle(p, lp, mup);
  const double e = es(p, i);
  if (!(ls < p.ssd * e * i * a)) return false;
  const double c = p.ssd / p.spd;
  const double relay = (1.0 - p.ppd) * p.pss;
  return lp < (mup / p.lep) / (p.spd * e + relay) * (p.spd * e - ls / c);
}

inline bool noncoop(const P& p, double lp, double ls) {
  const double mup = mu_p_noncoop(p);
  if (!(lp < mup)) return false;
  const double i = idle(p, lp, mup);
  return ls < p.ssd * es(p, i) * i;
}

inline bool union_over(const P& p, const std::vector<double>& a_grid, double lp, double ls) {
  for (double a : a_grid) {
    if (r1(p, a, lp, ls) || r2(p, a, lp, ls)) return true;
  }
  return false;
}

// Plain bisection, 60 halvings: the supremum of stable lambda_s.
inline double sup_ls(const std::function<bool(double)>& inside) {
  if (!inside(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  if (inside(hi)) return 1.0;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return lo;
}

inline double d_const(const P& p) {
  return 1.0 / p.ppd - (1.0 - p.ppd) * p.pss / (p.spd * (p.ppd + (1.0 - p.ppd) * p.pss));
}

// Random parameter sets with every field in [lo, hi].
struct ParamGen {
  std::mt19937_64 rng;
  explicit ParamGen(std::uint64_t seed) : rng(seed) {}
  double u(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  ehcr::SystemParams params(double lo = 0.05, double hi = 0.95) {
    return {u(lo, hi), u(lo, hi), u(lo, hi), u(lo, hi), u(lo, hi), u(lo, hi)};
  }
};

}  // namespace oracle
