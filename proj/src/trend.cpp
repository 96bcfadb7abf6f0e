#include "ose/trend.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "ose/error.hpp"

namespace ose {

TrendResult trend_test(std::span<const std::pair<double, double>> series) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::InvalidParams, "trend test needs at least 3 points");

  double mx = 0;
  double my = 0;
  for (const auto& [x, y] : series) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0;
  double sxy = 0;
  double syy = 0;
  for (const auto& [x, y] : series) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0) throw Error(ErrorCode::DegenerateSeries, "all x values are equal");

  TrendResult r;
  r.n = n;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  const double ssr = std::max(0.0, syy - r.slope * sxy);
  const double scale = std::max(syy, 1e-300);
  if (ssr <= 1e-12 * scale) {
    r.p_value = std::abs(r.slope) * std::sqrt(sxx) <= 1e-12 * std::max(1.0, std::abs(my)) ? 1.0 : 0.0;
    return r;
  }
  const double df = static_cast<double>(n - 2);
  const double se = std::sqrt(ssr / df / sxx);
  const double t = r.slope / se;
  const boost::math::students_t dist(df);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return r;
}

}  // namespace ose
