#include "savvy/meta.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "savvy/constants.hpp"

namespace savvy::meta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxBisections = 400;

void require_k(std::size_t k, std::size_t minimum) {
  if (k < minimum) throw std::invalid_argument("K < " + std::to_string(minimum));
}

// Bisection for a decreasing function f on [0, inf) with f(0) > target.
double solve_decreasing(const auto& f, double target) {
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("heterogeneity root not bracketed");
  }
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Pick the endpoint closer to the target.
  return std::abs(f(lo) - target) <= std::abs(f(hi) - target) ? lo : hi;
}

}  // namespace

double generalized_q(std::span<const MetaEntry> entries, double rho2) {
  // Zero total variances behave as infinitely precise observations.
  std::vector<double> exact;
  for (const auto& e : entries) {
    if (e.sigma2 + rho2 == 0.0) exact.push_back(e.theta);
  }
  if (!exact.empty()) {
    const double first = exact.front();
    if (std::any_of(exact.begin(), exact.end(), [&](double t) { return t != first; })) return kInf;
    double q = 0.0;
    for (const auto& e : entries) {
      const double v = e.sigma2 + rho2;
      if (v > 0.0) q += (e.theta - first) * (e.theta - first) / v;
    }
    return q;
  }
  double sw = 0.0, swt = 0.0;
  for (const auto& e : entries) {
    const double w = 1.0 / (e.sigma2 + rho2);
    sw += w;
    swt += w * e.theta;
  }
  const double mean = swt / sw;
  double q = 0.0;
  for (const auto& e : entries) q += (e.theta - mean) * (e.theta - mean) / (e.sigma2 + rho2);
  return q;
}

double paule_mandel_rho2(std::span<const MetaEntry> entries) {
  require_k(entries.size(), 2);
  const double target = static_cast<double>(entries.size() - 1);
  if (generalized_q(entries, 0.0) <= target) return 0.0;
  return solve_decreasing([&](double r) { return generalized_q(entries, r); }, target);
}

double dersimonian_laird_rho2(std::span<const MetaEntry> entries) {
  require_k(entries.size(), 2);
  double sw = 0.0, sw2 = 0.0;
  for (const auto& e : entries) {
    if (!(e.sigma2 > 0.0)) throw std::invalid_argument("DerSimonian-Laird needs positive variances");
    const double w = 1.0 / e.sigma2;
    sw += w;
    sw2 += w * w;
  }
  const double q = generalized_q(entries, 0.0);
  const double k = static_cast<double>(entries.size());
  return std::max(0.0, (q - (k - 1.0)) / (sw - sw2 / sw));
}

MetaResult nnhm_pool(std::span<const MetaEntry> entries, double rho2) {
  require_k(entries.size(), 2);
  if (rho2 < 0.0) throw std::invalid_argument("negative heterogeneity");
  MetaResult r;
  r.rho2 = rho2;
  r.k_used = entries.size();
  std::vector<double> exact;
  for (const auto& e : entries) {
    if (e.sigma2 + rho2 == 0.0) exact.push_back(e.theta);
  }
  if (!exact.empty()) {
    r.theta = std::accumulate(exact.begin(), exact.end(), 0.0) / static_cast<double>(exact.size());
    r.se_theta = 0.0;
  } else {
    double sw = 0.0, swt = 0.0;
    for (const auto& e : entries) {
      const double w = 1.0 / (e.sigma2 + rho2);
      sw += w;
      swt += w * e.theta;
    }
    r.theta = swt / sw;
    r.se_theta = 1.0 / std::sqrt(sw);
  }
  r.ci_low = r.theta - kZ975 * r.se_theta;
  r.ci_high = r.theta + kZ975 * r.se_theta;
  return r;
}

MetaResult random_effects(std::span<const MetaEntry> entries, HeterogeneityMethod method) {
  const double rho2 = method == HeterogeneityMethod::PauleMandel ? paule_mandel_rho2(entries)
                                                                 : dersimonian_laird_rho2(entries);
  auto r = nnhm_pool(entries, rho2);
  r.method_tag = method == HeterogeneityMethod::PauleMandel ? "NNHM/Paule-Mandel"
                                                            : "NNHM/DerSimonian-Laird";
  return r;
}

namespace {

struct WlsFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  double q = 0.0;
};

WlsFit weighted_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& v) {
  const Eigen::VectorXd w = v.cwiseInverse();
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  const Eigen::MatrixXd info = xtw * x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  WlsFit fit;
  fit.beta = ldlt.solve(xtw * y);
  fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(x.cols(), x.cols()));
  const Eigen::VectorXd resid = y - x * fit.beta;
  fit.q = resid.cwiseProduct(resid).cwiseProduct(w).sum();
  return fit;
}

}  // namespace

RegressionResult meta_regression(std::span<const MetaEntry> entries,
                                 std::span<const std::string> moderators,
                                 HeterogeneityMethod method) {
  const auto k = static_cast<Eigen::Index>(entries.size());
  const auto p = static_cast<Eigen::Index>(moderators.size() + 1);
  if (k <= p) {
    throw std::invalid_argument("meta-regression needs more AEs than coefficients (K=" +
                                std::to_string(k) + ", p=" + std::to_string(p) + ")");
  }
  Eigen::MatrixXd x(k, p);
  Eigen::VectorXd y(k), s2(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& e = entries[static_cast<std::size_t>(i)];
    if (!(e.sigma2 > 0.0)) throw std::invalid_argument("meta-regression needs positive variances");
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      const auto& name = moderators[static_cast<std::size_t>(j - 1)];
      const auto it = e.moderators.find(name);
      if (it == e.moderators.end() || !std::isfinite(it->second)) {
        throw std::invalid_argument("moderator '" + name + "' missing for an entry");
      }
      x(i, j) = it->second;
    }
    y(i) = e.theta;
    s2(i) = e.sigma2;
  }

  // A column that does not raise the rank is collinear with the ones before it.
  std::vector<std::string> collinear;
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.leftCols(j + 1));
    qr.setThreshold(1e-10);
    const auto r = qr.rank();
    if (r == rank) {
      collinear.push_back(j == 0 ? "intercept" : moderators[static_cast<std::size_t>(j - 1)]);
    }
    rank = r;
  }
  if (!collinear.empty()) {
    std::string names;
    for (const auto& c : collinear) names += (names.empty() ? "" : ", ") + c;
    throw std::invalid_argument("rank-deficient design; collinear moderators: " + names);
  }

  auto residual_q = [&](double rho2) {
    return weighted_fit(x, y, (s2.array() + rho2).matrix()).q;
  };
  const double target = static_cast<double>(k - p);
  double rho2 = 0.0;
  if (method == HeterogeneityMethod::PauleMandel) {
    if (residual_q(0.0) > target) rho2 = solve_decreasing(residual_q, target);
  } else {
    const Eigen::VectorXd w = s2.cwiseInverse();
    const auto fit0 = weighted_fit(x, y, s2);
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    const Eigen::MatrixXd info = xtw * x;
    const Eigen::MatrixXd xtw2x = x.transpose() * w.cwiseProduct(w).asDiagonal() * x;
    const double trace = w.sum() - info.ldlt().solve(xtw2x).trace();
    rho2 = std::max(0.0, (fit0.q - target) / trace);
  }

  const auto fit = weighted_fit(x, y, (s2.array() + rho2).matrix());
  RegressionResult r;
  r.terms.push_back("intercept");
  for (const auto& m : moderators) r.terms.push_back(m);
  for (Eigen::Index j = 0; j < p; ++j) {
    r.coefficients.push_back(fit.beta(j));
    r.standard_errors.push_back(std::sqrt(fit.covariance(j, j)));
  }
  r.rho2 = rho2;
  r.k_used = entries.size();
  r.method_tag = method == HeterogeneityMethod::PauleMandel ? "WLS/Paule-Mandel"
                                                            : "WLS/DerSimonian-Laird";
  return r;
}

BlandAltmanTable bland_altman_table(std::span<const double> benchmark,
                                    std::span<const double> comparator, std::string measure) {
  if (benchmark.size() != comparator.size()) {
    throw std::invalid_argument("Bland-Altman inputs differ in length");
  }
  BlandAltmanTable t;
  t.measure = std::move(measure);
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    t.rows.push_back({benchmark[i], comparator[i] - benchmark[i]});
  }
  if (t.rows.empty()) return t;
  double sum = 0.0;
  for (const auto& r : t.rows) sum += r.y;
  t.mean_difference = sum / static_cast<double>(t.rows.size());
  if (t.rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : t.rows) ss += (r.y - t.mean_difference) * (r.y - t.mean_difference);
    t.sd_difference = std::sqrt(ss / static_cast<double>(t.rows.size() - 1));
  }
  t.lower_limit = t.mean_difference - 1.96 * t.sd_difference;
  t.upper_limit = t.mean_difference + 1.96 * t.sd_difference;
  return t;
}

std::string_view to_string(FrequencyCategory category) {
  switch (category) {
    case FrequencyCategory::VeryRare:
      return "very rare";
    case FrequencyCategory::Rare:
      return "rare";
    case FrequencyCategory::Uncommon:
      return "uncommon";
    case FrequencyCategory::Common:
      return "common";
    case FrequencyCategory::VeryCommon:
      return "very common";
  }
  return "?";
}

FrequencyCategory frequency_category(double p) {
  if (p < 0.0001) return FrequencyCategory::VeryRare;
  if (p < 0.001) return FrequencyCategory::Rare;
  if (p < 0.01) return FrequencyCategory::Uncommon;
  if (p < 0.1) return FrequencyCategory::Common;
  return FrequencyCategory::VeryCommon;
}

CategoryShiftTable category_shift_table(std::span<const FrequencyCategory> benchmark,
                                        std::span<const FrequencyCategory> comparator) {
  if (benchmark.size() != comparator.size()) {
    throw std::invalid_argument("category inputs differ in length");
  }
  CategoryShiftTable table{};
  for (std::size_t i = 0; i < benchmark.size(); ++i) {
    ++table[static_cast<std::size_t>(benchmark[i])][static_cast<std::size_t>(comparator[i])];
  }
  return table;
}

PrecisionTable precision_ratio_table(std::span<const PrecisionPair> pairs, double bias_threshold) {
  PrecisionTable t;
  t.bias_threshold = bias_threshold;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    PrecisionRow row;
    row.index = i;
    if (!(p.benchmark_se > 0.0)) {
      row.status = "zero_benchmark_se";
      ++t.n_skipped_zero_se;
    } else if (std::isfinite(p.benchmark_value) && std::isfinite(p.comparator_value) &&
               p.benchmark_value != 0.0 &&
               std::abs(p.comparator_value - p.benchmark_value) / std::abs(p.benchmark_value) >=
                   bias_threshold) {
      row.status = "bias_above_threshold";
      ++t.n_excluded_bias;
    } else {
      row.status = "ok";
      row.ratio = p.comparator_se / p.benchmark_se;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_bland_altman_svg(const BlandAltmanTable& table, std::string_view title) {
  constexpr double width = 480, height = 360, margin = 50;
  double xmin = 0, xmax = 1, ymin = table.lower_limit, ymax = table.upper_limit;
  if (!table.rows.empty()) {
    xmin = xmax = table.rows.front().x;
    for (const auto& r : table.rows) {
      xmin = std::min(xmin, r.x);
      xmax = std::max(xmax, r.x);
      ymin = std::min(ymin, r.y);
      ymax = std::max(ymax, r.y);
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto sy = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<text x=\"" << margin << "\" y=\"24\" font-size=\"14\">" << title << "</text>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  for (double level : {table.mean_difference, table.lower_limit, table.upper_limit}) {
    svg << "<line x1=\"" << margin << "\" y1=\"" << sy(level) << "\" x2=\"" << width - margin
        << "\" y2=\"" << sy(level) << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
  }
  for (const auto& r : table.rows) {
    svg << "<circle cx=\"" << sx(r.x) << "\" cy=\"" << sy(r.y) << "\" r=\"3\"/>\n";
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"12\">benchmark</text>\n";
  svg << "<text x=\"8\" y=\"" << margin - 8 << "\" font-size=\"12\">comparator - benchmark</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace savvy::meta
