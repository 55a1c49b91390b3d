#pragma once

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace savvy::meta {

// One AE's log-ratio log(estimator / benchmark) with its bootstrap variance.
struct MetaEntry {
  double theta = 0.0;
  double sigma2 = 0.0;
  std::map<std::string, double> moderators;
  std::string trial_id;
  std::string indication;
  std::string label;  // free-form identification for output tables
};

using MetaInput = std::vector<MetaEntry>;

enum class HeterogeneityMethod { PauleMandel, DerSimonianLaird };

struct MetaResult {
  double theta = 0.0;
  double se_theta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double rho2 = 0.0;
  std::size_t k_used = 0;
  std::string method_tag;
};

// Generalized Q statistic sum w_k (theta_k - theta_w)^2 with w_k = 1/(sigma2_k + rho2).
// Returns +infinity when some total variance is zero and the thetas differ.
double generalized_q(std::span<const MetaEntry> entries, double rho2);

// Between-AE variance solving Q(rho2) = K - 1; 0 when Q(0) <= K - 1.
// Throws std::invalid_argument for K < 2.
double paule_mandel_rho2(std::span<const MetaEntry> entries);

double dersimonian_laird_rho2(std::span<const MetaEntry> entries);

// Inverse-total-variance pooled mean under the marginal normal model. Entries
// with zero total variance act as exact observations and take all the weight.
MetaResult nnhm_pool(std::span<const MetaEntry> entries, double rho2);

// rho2 estimate followed by pooling.
MetaResult random_effects(std::span<const MetaEntry> entries,
                          HeterogeneityMethod method = HeterogeneityMethod::PauleMandel);

struct RegressionResult {
  std::vector<std::string> terms;  // "intercept" then moderators
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  double rho2 = 0.0;
  std::size_t k_used = 0;
  std::string method_tag;
};

// Weighted least squares on [1, moderators] with weights 1/(sigma2 + rho2),
// rho2 from the residual generalized Q = K - p. Throws std::invalid_argument on
// a rank-deficient design, naming the collinear moderators.
RegressionResult meta_regression(std::span<const MetaEntry> entries,
                                 std::span<const std::string> moderators,
                                 HeterogeneityMethod method = HeterogeneityMethod::PauleMandel);

struct BlandAltmanRow {
  double x = 0.0;  // benchmark
  double y = 0.0;  // comparator - benchmark
};

struct BlandAltmanTable {
  std::string measure;
  std::vector<BlandAltmanRow> rows;
  double mean_difference = 0.0;
  double sd_difference = 0.0;
  double lower_limit = 0.0;
  double upper_limit = 0.0;
};

BlandAltmanTable bland_altman_table(std::span<const double> benchmark,
                                    std::span<const double> comparator,
                                    std::string measure = "probability");

enum class FrequencyCategory { VeryRare, Rare, Uncommon, Common, VeryCommon };
inline constexpr std::size_t kCategoryCount = 5;

std::string_view to_string(FrequencyCategory category);
FrequencyCategory frequency_category(double p);

using CategoryShiftTable = std::array<std::array<std::size_t, kCategoryCount>, kCategoryCount>;

// Rows: benchmark category, columns: comparator category.
CategoryShiftTable category_shift_table(std::span<const FrequencyCategory> benchmark,
                                        std::span<const FrequencyCategory> comparator);

struct PrecisionPair {
  double benchmark_se = 0.0;
  double comparator_se = 0.0;
  // Point values used for the per-pair relative bias; NaN disables the filter.
  double benchmark_value = std::numeric_limits<double>::quiet_NaN();
  double comparator_value = std::numeric_limits<double>::quiet_NaN();
};

struct PrecisionRow {
  std::size_t index = 0;
  std::optional<double> ratio;  // nullopt when skipped
  std::string status;           // "ok", "zero_benchmark_se", "bias_above_threshold"
};

struct PrecisionTable {
  double bias_threshold = 0.1;
  std::vector<PrecisionRow> rows;
  std::size_t n_skipped_zero_se = 0;
  std::size_t n_excluded_bias = 0;
};

// Comparator SE / benchmark SE for pairs whose relative bias
// |comparator - benchmark| / benchmark stays below bias_threshold.
PrecisionTable precision_ratio_table(std::span<const PrecisionPair> pairs,
                                     double bias_threshold = 0.1);

// Scatter of a Bland-Altman table as a standalone SVG document.
std::string render_bland_altman_svg(const BlandAltmanTable& table, std::string_view title);

}  // namespace savvy::meta
