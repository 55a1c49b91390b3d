#pragma once

namespace savvy {

// 0.975 quantile of the standard normal distribution.
inline constexpr double kZ975 = 1.959963985;

}  // namespace savvy
