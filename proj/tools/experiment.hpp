#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace stablefield::cli {

struct RunOptions {
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

/// Runs one experiment: applies the overrides to the config, dispatches on
/// mode, writes the CSV tables and summary.json into the output directory and
/// returns the summary. Warnings go to `warn`.
Json run_experiment(Json config, const RunOptions& options, std::ostream& warn);

/// OLS slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stablefield::cli
