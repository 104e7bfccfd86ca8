#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "smoothnorm/anova_models.hpp"

namespace smoothnorm {

/// A Dataset together with the group labels, in first-appearance order.
struct LabeledDataset {
    Dataset data;
    std::vector<std::string> labels;
};

/**
 * @brief Read grouped observations from a `group,value` CSV stream.
 *
 * The header row must be exactly `group,value` (surrounding whitespace is
 * tolerated). Groups are ordered by first appearance; labels are arbitrary
 * strings without commas. Parse errors report the 1-based line number.
 *
 * @throws std::invalid_argument on malformed input (missing header, bad
 * value, empty file, or fewer than two observations in total)
 */
[[nodiscard]] LabeledDataset read_csv(std::istream& in, std::string_view source_name = "<input>");

/// File convenience overload.
/// @throws std::invalid_argument also when the file cannot be opened
[[nodiscard]] LabeledDataset read_csv_file(const std::string& path);

}  // namespace smoothnorm
