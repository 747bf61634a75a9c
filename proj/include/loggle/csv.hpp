#pragma once

#include "loggle/dataset.hpp"

#include <map>
#include <string>
#include <vector>

namespace loggle {

/// Reads a dataset: header of variable names, optional leading `time` column.
/// Without a time column the grid is uniform on [0,1].
TimeSeriesDataset read_dataset_csv(const std::string& path);

void write_dataset_csv(const std::string& path, const TimeSeriesDataset& data, bool with_time = true);

/// Two-column `name,label` file; a header row whose first field is `name` is skipped.
std::map<std::string, std::string> read_labels_csv(const std::string& path);

/// Splits one CSV line on commas, trimming blanks and surrounding double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace loggle
