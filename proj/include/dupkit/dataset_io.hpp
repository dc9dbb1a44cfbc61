// CSV persistence for labeled and adjudicated instances.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dupkit/uncertainty.hpp"
#include "dupkit/worlds.hpp"

namespace dupkit {

/// Instance with many raw labels and one consensus grade.
struct AdjudicatedInstance {
  std::vector<double> features;
  std::string group_id;
  std::vector<int> labels;
  int adjudicated = 0;

  friend bool operator==(const AdjudicatedInstance&, const AdjudicatedInstance&) = default;
};

/// Doubles as decimal text with 17 significant digits.
std::string format_double(double value);

/// Header: group_id,f_0..f_{D-1},labels,target_disagree,target_var.
void write_dataset_csv(std::ostream& out, const std::vector<LabeledInstance>& instances);
void write_dataset_csv(const std::filesystem::path& path, const std::vector<LabeledInstance>& instances);

/// Histograms are rebuilt from the labels on `scale`; targets are read as stored.
std::vector<LabeledInstance> read_dataset_csv(std::istream& in, const GradeScale& scale);
std::vector<LabeledInstance> read_dataset_csv(const std::filesystem::path& path, const GradeScale& scale);

/// Header: group_id,f_0..f_{D-1},labels,adjudicated.
void write_adjudicated_csv(const std::filesystem::path& path, const std::vector<AdjudicatedInstance>& instances);
std::vector<AdjudicatedInstance> read_adjudicated_csv(const std::filesystem::path& path);

}  // namespace dupkit
