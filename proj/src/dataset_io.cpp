#include "dupkit/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dupkit {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw std::runtime_error("malformed number: '" + text + "'");
  return value;
}

int parse_int(const std::string& text) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw std::runtime_error("malformed integer: '" + text + "'");
  return value;
}

std::string join_labels(const std::vector<int>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(labels[i]);
  }
  return out;
}

std::vector<int> parse_labels(const std::string& text) {
  std::vector<int> labels;
  for (const auto& field : split(text, ';')) labels.push_back(parse_int(field));
  if (labels.empty()) throw std::runtime_error("instance without labels");
  return labels;
}

std::string feature_header(std::size_t dim) {
  std::string header = "group_id";
  for (std::size_t j = 0; j < dim; ++j) header += ",f_" + std::to_string(j);
  return header;
}

// Feature count implied by a header whose trailing columns are fixed.
std::size_t check_header(const std::string& header, const std::vector<std::string>& trailer) {
  const auto columns = split(header, ',');
  if (columns.size() < 1 + trailer.size() || columns.front() != "group_id") throw std::runtime_error("malformed CSV header");
  const std::size_t dim = columns.size() - 1 - trailer.size();
  for (std::size_t j = 0; j < dim; ++j)
    if (columns[1 + j] != "f_" + std::to_string(j)) throw std::runtime_error("malformed CSV header");
  for (std::size_t t = 0; t < trailer.size(); ++t)
    if (columns[1 + dim + t] != trailer[t]) throw std::runtime_error("malformed CSV header");
  return dim;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void write_dataset_csv(std::ostream& out, const std::vector<LabeledInstance>& instances) {
  const std::size_t dim = instances.empty() ? 0 : instances.front().features.size();
  out << feature_header(dim) << ",labels,target_disagree,target_var\n";
  for (const auto& instance : instances) {
    if (instance.features.size() != dim) throw std::invalid_argument("instances with differing feature counts");
    out << instance.group_id;
    for (double f : instance.features) out << ',' << format_double(f);
    out << ',' << join_labels(instance.labels) << ',' << instance.target_disagree << ',' << instance.target_var << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const std::vector<LabeledInstance>& instances) {
  auto out = open_for_write(path);
  write_dataset_csv(out, instances);
}

std::vector<LabeledInstance> read_dataset_csv(std::istream& in, const GradeScale& scale) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
  const std::size_t dim = check_header(line, {"labels", "target_disagree", "target_var"});
  std::vector<LabeledInstance> instances;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != dim + 4) throw std::runtime_error("row " + std::to_string(instances.size() + 2) + ": wrong field count");
    LabeledInstance instance;
    instance.group_id = fields[0];
    for (std::size_t j = 0; j < dim; ++j) instance.features.push_back(parse_double(fields[1 + j]));
    instance.labels = parse_labels(fields[1 + dim]);
    instance.histogram = empirical_histogram(instance.labels, scale);
    instance.target_disagree = parse_int(fields[2 + dim]);
    instance.target_var = parse_int(fields[3 + dim]);
    instances.push_back(std::move(instance));
  }
  return instances;
}

std::vector<LabeledInstance> read_dataset_csv(const std::filesystem::path& path, const GradeScale& scale) {
  auto in = open_for_read(path);
  return read_dataset_csv(in, scale);
}

void write_adjudicated_csv(const std::filesystem::path& path, const std::vector<AdjudicatedInstance>& instances) {
  auto out = open_for_write(path);
  const std::size_t dim = instances.empty() ? 0 : instances.front().features.size();
  out << feature_header(dim) << ",labels,adjudicated\n";
  for (const auto& instance : instances) {
    out << instance.group_id;
    for (double f : instance.features) out << ',' << format_double(f);
    out << ',' << join_labels(instance.labels) << ',' << instance.adjudicated << '\n';
  }
}

std::vector<AdjudicatedInstance> read_adjudicated_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty adjudicated file");
  const std::size_t dim = check_header(line, {"labels", "adjudicated"});
  std::vector<AdjudicatedInstance> instances;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != dim + 3) throw std::runtime_error("adjudicated row with wrong field count");
    AdjudicatedInstance instance;
    instance.group_id = fields[0];
    for (std::size_t j = 0; j < dim; ++j) instance.features.push_back(parse_double(fields[1 + j]));
    instance.labels = parse_labels(fields[1 + dim]);
    instance.adjudicated = parse_int(fields[2 + dim]);
    instances.push_back(std::move(instance));
  }
  return instances;
}

}  // namespace dupkit
