#include "mcivoice/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "mcivoice/error.hpp"

namespace mcivoice {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_value(std::string_view text, std::size_t line_no) {
  if (text == "NaN" || text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kMalformedCsv,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(text) + "'");
  }
  return v;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(ClassLabel label) { return label == ClassLabel::kCR ? "CR" : "MCI"; }

ClassLabel parse_label(std::string_view text) {
  if (text == "CR") return ClassLabel::kCR;
  if (text == "MCI") return ClassLabel::kMCI;
  throw Error(ErrorCode::kUnknownLabel, "unknown class label '" + std::string(text) + "'");
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.config_hash = config_hash;
  out.inventory_version = inventory_version;
  out.x = Matrix(rows.size(), x.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.ids.push_back(ids.empty() ? std::to_string(rows[i]) : ids[rows[i]]);
    out.labels.push_back(labels[rows[i]]);
  }
  return out;
}

Dataset Dataset::select_columns(const std::vector<std::size_t>& cols) const {
  Dataset out;
  out.ids = ids;
  out.labels = labels;
  out.config_hash = config_hash;
  out.inventory_version = inventory_version;
  out.x = Matrix(x.rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.feature_names.push_back(feature_names[cols[j]]);
    for (std::size_t i = 0; i < x.rows; ++i) out.x(i, j) = x(i, cols[j]);
  }
  return out;
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

void validate(const Dataset& ds) {
  if (ds.feature_names.size() != ds.x.cols) {
    throw Error(ErrorCode::kInvalidArgument, "feature name count does not match columns");
  }
  if (ds.labels.size() != ds.x.rows || (!ds.ids.empty() && ds.ids.size() != ds.x.rows)) {
    throw Error(ErrorCode::kInvalidArgument, "row metadata does not match rows");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : ds.feature_names) {
    if (!seen.insert(n).second) throw Error(ErrorCode::kDuplicateFeature, "duplicate feature " + n);
  }
  for (int l : ds.labels) {
    if (l != 0 && l != 1) throw Error(ErrorCode::kUnknownLabel, "label outside {CR, MCI}");
  }
}

std::string dataset_to_csv(const Dataset& ds) {
  validate(ds);
  std::string out;
  if (!ds.config_hash.empty()) out += "# config=" + ds.config_hash + "\n";
  out += "id";
  for (const auto& n : ds.feature_names) out += "," + n;
  out += ",label\n";
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    out += ds.ids.empty() ? std::to_string(i) : ds.ids[i];
    for (double v : ds.x.row(i)) out += "," + format_value(v);
    out += ",";
    out += to_string(static_cast<ClassLabel>(ds.labels[i]));
    out += "\n";
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  const std::string text = dataset_to_csv(ds);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << text;
}

Dataset parse_dataset(std::string_view text) {
  Dataset ds;
  bool have_header = false;
  std::size_t line_no = 0;
  std::vector<double> values;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# config=";
      if (line.substr(0, key.size()) == key) ds.config_hash = std::string(line.substr(key.size()));
      continue;
    }
    const auto cells = split_commas(line);
    if (!have_header) {
      if (cells.size() < 2 || cells.front() != "id" || cells.back() != "label") {
        throw Error(ErrorCode::kMalformedCsv, "header must be id,<features...>,label");
      }
      std::unordered_set<std::string_view> seen;
      for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
        if (!seen.insert(cells[c]).second) {
          throw Error(ErrorCode::kDuplicateFeature, "duplicate feature column " + std::string(cells[c]));
        }
        ds.feature_names.emplace_back(cells[c]);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != ds.feature_names.size() + 2) {
      throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(ds.feature_names.size() + 2) +
                                                " cells, got " + std::to_string(cells.size()));
    }
    ds.ids.emplace_back(cells.front());
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) values.push_back(parse_value(cells[c], line_no));
    ds.labels.push_back(static_cast<int>(parse_label(cells.back())));
  }
  if (!have_header) throw Error(ErrorCode::kMalformedCsv, "missing header row");
  ds.x.rows = ds.labels.size();
  ds.x.cols = ds.feature_names.size();
  ds.x.data = std::move(values);
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kFileUnreadable, "cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_dataset(buf.str());
}

std::vector<double> fit_median_imputer(const Dataset& ds) {
  std::vector<double> medians(ds.n_features(), 0.0);
  std::vector<double> col;
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    col.clear();
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      if (!std::isnan(ds.x(i, j))) col.push_back(ds.x(i, j));
    }
    if (col.empty()) continue;
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size() / 2;
    medians[j] = col.size() % 2 ? col[m] : 0.5 * (col[m - 1] + col[m]);
  }
  return medians;
}

void apply_median_imputer(Dataset& ds, const std::vector<double>& medians) {
  if (medians.size() != ds.n_features()) {
    throw Error(ErrorCode::kDimensionMismatch, "imputer fitted on a different feature count");
  }
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_features(); ++j) {
      if (!std::isfinite(ds.x(i, j))) ds.x(i, j) = medians[j];
    }
  }
}

}  // namespace mcivoice
