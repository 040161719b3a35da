#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mcivoice/matrix.hpp"

namespace mcivoice {

// Binary class labels. Stored as 0 / 1 in datasets.
enum class ClassLabel : int { kCR = 0, kMCI = 1 };

const char* to_string(ClassLabel label);
ClassLabel parse_label(std::string_view text);  // throws kUnknownLabel

inline constexpr const char* kInventoryVersion = "mcivoice-inventory-1";

// Recordings x features, with ids, feature names, labels and provenance.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<int> labels;
  std::string config_hash;
  std::string inventory_version = kInventoryVersion;

  std::size_t n_rows() const { return x.rows; }
  std::size_t n_features() const { return x.cols; }

  Dataset select_rows(const std::vector<std::size_t>& rows) const;
  Dataset select_columns(const std::vector<std::size_t>& cols) const;
  std::size_t count_label(int label) const;
};

// Names unique, shapes consistent, labels in {0, 1}. Throws on violation.
void validate(const Dataset& ds);

// "# config=<hash>" comment, header "id,<names...>,label", NaN written as "NaN".
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
std::string dataset_to_csv(const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view text);

// Per-feature medians over non-NaN entries (0 for an all-NaN column).
std::vector<double> fit_median_imputer(const Dataset& ds);
void apply_median_imputer(Dataset& ds, const std::vector<double>& medians);

}  // namespace mcivoice
