#pragma once

#include "mixboot/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mixboot {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
  /// Columns to keep, by header name or 1-based position. Empty keeps all.
  std::vector<std::string> columns;
};

enum class DatasetOrigin { BundledFaithful, CsvPath, SimSpec };

struct DatasetSource {
  DatasetOrigin origin = DatasetOrigin::BundledFaithful;
  std::string path;        // CsvPath
  CsvOptions csv;          // CsvPath
  std::string sim_model;   // SimSpec: builtin model name
  std::uint64_t sim_seed = 1;
};

struct Dataset {
  DataMatrix data;
  std::vector<std::string> column_names;
  std::string description;
};

/// Parses RFC 4180 text: quoted fields, doubled quotes, CRLF or LF line
/// ends. Every kept cell must be numeric; failures raise ParseError with the
/// 1-based data row (header excluded) and column.
Dataset parse_csv(std::string_view text, const CsvOptions& options = {});

/// Raw RFC 4180 records (all fields as text).
std::vector<std::vector<std::string>> read_csv_records(std::string_view text, char delimiter = ',');

/// Old Faithful eruptions: 272 rows of (eruption minutes, waiting minutes).
Dataset old_faithful();

/// Throws MissingFile or ParseError.
Dataset load_dataset(const DatasetSource& source);

}  // namespace mixboot
