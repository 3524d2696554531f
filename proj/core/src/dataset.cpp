#include "mixboot/dataset.hpp"

#include "mixboot/error.hpp"
#include "mixboot/simulation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mixboot {

// Defined in the generated faithful_data.cpp.
extern const std::string_view kFaithfulCsv;

namespace {

using Record = std::vector<std::string>;

// Splits text into records. `lines` receives the 1-based line each record
// starts on.
std::vector<Record> split_records(std::string_view text, char delim, std::vector<std::size_t>& lines) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_record = [&] {
    current.push_back(std::move(field));
    field.clear();
    // Blank lines are skipped.
    if (!(current.size() == 1 && current[0].empty() && !field_started)) {
      records.push_back(std::move(current));
      lines.push_back(record_line);
    }
    current.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      current.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      end_record();
      ++line;
      record_line = line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", records.size() + 1, 0);
  if (field_started || !field.empty() || !current.empty()) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

std::vector<std::vector<std::string>> read_csv_records(std::string_view text, char delimiter) {
  std::vector<std::size_t> lines;
  return split_records(text, delimiter, lines);
}

Dataset parse_csv(std::string_view text, const CsvOptions& options) {
  std::vector<std::size_t> lines;
  std::vector<Record> records = split_records(text, options.delimiter, lines);
  std::vector<std::string> names;
  std::size_t first = 0;
  if (options.header) {
    if (records.empty()) throw ParseError("CSV input is empty", 0, 0);
    for (const auto& h : records.front()) names.emplace_back(trim(h));
    first = 1;
  }
  if (records.size() <= first) throw ParseError("CSV input has no data rows", 0, 0);

  const std::size_t width = records[first].size();
  if (names.empty())
    for (std::size_t j = 0; j < width; ++j) names.push_back("V" + std::to_string(j + 1));
  if (names.size() != width) throw ParseError("header and first row have different widths", 1, 0);

  std::vector<std::size_t> keep;
  if (options.columns.empty()) {
    for (std::size_t j = 0; j < width; ++j) keep.push_back(j);
  } else {
    for (const auto& col : options.columns) {
      std::size_t found = width;
      for (std::size_t j = 0; j < width; ++j)
        if (names[j] == col) found = j;
      if (found == width) {
        std::size_t position = 0;
        const auto [ptr, ec] = std::from_chars(col.data(), col.data() + col.size(), position);
        if (ec == std::errc() && ptr == col.data() + col.size() && position >= 1 && position <= width)
          found = position - 1;
      }
      if (found == width) throw ParseError("unknown column '" + col + "'", 0, 0);
      keep.push_back(found);
    }
  }

  const std::size_t rows = records.size() - first;
  Matrix values(static_cast<Index>(rows), static_cast<Index>(keep.size()));
  for (std::size_t r = 0; r < rows; ++r) {
    const Record& rec = records[first + r];
    if (rec.size() != width)
      throw ParseError("expected " + std::to_string(width) + " fields, found " + std::to_string(rec.size()),
                       r + 1, 0);
    for (std::size_t k = 0; k < keep.size(); ++k) {
      double v = 0.0;
      if (!parse_number(rec[keep[k]], v))
        throw ParseError("non-numeric cell '" + rec[keep[k]] + "'", r + 1, keep[k] + 1);
      values(static_cast<Index>(r), static_cast<Index>(k)) = v;
    }
  }

  std::vector<std::string> kept_names;
  for (auto j : keep) kept_names.push_back(names[j]);
  return {DataMatrix(std::move(values)), std::move(kept_names), ""};
}

Dataset old_faithful() {
  Dataset d = parse_csv(kFaithfulCsv);
  d.description = "Old Faithful geyser eruptions (272 x 2, minutes)";
  return d;
}

Dataset load_dataset(const DatasetSource& source) {
  switch (source.origin) {
    case DatasetOrigin::BundledFaithful: {
      Dataset d = old_faithful();
      if (!source.csv.columns.empty()) {
        CsvOptions opts;
        opts.columns = source.csv.columns;
        d = parse_csv(kFaithfulCsv, opts);
        d.description = "Old Faithful geyser eruptions";
      }
      return d;
    }
    case DatasetOrigin::CsvPath: {
      std::ifstream in(source.path, std::ios::binary);
      if (!in) throw Error(ErrorCode::MissingFile, "cannot open '" + source.path + "'");
      std::ostringstream buffer;
      buffer << in.rdbuf();
      Dataset d = parse_csv(buffer.str(), source.csv);
      d.description = source.path;
      return d;
    }
    case DatasetOrigin::SimSpec: {
      const SimulationModelSpec spec = builtin_spec(source.sim_model);
      std::vector<std::string> names;
      for (Index j = 0; j < spec.p(); ++j) names.push_back("x" + std::to_string(j + 1));
      return {sample_dataset(spec, source.sim_seed), std::move(names),
              "simulated from " + spec.name + " (seed " + std::to_string(source.sim_seed) + ")"};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown dataset origin");
}

}  // namespace mixboot
