// CSV ingestion and emission. Input files carry a header row; one named
// column is the response, every other column is a numeric feature.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "art/common.hpp"
#include "art/dataset.hpp"
#include "art/simbench.hpp"

namespace art {

struct Schema {
  std::vector<std::string> feature_names;
  std::string response_name;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) {
      cell.pop_back();
    }
    std::size_t start = 0;
    while (start < cell.size() && (cell[start] == ' ' || cell[start] == '\t')) ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline double parse_numeric_cell(const std::string& cell, const std::string& file, std::size_t row,
                                 const std::string& column) {
  if (cell.empty()) {
    throw data_error(file + ": empty cell at row " + std::to_string(row) + ", column '" + column + "'");
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != cell.size() || !std::isfinite(v)) {
    throw data_error(file + ": non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                     ", column '" + column + "'");
  }
  return v;
}

}  // namespace detail

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open file: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty file");
  table.columns = detail::split_csv_line(line);
  if (table.columns.empty()) throw data_error(path + ": empty header");
  std::size_t row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != table.columns.size()) {
      throw data_error(path + ": row " + std::to_string(row_number) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(table.columns.size()));
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      parsed[c] = detail::parse_numeric_cell(cells[c], path, row_number, table.columns[c]);
    }
    table.rows.push_back(std::move(parsed));
  }
  return table;
}

// Reads a labeled dataset; feature order follows the file header with the
// response column removed.
inline std::pair<Dataset, Schema> read_dataset_csv(const std::string& path,
                                                   const std::string& response_column, Task task) {
  const CsvTable table = read_csv_table(path);
  int response_idx = -1;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] == response_column) {
      if (response_idx >= 0) {
        throw data_error(path + ": response column '" + response_column + "' appears twice");
      }
      response_idx = static_cast<int>(c);
    }
  }
  if (response_idx < 0) {
    throw data_error(path + ": response column '" + response_column + "' not found");
  }
  if (table.columns.size() < 2) throw data_error(path + ": no feature columns");
  if (table.rows.empty()) throw data_error(path + ": no data rows");

  Schema schema;
  schema.response_name = response_column;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (static_cast<int>(c) != response_idx) schema.feature_names.push_back(table.columns[c]);
  }

  Matrix x(table.rows.size(), table.columns.size() - 1);
  Vector y(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    int fc = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (static_cast<int>(c) == response_idx) {
        y[static_cast<Eigen::Index>(r)] = table.rows[r][c];
      } else {
        x(static_cast<Eigen::Index>(r), fc++) = table.rows[r][c];
      }
    }
  }
  return {Dataset::make(std::move(x), std::move(y), task), std::move(schema)};
}

// Feature matrix in the model's column order; the response column is optional.
struct PredictionInput {
  Matrix features;
  std::optional<Vector> response;
};

inline PredictionInput read_prediction_csv(const std::string& path, const Schema& schema) {
  const CsvTable table = read_csv_table(path);
  if (table.rows.empty()) throw data_error(path + ": no data rows");
  std::vector<int> feature_idx;
  for (const std::string& name : schema.feature_names) {
    int found = -1;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (table.columns[c] == name) found = static_cast<int>(c);
    }
    if (found < 0) throw data_error(path + ": missing feature column '" + name + "'");
    feature_idx.push_back(found);
  }
  int response_idx = -1;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c] == schema.response_name) response_idx = static_cast<int>(c);
  }

  PredictionInput input;
  input.features.resize(static_cast<Eigen::Index>(table.rows.size()),
                        static_cast<Eigen::Index>(feature_idx.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < feature_idx.size(); ++c) {
      input.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          table.rows[r][static_cast<std::size_t>(feature_idx[c])];
    }
  }
  if (response_idx >= 0) {
    Vector y(static_cast<Eigen::Index>(table.rows.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      y[static_cast<Eigen::Index>(r)] = table.rows[r][static_cast<std::size_t>(response_idx)];
    }
    input.response = std::move(y);
  }
  return input;
}

inline void write_results_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "method,M,xi,replication,error\n";
  for (const auto& row : result.rows) {
    out << row.method << ',' << row.M << ',' << format_double(row.xi) << ',' << row.replication
        << ',' << format_double(row.error) << '\n';
  }
}

inline void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& summary) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path);
  out << "method,M,xi,mean,sd,se,n_reps\n";
  for (const auto& s : summary) {
    out << s.method << ',' << s.M << ',' << format_double(s.xi) << ',' << format_double(s.mean)
        << ',' << (s.sd ? format_double(*s.sd) : "") << ',' << (s.se ? format_double(*s.se) : "")
        << ',' << s.n_reps << '\n';
  }
}

}  // namespace art
