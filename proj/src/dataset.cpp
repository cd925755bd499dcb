#include "dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace spc {

void save_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  char buf[32];
  for (Eigen::Index r = 0; r < ds.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.values.cols(); ++c) {
      if (c > 0) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", ds.values(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + cell + "'", line_no, 1);
      }
      if (!std::isfinite(row.back())) throw ParseError("non-finite value", line_no, 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged row", line_no, 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kInvalidArgument, path + " holds no rows");
  Dataset ds;
  ds.values.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  for (std::size_t c = 0; c < rows.front().size(); ++c) ds.names.push_back("X" + std::to_string(c));
  return ds;
}

}  // namespace spc
