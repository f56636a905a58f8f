#include "spdebridge/csv.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace spdebridge {

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path temp = target.parent_path() /
                        (target.filename().string() + ".tmp-" +
                         std::to_string(static_cast<unsigned long>(::getpid())));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + temp.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + temp.string());
  }
  fs::rename(temp, target);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols())
    throw std::invalid_argument("csv header width does not match the data");
  std::string out;
  out.reserve(static_cast<size_t>(rows.size()) * 12 + header.size() * 8);
  for (size_t c = 0; c < header.size(); ++c) {
    if (c > 0) out.push_back(',');
    out += header[c];
  }
  out.push_back('\n');
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (c > 0) out.push_back(',');
      out += format_double(rows(r, c));
    }
    out.push_back('\n');
  }
  write_text_atomic(path, out);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::vector<std::vector<double>> body;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    const char* ptr = line.c_str();
    const char* end = ptr + line.size();
    while (ptr < end) {
      double v = 0.0;
      const auto parsed = std::from_chars(ptr, end, v);
      if (parsed.ec != std::errc()) throw std::runtime_error(path + ": malformed number");
      row.push_back(v);
      ptr = parsed.ptr;
      if (ptr < end) {
        if (*ptr != ',') throw std::runtime_error(path + ": expected comma");
        ++ptr;
      }
    }
    if (row.size() != table.header.size())
      throw std::runtime_error(path + ": row width does not match the header");
    body.push_back(std::move(row));
  }
  table.rows.resize(static_cast<Eigen::Index>(body.size()),
                    static_cast<Eigen::Index>(table.header.size()));
  for (size_t r = 0; r < body.size(); ++r)
    for (size_t c = 0; c < body[r].size(); ++c)
      table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = body[r][c];
  return table;
}

std::vector<std::string> spectral_header(Eigen::Index num_modes) {
  std::vector<std::string> h;
  h.reserve(static_cast<size_t>(num_modes) + 1);
  h.push_back("t");
  for (Eigen::Index j = 1; j <= num_modes; ++j) h.push_back("c" + std::to_string(j));
  return h;
}

std::vector<std::string> field_header(Eigen::Index num_points) {
  std::vector<std::string> h;
  h.reserve(static_cast<size_t>(num_points) + 1);
  h.push_back("t");
  for (Eigen::Index m = 1; m <= num_points; ++m) h.push_back("u" + std::to_string(m));
  return h;
}

std::vector<std::string> observed_header(Eigen::Index dim) {
  std::vector<std::string> h;
  h.reserve(static_cast<size_t>(dim));
  for (Eigen::Index i = 1; i <= dim; ++i) h.push_back("y" + std::to_string(i));
  return h;
}

}  // namespace spdebridge
