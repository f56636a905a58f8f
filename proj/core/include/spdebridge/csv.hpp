#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace spdebridge {

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};

/// Writes a CSV with a mandatory header row, '.' decimal point, and full
/// round-trip float precision. The write is atomic: data lands in a temp file
/// that is renamed into place.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& rows);

/// Reads a CSV written by write_csv (header row required, numeric body).
CsvTable read_csv(const std::string& path);

/// Atomic text-file write (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

/// Header helpers: "t,c1..cJ" for spectral paths, "t,u1..uM" for fields,
/// "y1..yk" for observed states.
std::vector<std::string> spectral_header(Eigen::Index num_modes);
std::vector<std::string> field_header(Eigen::Index num_points);
std::vector<std::string> observed_header(Eigen::Index dim);

}  // namespace spdebridge
