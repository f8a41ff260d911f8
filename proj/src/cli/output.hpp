#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace qbm::cli {

using Json = nlohmann::ordered_json;

/// 17 significant digits; NaN becomes an empty field.
std::string format_real(double v);

/// Number or null (NaN / infinity are not valid JSON numbers).
Json json_real(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

void write_table(const std::filesystem::path& path, const Table& table);

/// First column t, then one column per entry; rows with valid[i] == 0 get
/// empty fields.
void write_series(const std::filesystem::path& path, const std::vector<double>& t,
                  const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& columns,
                  const std::vector<std::uint8_t>& valid = {});

void write_json(const std::filesystem::path& path, const Json& j);

struct PlotSpec {
  std::string data;  // csv file name, relative to the script
  std::string title;
  std::string xlabel;
  std::string ylabel;
  int xcol = 1;
  std::vector<std::pair<int, std::string>> curves;  // (column, title)
  bool logx = false;
  bool logy = false;
};

/// gnuplot script rendering the CSV to a PNG next to it.
void write_gnuplot(const std::filesystem::path& path, const PlotSpec& spec);

std::string utc_timestamp();

}  // namespace qbm::cli
