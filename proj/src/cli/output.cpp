#include "output.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace qbm::cli {

std::string format_real(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json json_real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

}  // namespace

void write_table(const std::filesystem::path& path, const Table& table) {
  auto f = open_out(path);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
    f << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_series(const std::filesystem::path& path, const std::vector<double>& t,
                  const std::vector<std::string>& names,
                  const std::vector<std::vector<double>>& columns,
                  const std::vector<std::uint8_t>& valid) {
  auto f = open_out(path);
  f << 't';
  for (const auto& n : names) f << ',' << n;
  f << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool ok = valid.empty() || valid[i];
    f << format_real(t[i]);
    for (const auto& c : columns) f << ',' << (ok ? format_real(c[i]) : std::string{});
    f << '\n';
  }
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_gnuplot(const std::filesystem::path& path, const PlotSpec& s) {
  auto f = open_out(path);
  const std::string png = std::filesystem::path(s.data).replace_extension(".png").string();
  f << "# gnuplot " << path.filename().string() << '\n'
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set terminal pngcairo size 1000,640\n"
    << "set output '" << png << "'\n"
    << "set title '" << s.title << "'\n"
    << "set xlabel '" << s.xlabel << "'\n"
    << "set ylabel '" << s.ylabel << "'\n"
    << "set grid\n";
  if (s.logx) f << "set logscale x\n";
  if (s.logy) f << "set logscale y\n";
  f << "plot ";
  for (std::size_t i = 0; i < s.curves.size(); ++i) {
    f << (i ? ", \\\n     " : "") << "'" << s.data << "' using " << s.xcol << ':'
      << s.curves[i].first << " with lines title '" << s.curves[i].second << "'";
  }
  f << '\n';
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qbm::cli
