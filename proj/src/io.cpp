#include "dmd/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace dmd {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& text, long line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ConfigError("csv line " + std::to_string(line_no) +
                      ": not a number: '" + text + "'");
  return v;
}

// Reads the header and returns n, the per-block state dimension.
Index read_header(std::istream& in, const std::string& first, int extra,
                  int blocks) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  const auto cols = split_row(line);
  if (cols.empty() || cols.front() != first)
    throw ConfigError("csv: header must start with '" + first + "'");
  const long body = static_cast<long>(cols.size()) - 1 - extra;
  if (body < blocks || body % blocks != 0)
    throw ConfigError("csv: unexpected column count " +
                      std::to_string(cols.size()));
  return body / blocks;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const Index n = traj.x_path.rows();
  out << "t";
  for (Index i = 1; i <= n; ++i) out << ",z_" << i;
  for (Index i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",V,residual\n";
  const bool has_v = !traj.lyapunov.empty();
  for (Index k = 0; k < traj.samples(); ++k) {
    out << format_number(traj.times[k]);
    for (Index i = 0; i < n; ++i) out << ',' << format_number(traj.z_path(i, k));
    for (Index i = 0; i < n; ++i) out << ',' << format_number(traj.x_path(i, k));
    out << ','
        << format_number(has_v ? traj.lyapunov[k]
                               : std::numeric_limits<double>::quiet_NaN());
    out << ',' << format_number(traj.residuals[k]) << '\n';
  }
}

void write_trajectory_csv(const Trajectory& traj,
                          const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_trajectory_csv(traj, out);
}

Trajectory read_trajectory_csv(std::istream& in) {
  const Index n = read_header(in, "t", 2, 2);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (static_cast<Index>(cells.size()) != 2 * n + 3)
      throw ConfigError("csv line " + std::to_string(line_no) +
                        ": wrong number of fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, line_no));
    rows.push_back(std::move(row));
  }

  Trajectory traj;
  const Index m = static_cast<Index>(rows.size());
  traj.z_path.resize(n, m);
  traj.x_path.resize(n, m);
  bool any_v = false;
  std::vector<double> v;
  for (Index k = 0; k < m; ++k) {
    const auto& r = rows[k];
    traj.times.push_back(r[0]);
    for (Index i = 0; i < n; ++i) {
      traj.z_path(i, k) = r[1 + i];
      traj.x_path(i, k) = r[1 + n + i];
    }
    v.push_back(r[1 + 2 * n]);
    any_v = any_v || !std::isnan(r[1 + 2 * n]);
    traj.residuals.push_back(r[2 + 2 * n]);
  }
  if (any_v) traj.lyapunov = std::move(v);
  traj.saturated.assign(m, false);
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_trajectory_csv(in);
}

void write_discrete_csv(const DiscreteRun& run, std::ostream& out) {
  const Index n = run.iterates.rows();
  out << "k";
  for (Index i = 1; i <= n; ++i) out << ",x_" << i;
  out << ",residual\n";
  for (Index c = 0; c < run.samples(); ++c) {
    out << run.iterations[c];
    for (Index i = 0; i < n; ++i) out << ',' << format_number(run.iterates(i, c));
    out << ',' << format_number(run.residuals[c]) << '\n';
  }
}

void write_discrete_csv(const DiscreteRun& run,
                        const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_discrete_csv(run, out);
}

DiscreteRun read_discrete_csv(std::istream& in) {
  const Index n = read_header(in, "k", 1, 1);
  DiscreteRun run;
  std::vector<std::vector<double>> cols;
  std::string line;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_row(line);
    if (static_cast<Index>(cells.size()) != n + 2)
      throw ConfigError("csv line " + std::to_string(line_no) +
                        ": wrong number of fields");
    const double k = parse_number(cells[0], line_no);
    if (k != std::floor(k) || k < 0)
      throw ConfigError("csv line " + std::to_string(line_no) +
                        ": iteration index must be a non-negative integer");
    run.iterations.push_back(static_cast<long>(k));
    std::vector<double> x(n);
    for (Index i = 0; i < n; ++i) x[i] = parse_number(cells[1 + i], line_no);
    cols.push_back(std::move(x));
    run.residuals.push_back(parse_number(cells[n + 1], line_no));
  }
  run.iterates.resize(n, static_cast<Index>(cols.size()));
  for (Index c = 0; c < run.iterates.cols(); ++c)
    for (Index i = 0; i < n; ++i) run.iterates(i, c) = cols[c][i];
  if (!run.iterations.empty()) run.iteration_count = run.iterations.back();
  return run;
}

DiscreteRun read_discrete_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_discrete_csv(in);
}

}  // namespace dmd
