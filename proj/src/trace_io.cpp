#include "meanfp/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "meanfp/errors.hpp"

namespace meanfp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& tok, const std::string& path) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v))
      throw ConfigError("trace file " + path + ": bad numeric field '" + tok +
                        "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ConfigError("trace file " + path + ": bad numeric field '" + tok +
                      "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("trace file " + path + ": numeric field out of range");
  }
}

}  // namespace

std::string trace_header(int d, int k) {
  std::ostringstream os;
  os << "n,epsilon,inner_iters,inner_residual";
  for (int i = 0; i < d; ++i) os << ",z" << i;
  for (int i = 0; i < k; ++i) os << ",res" << i;
  os << ",mean_residual,vi_value,bound6_slack,gbh_slack";
  return os.str();
}

void write_trace_csv(const std::string& path, const Trace& trace, int d,
                     int k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open trace file for writing: " + path);
  out << trace_header(d, k) << "\n";
  for (const auto& row : trace.rows) {
    if (row.z.size() != d || row.generator_residuals.size() != k)
      throw std::logic_error("write_trace_csv: row shape mismatch");
    for (const double* v : {&row.epsilon, &row.inner.final_residual,
                            &row.mean_residual, &row.vi_value,
                            &row.bound6_violation, &row.gbh_violation})
      if (!std::isfinite(*v))
        throw std::logic_error("write_trace_csv: non-finite field");
    out << row.n << "," << fmt(row.epsilon) << "," << row.inner.iterations
        << "," << fmt(row.inner.final_residual);
    for (int i = 0; i < d; ++i) {
      if (!std::isfinite(row.z[i]))
        throw std::logic_error("write_trace_csv: non-finite iterate");
      out << "," << fmt(row.z[i]);
    }
    for (int i = 0; i < k; ++i) out << "," << fmt(row.generator_residuals[i]);
    out << "," << fmt(row.mean_residual) << "," << fmt(row.vi_value) << ","
        << fmt(row.bound6_violation) << "," << fmt(row.gbh_violation) << "\n";
  }
  if (!out) throw ConfigError("failed while writing trace file: " + path);
}

Trace read_trace_csv(const std::string& path, int d, int k) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("trace file not found: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("trace file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != trace_header(d, k))
    throw ConfigError("trace file " + path +
                      ": header does not match the configured d/k layout");

  Trace trace;
  const int expected = 8 + d + k;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> tok;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) tok.push_back(field);
    if (static_cast<int>(tok.size()) != expected)
      throw ConfigError("trace file " + path + ": expected " +
                        std::to_string(expected) + " columns, got " +
                        std::to_string(tok.size()));
    TraceRow row;
    row.n = static_cast<int>(parse_double(tok[0], path));
    row.epsilon = parse_double(tok[1], path);
    row.inner.iterations = static_cast<int>(parse_double(tok[2], path));
    row.inner.converged = true;
    row.inner.final_residual = parse_double(tok[3], path);
    row.z.resize(d);
    for (int i = 0; i < d; ++i) row.z[i] = parse_double(tok[4 + i], path);
    row.generator_residuals.resize(k);
    for (int i = 0; i < k; ++i)
      row.generator_residuals[i] = parse_double(tok[4 + d + i], path);
    row.mean_residual = parse_double(tok[4 + d + k], path);
    row.vi_value = parse_double(tok[5 + d + k], path);
    row.bound6_violation = parse_double(tok[6 + d + k], path);
    row.gbh_violation = parse_double(tok[7 + d + k], path);
    trace.rows.push_back(std::move(row));
  }
  if (trace.rows.empty())
    throw ConfigError("trace file has no data rows: " + path);
  return trace;
}

}  // namespace meanfp
