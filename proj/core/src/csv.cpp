#include "sigspline/csv.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "sigspline/errors.hpp"

namespace sigspline {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw DataError("csv line " + std::to_string(line_no) + ": cannot parse '" + s + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_series_csv(std::ostream& out, const Sequence& x) {
  out << 't';
  for (Eigen::Index c = 0; c < x.channels(); ++c) out << ",ch" << (c + 1);
  out << '\n';
  for (Eigen::Index t = 0; t < x.length(); ++t) {
    out << t;
    for (Eigen::Index c = 0; c < x.channels(); ++c) out << ',' << format_double(x(t, c));
    out << '\n';
  }
}

void write_series_csv(const std::string& path, const Sequence& x) {
  auto out = open_out(path);
  write_series_csv(out, x);
  if (!out) throw DataError("failed writing " + path);
}

Sequence read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input");
  strip_cr(line);
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "t") {
    throw DataError("csv: header must be t,ch1,...,chd");
  }
  const std::size_t d = header.size() - 1;
  std::vector<double> flat;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != d + 1) {
      throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(d + 1) + " fields, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 1; c <= d; ++c) flat.push_back(parse_double(cells[c], line_no));
    ++rows;
  }
  if (rows == 0) throw DataError("csv: no data rows");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::MatrixXd values = Eigen::Map<const RowMajor>(
      flat.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  try {
    return Sequence(values);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("csv: ") + e.what());
  }
}

Sequence read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_series_csv(in);
}

void write_batch_csv(const std::string& path, const std::vector<Sequence>& batch) {
  if (batch.empty()) throw DataError("write_batch_csv: empty batch");
  auto out = open_out(path);
  out << "sequence,t";
  for (Eigen::Index c = 0; c < batch.front().channels(); ++c) out << ",ch" << (c + 1);
  out << '\n';
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Sequence& x = batch[j];
    for (Eigen::Index t = 0; t < x.length(); ++t) {
      out << j << ',' << t;
      for (Eigen::Index c = 0; c < x.channels(); ++c) out << ',' << format_double(x(t, c));
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path);
}

std::vector<Sequence> read_batch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: empty input");
  strip_cr(line);
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "sequence" || header[1] != "t") {
    throw DataError("batch csv: header must be sequence,t,ch1,...,chd");
  }
  const std::size_t d = header.size() - 2;
  std::map<long, std::vector<std::vector<double>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != d + 2) throw DataError("batch csv line " + std::to_string(line_no));
    const long id = static_cast<long>(parse_double(cells[0], line_no));
    std::vector<double> r;
    for (std::size_t c = 2; c < cells.size(); ++c) r.push_back(parse_double(cells[c], line_no));
    rows[id].push_back(std::move(r));
  }
  std::vector<Sequence> out;
  for (const auto& [id, seq] : rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(seq.size()), static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (std::size_t c = 0; c < d; ++c) {
        m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = seq[t][c];
      }
    }
    out.emplace_back(std::move(m));
  }
  return out;
}

}  // namespace sigspline
