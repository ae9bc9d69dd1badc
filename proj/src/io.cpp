#include "esrlab/io.hpp"

#include "esrlab/error.hpp"
#include "esrlab/text_format.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace esrlab::io {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[static_cast<std::size_t>(k)] = digits[v & 0xf];
  return s;
}

namespace {

std::string where(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": ";
}

struct Table {
  std::vector<std::string> header;
  struct Row {
    std::size_t line;
    std::vector<std::string> cells;
  };
  std::vector<Row> rows;
};

/// `required` columns must lead the header; `optional` may follow.
Table read_table(std::string_view contents, const std::string& source, const std::vector<std::string>& required,
                 const std::vector<std::string>& optional) {
  Table t;
  std::istringstream in{std::string(contents)};
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (!have_header) {
      std::size_t k = 0;
      for (; k < required.size(); ++k) {
        if (k >= cells.size() || text::trim(cells[k]) != required[k])
          throw DataError(where(source, line_no, k + 1) + "expected header column '" + required[k] + "'");
      }
      for (std::size_t j = 0; k < cells.size(); ++k, ++j) {
        if (j >= optional.size() || text::trim(cells[k]) != optional[j])
          throw DataError(where(source, line_no, k + 1) + "unexpected header column '" +
                          std::string(text::trim(cells[k])) + "'");
      }
      for (auto c : cells) t.header.emplace_back(text::trim(c));
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw DataError(where(source, line_no, std::min(cells.size(), t.header.size()) + 1) + "expected " +
                      std::to_string(t.header.size()) + " columns, found " + std::to_string(cells.size()));
    Table::Row row{line_no, {}};
    for (auto c : cells) row.cells.emplace_back(text::trim(c));
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError(source + ":1:1: missing header");
  return t;
}

double number(const Table::Row& row, std::size_t col, const std::string& source) {
  double v = 0.0;
  try {
    v = text::parse_double(row.cells[col]);
  } catch (const std::invalid_argument&) {
    throw DataError(where(source, row.line, col + 1) + "not a number: '" + row.cells[col] + "'");
  }
  if (!std::isfinite(v)) throw DataError(where(source, row.line, col + 1) + "not finite: '" + row.cells[col] + "'");
  return v;
}

template <typename T>
Loaded<T> finish(T value, std::string_view contents, const std::string& source, std::size_t rows) {
  Loaded<T> out{std::move(value), {source, rows, fnv1a64(contents)}, {}};
  if (rows == 0) out.warnings.push_back(source + ": header only, no data rows");
  return out;
}

std::string slurp(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Loaded<std::vector<InteractionPoint>> parse_points(std::string_view contents, const std::string& source) {
  const Table t = read_table(contents, source, {"B_tesla", "f_GHz", "snr_class"}, {"sigma_f_GHz"});
  std::vector<InteractionPoint> pts;
  for (const auto& row : t.rows) {
    InteractionPoint p;
    p.field_tesla = number(row, 0, source);
    p.frequency_ghz = number(row, 1, source);
    const auto cls = parse_snr_class(row.cells[2]);
    if (!cls) throw DataError(where(source, row.line, 3) + "unknown snr_class '" + row.cells[2] + "'");
    p.snr_class = *cls;
    if (t.header.size() == 4 && !row.cells[3].empty()) p.sigma_f_ghz = number(row, 3, source);
    if (!(p.field_tesla >= 0.0)) throw DataError(where(source, row.line, 1) + "field must be >= 0");
    if (!(p.frequency_ghz > 0.0)) throw DataError(where(source, row.line, 2) + "frequency must be > 0");
    if (!(p.sigma_f_ghz > 0.0)) throw DataError(where(source, row.line, 4) + "sigma_f must be > 0");
    pts.push_back(p);
  }
  return finish(std::move(pts), contents, source, t.rows.size());
}

Loaded<CrossingData> parse_crossing(std::string_view contents, const std::string& source) {
  const Table t = read_table(contents, source, {"B_tesla", "f_GHz", "branch"}, {"Q"});
  CrossingData data;
  for (const auto& row : t.rows) {
    CrossingPoint p;
    p.field_tesla = number(row, 0, source);
    p.frequency_ghz = number(row, 1, source);
    const auto br = parse_branch(row.cells[2]);
    if (!br) throw DataError(where(source, row.line, 3) + "branch must be 'upper' or 'lower', got '" + row.cells[2] + "'");
    p.branch = *br;
    if (t.header.size() == 4 && !row.cells[3].empty()) {
      p.q = number(row, 3, source);
      if (!(*p.q > 0.0)) throw DataError(where(source, row.line, 4) + "Q must be > 0");
    }
    if (!(p.field_tesla >= 0.0)) throw DataError(where(source, row.line, 1) + "field must be >= 0");
    if (!(p.frequency_ghz > 0.0)) throw DataError(where(source, row.line, 2) + "frequency must be > 0");
    data.points.push_back(p);
  }
  return finish(std::move(data), contents, source, t.rows.size());
}

Loaded<std::vector<TraceSample>> parse_trace(std::string_view contents, const std::string& source) {
  const Table t = read_table(contents, source, {"f_GHz", "mag"}, {});
  std::vector<TraceSample> trace;
  for (const auto& row : t.rows) trace.push_back({number(row, 0, source), number(row, 1, source)});
  return finish(std::move(trace), contents, source, t.rows.size());
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return slurp(in);
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot rename onto '" + path.string() + "'");
  }
}

Loaded<std::vector<InteractionPoint>> read_interaction_points(std::istream& in, const std::string& source) {
  return parse_points(slurp(in), source);
}
Loaded<std::vector<InteractionPoint>> load_interaction_points(const fs::path& path) {
  return parse_points(read_file(path), path.string());
}

void write_interaction_points(std::ostream& out, const std::vector<InteractionPoint>& points) {
  out << "B_tesla,f_GHz,snr_class,sigma_f_GHz\n";
  for (const auto& p : points)
    out << text::format_double(p.field_tesla) << ',' << text::format_double(p.frequency_ghz) << ','
        << to_string(p.snr_class) << ',' << text::format_double(p.sigma_f_ghz) << '\n';
}

Loaded<CrossingData> read_crossing_data(std::istream& in, const std::string& source) {
  return parse_crossing(slurp(in), source);
}
Loaded<CrossingData> load_crossing_data(const fs::path& path) { return parse_crossing(read_file(path), path.string()); }

void write_crossing_data(std::ostream& out, const CrossingData& data) {
  out << "B_tesla,f_GHz,branch,Q\n";
  for (const auto& p : data.points) {
    out << text::format_double(p.field_tesla) << ',' << text::format_double(p.frequency_ghz) << ','
        << to_string(p.branch) << ',';
    if (p.q) out << text::format_double(*p.q);
    out << '\n';
  }
}

Loaded<std::vector<TraceSample>> read_trace(std::istream& in, const std::string& source) {
  return parse_trace(slurp(in), source);
}
Loaded<std::vector<TraceSample>> load_trace(const fs::path& path) { return parse_trace(read_file(path), path.string()); }

void write_trace(std::ostream& out, const std::vector<TraceSample>& trace) {
  out << "f_GHz,mag\n";
  for (const auto& s : trace) out << text::format_double(s.frequency_ghz) << ',' << text::format_double(s.magnitude) << '\n';
}

void write_resonances(std::ostream& out, const std::vector<ResonanceHit>& hits) {
  out << "B_tesla,m,n,f_residual_GHz\n";
  for (const auto& h : hits)
    out << text::format_double(h.field_tesla) << ',' << h.lower << ',' << h.upper << ','
        << text::format_double(h.frequency_residual_ghz) << '\n';
}

}  // namespace esrlab::io
