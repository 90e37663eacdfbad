#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <regex>
#include <unordered_map>

#include "interx/error.hpp"
#include "interx/panel.hpp"

namespace interx {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

std::optional<double> parse_number(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<std::string> detect_columns(const std::vector<std::string>& header, char prefix) {
  const std::regex pattern(std::string(1, prefix) + "([0-9]+)");
  std::vector<std::pair<long, std::string>> found;
  for (const auto& col : header) {
    std::smatch m;
    if (std::regex_match(col, m, pattern)) found.emplace_back(std::stol(m[1].str()), col);
  }
  std::sort(found.begin(), found.end());
  std::vector<std::string> out;
  for (auto& [_, name] : found) out.push_back(name);
  return out;
}

// Numeric labels sort numerically, anything else lexicographically.
std::vector<std::string> sorted_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(),
                                   [](const std::string& s) { return parse_number(s).has_value(); });
  if (numeric) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return *parse_number(a) < *parse_number(b);
    });
  }
  return labels;
}

struct Row {
  std::size_t line = 0;
  std::string unit;
  std::string time;
  std::vector<double> values;  // y, x.., g.., z.., h..
};

}  // namespace

PanelDataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  const auto header = split_csv_line(line);

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t c = 0; c < header.size(); ++c) index.emplace(header[c], c);
  auto require = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw MissingColumn(name);
    return it->second;
  };

  ColumnNames names;
  names.x = schema.x.empty() ? detect_columns(header, 'x') : schema.x;
  names.g = schema.g.empty() ? detect_columns(header, 'g') : schema.g;
  names.z = schema.z.empty() ? detect_columns(header, 'z') : schema.z;
  names.h = schema.h.empty() ? detect_columns(header, 'h') : schema.h;
  if (names.x.empty()) throw MissingColumn("x1");

  const std::size_t unit_col = require(schema.unit);
  const std::size_t time_col = require(schema.time);
  std::vector<std::size_t> value_cols{require(schema.y)};
  std::vector<std::string> value_names{schema.y};
  for (const auto* group : {&names.x, &names.g, &names.z, &names.h}) {
    for (const auto& name : *group) {
      value_cols.push_back(require(name));
      value_names.push_back(name);
    }
  }

  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    Row row;
    row.line = line_no;
    row.unit = fields[unit_col];
    row.time = fields[time_col];
    row.values.reserve(value_cols.size());
    for (std::size_t v = 0; v < value_cols.size(); ++v) {
      const auto value = parse_number(fields[value_cols[v]]);
      if (!value || !std::isfinite(*value)) throw NonFiniteValue(line_no, value_names[v]);
      row.values.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV has no data rows");

  std::vector<std::string> unit_list, time_list;
  for (const auto& r : rows) {
    unit_list.push_back(r.unit);
    time_list.push_back(r.time);
  }
  unit_list = sorted_labels(std::move(unit_list));
  time_list = sorted_labels(std::move(time_list));
  std::unordered_map<std::string, std::size_t> unit_pos, time_pos;
  for (std::size_t i = 0; i < unit_list.size(); ++i) unit_pos.emplace(unit_list[i], i);
  for (std::size_t t = 0; t < time_list.size(); ++t) time_pos.emplace(time_list[t], t);

  const std::size_t n = unit_list.size();
  const std::size_t periods = time_list.size();
  std::vector<std::vector<const Row*>> cells(n, std::vector<const Row*>(periods, nullptr));
  std::vector<std::size_t> counts(n, 0);
  for (const auto& r : rows) {
    const std::size_t i = unit_pos.at(r.unit);
    ++counts[i];
    cells[i][time_pos.at(r.time)] = &r;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t distinct = 0;
    for (const Row* c : cells[i]) distinct += c != nullptr;
    if (counts[i] != periods || distinct != periods) {
      throw UnbalancedPanel(unit_list[i], periods, counts[i] != periods ? counts[i] : distinct);
    }
  }

  Dims dims{n, periods, names.x.size(), names.g.size(), names.z.size(), names.h.size()};
  PanelDataset ds = make_panel(dims);
  ds.unit_labels = unit_list;
  ds.time_labels = time_list;
  ds.names = names;
  const std::size_t off_g = 1 + dims.kx;
  const std::size_t off_z = off_g + dims.kg;
  const std::size_t off_h = off_z + dims.kz;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t t = 0; t < periods; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      const auto& v = cells[i][t]->values;
      ds.y(ii, tt) = v[0];
      for (std::size_t k = 0; k < dims.kx; ++k) ds.x[i](tt, static_cast<Eigen::Index>(k)) = v[1 + k];
      for (std::size_t k = 0; k < dims.kg; ++k) ds.g[i](tt, static_cast<Eigen::Index>(k)) = v[off_g + k];
      for (std::size_t k = 0; k < dims.kz; ++k) ds.z[i](tt, static_cast<Eigen::Index>(k)) = v[off_z + k];
      for (std::size_t k = 0; k < dims.kh; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (t == 0) {
          ds.h(ii, kk) = v[off_h + k];
        } else if (ds.h(ii, kk) != v[off_h + k]) {
          throw NonConstantH(unit_list[i], names.h[k]);
        }
      }
    }
  }
  return ds;
}

PanelDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, schema);
}

namespace {

void put_number(std::ostream& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  out.write(buf, ptr - buf);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  q.push_back('"');
  return q;
}

}  // namespace

void write_csv(const PanelDataset& ds, std::ostream& out) {
  ds.check();
  out << "unit,time,y";
  for (const auto* group : {&ds.names.x, &ds.names.g, &ds.names.z, &ds.names.h}) {
    for (const auto& name : *group) out << ',' << quote_if_needed(name);
  }
  out << '\n';
  const auto& d = ds.dims;
  for (std::size_t i = 0; i < d.n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t t = 0; t < d.periods; ++t) {
      const auto tt = static_cast<Eigen::Index>(t);
      out << quote_if_needed(ds.unit_labels[i]) << ',' << quote_if_needed(ds.time_labels[t]) << ',';
      put_number(out, ds.y(ii, tt));
      auto emit = [&](const Matrix& block, Eigen::Index row) {
        for (Eigen::Index k = 0; k < block.cols(); ++k) {
          out << ',';
          put_number(out, block(row, k));
        }
      };
      emit(ds.x[i], tt);
      emit(ds.g[i], tt);
      emit(ds.z[i], tt);
      emit(ds.h, ii);
      out << '\n';
    }
  }
}

void write_csv(const PanelDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(ds, out);
}

}  // namespace interx
