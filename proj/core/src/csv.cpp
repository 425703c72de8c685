#include "fact2k/csv.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "fact2k/design.hpp"

namespace fact2k {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw io_error(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& field, const std::string& source,
                    std::size_t line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    fail(source, line, "malformed numeric field '" + field + "'");
  }
  return value;
}

long parse_long(const std::string& field, const std::string& source,
                std::size_t line) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    fail(source, line, "malformed integer field '" + field + "'");
  }
  return value;
}

// Column count -> K, insisting on an exact power of two.
int k_from_columns(std::size_t columns, const std::string& source) {
  if (columns < 2 || !std::has_single_bit(columns) ||
      columns > (std::size_t{1} << kMaxFactors)) {
    throw io_error(source + ": " + std::to_string(columns) +
                   " outcome columns is not 2^K for a supported K");
  }
  return std::countr_zero(columns);
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PotentialOutcomeTable read_potential_outcomes(std::istream& in,
                                              const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error(source + ": empty file, expected header unit,y1,...");
  }
  const std::vector<std::string> header = split_fields(line);
  if (header.empty() || header[0] != "unit") {
    fail(source, 1, "header must start with 'unit'");
  }
  const int k = k_from_columns(header.size() - 1, source);
  const std::size_t dim = std::size_t{1} << k;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j + 1] != "y" + std::to_string(j + 1)) {
      fail(source, 1, "expected column 'y" + std::to_string(j + 1) + "', got '" +
                          header[j + 1] + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != dim + 1) {
      fail(source, lineno,
           "expected " + std::to_string(dim + 1) + " fields, got " +
               std::to_string(fields.size()));
    }
    parse_long(fields[0], source, lineno);  // unit id, format check only
    std::vector<double> row(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      row[j] = parse_double(fields[j + 1], source, lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw io_error(source + ": no data rows");
  }

  PotentialOutcomeTable table;
  table.k = k;
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  validate_table(table);
  return table;
}

PotentialOutcomeTable read_potential_outcomes_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return read_potential_outcomes(in, path);
}

void write_potential_outcomes(std::ostream& out,
                              const PotentialOutcomeTable& table) {
  const int dim = table.n_treatments();
  out << "unit";
  for (int j = 1; j <= dim; ++j) out << ",y" << j;
  out << '\n';
  for (int i = 0; i < table.n_units(); ++i) {
    out << i + 1;
    for (int j = 0; j < dim; ++j) out << ',' << format_value(table.values(i, j));
    out << '\n';
  }
}

ObservedData read_observed(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw io_error(source + ": empty file, expected header unit,f1,...,fK,y");
  }
  const std::vector<std::string> header = split_fields(line);
  if (header.size() < 3 || header.front() != "unit" || header.back() != "y") {
    fail(source, 1, "header must be unit,f1,...,fK,y");
  }
  const int k = static_cast<int>(header.size()) - 2;
  if (k > kMaxFactors) {
    fail(source, 1, std::to_string(k) + " factor columns exceeds the supported maximum");
  }
  for (int f = 1; f <= k; ++f) {
    if (header[f] != "f" + std::to_string(f)) {
      fail(source, 1, "expected column 'f" + std::to_string(f) + "', got '" +
                          header[f] + "'");
    }
  }

  ObservedData obs;
  obs.k = k;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != static_cast<std::size_t>(k) + 2) {
      fail(source, lineno,
           "expected " + std::to_string(k + 2) + " fields, got " +
               std::to_string(fields.size()));
    }
    ObservedRecord rec;
    rec.unit = static_cast<int>(parse_long(fields[0], source, lineno));
    // Factor levels select the treatment combination: factor f contributes
    // bit (K-f) when its level is +1, matching the canonical z order.
    int treatment = 0;
    for (int f = 1; f <= k; ++f) {
      const long level = parse_long(fields[f], source, lineno);
      if (level != 1 && level != -1) {
        fail(source, lineno, "factor level must be -1 or 1, got '" + fields[f] + "'");
      }
      if (level == 1) treatment |= 1 << (k - f);
    }
    rec.treatment = treatment;
    rec.outcome = parse_double(fields[k + 1], source, lineno);
    if (!std::isfinite(rec.outcome)) {
      fail(source, lineno, "non-finite outcome");
    }
    obs.records.push_back(rec);
  }
  if (obs.records.empty()) {
    throw io_error(source + ": no data rows");
  }
  return obs;
}

ObservedData read_observed_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return read_observed(in, path);
}

void write_observed(std::ostream& out, const ObservedData& obs) {
  const std::vector<TreatmentCombination> combos = treatment_combinations(obs.k);
  out << "unit";
  for (int f = 1; f <= obs.k; ++f) out << ",f" << f;
  out << ",y\n";
  for (const ObservedRecord& r : obs.records) {
    out << r.unit;
    for (int level : combos[r.treatment].levels) out << ',' << level;
    out << ',' << format_value(r.outcome) << '\n';
  }
}

void write_assignment(std::ostream& out, const Assignment& a) {
  out << "unit,treatment\n";
  for (std::size_t i = 0; i < a.treatment_of.size(); ++i) {
    out << i + 1 << ',' << a.treatment_of[i] + 1 << '\n';
  }
}

}  // namespace fact2k
