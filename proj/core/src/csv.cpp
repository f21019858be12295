#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "transboost/dataset.hpp"
#include "transboost/error.hpp"
#include "transboost/text.hpp"

namespace transboost {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Splits one record. Double quotes group a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_record(line, options.delimiter);
      break;
    }
  }
  if (header.empty()) throw DataError(ErrorKind::kMalformedRow, "missing header row");

  auto find_col = [&](const std::string& name, bool optional) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    if (optional) return std::nullopt;
    throw DataError(ErrorKind::kMissingColumn, "no column named '" + name + "'");
  };
  const std::optional<std::size_t> label_col = find_col(options.label_column, options.label_optional);
  std::optional<std::size_t> domain_col;
  if (!options.domain_column.empty()) {
    domain_col = find_col(options.domain_column, options.domain_optional || options.fixed_domain.has_value());
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if ((label_col && c == *label_col) || (domain_col && c == *domain_col)) continue;
    feature_cols.push_back(c);
    names.push_back(header[c]);
  }

  std::vector<std::vector<double>> cols(feature_cols.size());
  std::vector<std::uint8_t> labels;
  std::vector<Domain> domains;
  auto is_missing_token = [&](std::string_view tok) {
    return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), tok) !=
           options.missing_tokens.end();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, options.delimiter);
    if (fields.size() != header.size()) {
      throw DataError(ErrorKind::kMalformedRow, where(line_no) + ": expected " +
                                                    std::to_string(header.size()) + " fields, got " +
                                                    std::to_string(fields.size()));
    }

    if (!label_col) {
      labels.push_back(0);
    } else if (options.label_threshold) {
      const std::string& label_tok = fields[*label_col];
      auto v = parse_double(label_tok);
      if (!v) throw DataError(ErrorKind::kBadLabel, where(line_no) + ": label '" + label_tok + "'");
      labels.push_back(*v > *options.label_threshold ? 1 : 0);
    } else {
      const std::string& label_tok = fields[*label_col];
      long y = -1;
      auto [ptr, ec] = std::from_chars(label_tok.data(), label_tok.data() + label_tok.size(), y);
      if (ec != std::errc() || ptr != label_tok.data() + label_tok.size() || (y != 0 && y != 1)) {
        throw DataError(ErrorKind::kBadLabel, where(line_no) + ": label '" + label_tok + "' is not 0 or 1");
      }
      labels.push_back(static_cast<std::uint8_t>(y));
    }

    if (options.fixed_domain) {
      domains.push_back(*options.fixed_domain);
    } else if (domain_col) {
      const std::string& tag = fields[*domain_col];
      if (iequals(tag, options.source_tag)) {
        domains.push_back(Domain::kSource);
      } else if (iequals(tag, options.target_tag)) {
        domains.push_back(Domain::kTarget);
      } else {
        throw DataError(ErrorKind::kBadValue, where(line_no) + ": unknown domain tag '" + tag + "'");
      }
    } else {
      domains.push_back(Domain::kTarget);
    }

    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const std::string& tok = fields[feature_cols[k]];
      if (is_missing_token(tok)) {
        cols[k].push_back(kMissing);
        continue;
      }
      auto v = parse_double(tok);
      if (!v) {
        throw DataError(ErrorKind::kBadValue,
                        where(line_no) + ": column '" + names[k] + "' value '" + tok + "' is not a finite number");
      }
      cols[k].push_back(*v);
    }
  }
  return Dataset(std::move(cols), std::move(labels), std::move(domains), std::move(names));
}

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string format_csv(const Dataset& ds) {
  std::string out;
  for (const auto& name : ds.feature_names()) {
    out += name;
    out += ',';
  }
  out += "label,domain\n";
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_cols(); ++c) {
      const double v = ds.value(r, c);
      if (!is_missing(v)) out += format_real(v);
      out += ',';
    }
    out += ds.label(r) ? '1' : '0';
    out += ds.domain(r) == Domain::kSource ? ",source\n" : ",target\n";
  }
  return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(ErrorKind::kIo, "cannot write '" + path + "'");
  out << format_csv(ds);
  if (!out) throw DataError(ErrorKind::kIo, "write failed for '" + path + "'");
}

}  // namespace transboost
