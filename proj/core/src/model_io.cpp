#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "transboost/error.hpp"
#include "transboost/model.hpp"
#include "transboost/text.hpp"

// Line-oriented model format, version 1:
//
//   transboost-model 1
//   n_features <n>
//   eta <real>
//   base_score_main <real>
//   base_score_anc <real>
//   config <key>=<value>          (one line per hyperparameter)
//   n_trees <n>
//   tree <k>
//   node <id> feat=<f> cut=<v> default=<L|R> left=<id> right=<id> gain=<g>
//   leaf <id> wt=<main> ws=<ancillary>
//   end
//
// Reals carry 17 significant digits.

namespace transboost {
namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw DataError(ErrorKind::kModelFormat, "line " + std::to_string(line_no) + ": " + what);
}

double parse_real(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line_no, "bad number '" + std::string(s) + "'");
  return v;
}

long long parse_int(std::string_view s, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line_no, "bad integer '" + std::string(s) + "'");
  return v;
}

// Parses `key=value` tokens after the record keyword and id.
std::map<std::string, std::string> parse_fields(std::istringstream& in, std::size_t line_no) {
  std::map<std::string, std::string> out;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key=value, got '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& f, const char* key, std::size_t line_no) {
  auto it = f.find(key);
  if (it == f.end()) fail(line_no, std::string("missing field '") + key + "'");
  return it->second;
}

}  // namespace

void save_model(const TransBoostModel& model, std::ostream& out) {
  out << "transboost-model " << kFormatVersion << '\n';
  out << "n_features " << model.n_features << '\n';
  out << "eta " << format_real(model.eta) << '\n';
  out << "base_score_main " << format_real(model.base_score_main) << '\n';
  out << "base_score_anc " << format_real(model.base_score_anc) << '\n';
  for (const auto& [k, v] : model.config.to_pairs()) out << "config " << k << '=' << v << '\n';
  out << "n_trees " << model.trees.size() << '\n';
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    out << "tree " << k << '\n';
    const auto& nodes = model.trees[k].nodes();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const TreeNode& n = nodes[id];
      if (n.is_leaf()) {
        out << "leaf " << id << " wt=" << format_real(n.weight_main) << " ws=" << format_real(n.weight_anc)
            << '\n';
      } else {
        out << "node " << id << " feat=" << n.feature << " cut=" << format_real(n.threshold)
            << " default=" << (n.default_direction == DefaultDirection::kLeft ? 'L' : 'R') << " left=" << n.left
            << " right=" << n.right << " gain=" << format_real(n.gain) << '\n';
      }
    }
    out << "end\n";
  }
}

std::string serialize_model(const TransBoostModel& model) {
  std::ostringstream out;
  save_model(model, out);
  return out.str();
}

void save_model(const TransBoostModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(ErrorKind::kIo, "cannot write '" + path + "'");
  save_model(model, out);
  if (!out) throw DataError(ErrorKind::kIo, "write failed for '" + path + "'");
}

TransBoostModel parse_model(std::istream& in) {
  TransBoostModel model;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected_trees = 0;
  bool seen_header = false;
  bool seen_count = false;
  std::vector<TreeNode> nodes;
  bool in_tree = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (!seen_header) {
      long long version = 0;
      std::string v;
      ls >> v;
      if (kw != "transboost-model") fail(line_no, "not a transboost model file");
      version = parse_int(v, line_no);
      if (version != kFormatVersion) fail(line_no, "unsupported format version " + v);
      seen_header = true;
      continue;
    }
    std::string arg;
    if (kw == "n_features") {
      ls >> arg;
      model.n_features = static_cast<std::size_t>(parse_int(arg, line_no));
    } else if (kw == "eta") {
      ls >> arg;
      model.eta = parse_real(arg, line_no);
    } else if (kw == "base_score_main") {
      ls >> arg;
      model.base_score_main = parse_real(arg, line_no);
    } else if (kw == "base_score_anc") {
      ls >> arg;
      model.base_score_anc = parse_real(arg, line_no);
    } else if (kw == "config") {
      ls >> arg;
      const auto eq = arg.find('=');
      if (eq == std::string::npos) fail(line_no, "config entry without '='");
      try {
        model.config.set(arg.substr(0, eq), arg.substr(eq + 1));
      } catch (const ConfigError& e) {
        fail(line_no, e.what());
      }
    } else if (kw == "n_trees") {
      ls >> arg;
      expected_trees = static_cast<std::size_t>(parse_int(arg, line_no));
      seen_count = true;
    } else if (kw == "tree") {
      if (in_tree) fail(line_no, "nested tree block");
      ls >> arg;
      if (static_cast<std::size_t>(parse_int(arg, line_no)) != model.trees.size()) fail(line_no, "trees out of order");
      in_tree = true;
      nodes.clear();
    } else if (kw == "node" || kw == "leaf") {
      if (!in_tree) fail(line_no, kw + " outside a tree block");
      ls >> arg;
      const auto id = static_cast<std::size_t>(parse_int(arg, line_no));
      if (id != nodes.size()) fail(line_no, "node ids must be consecutive");
      const auto f = parse_fields(ls, line_no);
      TreeNode n;
      if (kw == "leaf") {
        n.weight_main = parse_real(field(f, "wt", line_no), line_no);
        n.weight_anc = parse_real(field(f, "ws", line_no), line_no);
      } else {
        n.feature = static_cast<std::int32_t>(parse_int(field(f, "feat", line_no), line_no));
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= model.n_features) {
          fail(line_no, "split feature out of range");
        }
        n.threshold = parse_real(field(f, "cut", line_no), line_no);
        const auto& d = field(f, "default", line_no);
        if (d != "L" && d != "R") fail(line_no, "default must be L or R");
        n.default_direction = d == "L" ? DefaultDirection::kLeft : DefaultDirection::kRight;
        n.left = static_cast<NodeId>(parse_int(field(f, "left", line_no), line_no));
        n.right = static_cast<NodeId>(parse_int(field(f, "right", line_no), line_no));
        if (auto it = f.find("gain"); it != f.end()) n.gain = parse_real(it->second, line_no);
      }
      nodes.push_back(n);
    } else if (kw == "end") {
      if (!in_tree) fail(line_no, "'end' outside a tree block");
      model.trees.push_back(DualTree::from_nodes(std::move(nodes)));
      nodes = {};
      in_tree = false;
    } else {
      fail(line_no, "unknown record '" + kw + "'");
    }
  }
  if (!seen_header) throw DataError(ErrorKind::kModelFormat, "empty model file");
  if (in_tree) throw DataError(ErrorKind::kModelFormat, "unterminated tree block");
  if (!seen_count || expected_trees != model.trees.size()) {
    throw DataError(ErrorKind::kModelFormat, "tree count does not match n_trees");
  }
  return model;
}

TransBoostModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(ErrorKind::kIo, "cannot open '" + path + "'");
  return parse_model(in);
}

}  // namespace transboost
