#include "hmmsb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace hmmsb::io {
namespace {

using Json = nlohmann::ordered_json;

template <class T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = text.find(sep, start);
    out.emplace_back(text.substr(start, at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool getline_stripped(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  throw InputError(source, line, what);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

Json manifest_json(const Manifest& m) {
  Json j;
  j["tool"] = "hmmsb";
  j["version"] = m.version;
  j["command"] = m.command;
  j["invocation"] = m.invocation;
  j["seed"] = m.seed;
  return j;
}

std::string join_path(std::span<const int> labels, char sep) {
  std::string out;
  for (std::size_t d = 0; d < labels.size(); ++d) {
    if (d) out += sep;
    out += std::to_string(labels[d]);
  }
  return out;
}

}  // namespace

std::string Manifest::comment_block(const std::string& prefix) const {
  std::string out;
  out += prefix + "tool: hmmsb " + version + "\n";
  out += prefix + "command: " + command + "\n";
  if (!invocation.empty()) out += prefix + "invocation: " + invocation + "\n";
  out += prefix + "seed: " + std::to_string(seed) + "\n";
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

// -- edge lists ---------------------------------------------------------------

DirectedNetwork read_edge_list(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<int> declared;
  bool seen_data = false;
  std::vector<std::tuple<int, int, bool, std::size_t>> rows;
  std::set<std::pair<int, int>> seen;
  int max_id = -1;

  while (getline_stripped(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(std::string_view(t).substr(1));
      if (body.rfind("n_actors:", 0) == 0) {
        int n = 0;
        if (!parse_number(trim(std::string_view(body).substr(9)), n) || n < 0) {
          fail(source, lineno, "bad n_actors declaration");
        }
        declared = n;
      }
      continue;
    }
    if (!seen_data && !std::isdigit(static_cast<unsigned char>(t[0])) && t[0] != '-' &&
        t[0] != '+') {
      seen_data = true;  // header
      continue;
    }
    seen_data = true;
    const auto f = split_fields(t);
    if (f.size() < 2 || f.size() > 3) fail(source, lineno, "expected src, dst and optional 0|1");
    int src = 0, dst = 0;
    if (!parse_number(f[0], src) || src < 0) fail(source, lineno, "bad source id '" + f[0] + "'");
    if (!parse_number(f[1], dst) || dst < 0) fail(source, lineno, "bad target id '" + f[1] + "'");
    bool present = true;
    if (f.size() == 3) {
      if (f[2] != "0" && f[2] != "1") fail(source, lineno, "edge value must be 0 or 1");
      present = f[2] == "1";
    }
    if (src == dst) fail(source, lineno, "self-loop " + f[0]);
    if (!seen.emplace(src, dst).second) {
      fail(source, lineno, "duplicate pair " + f[0] + " " + f[1]);
    }
    max_id = std::max({max_id, src, dst});
    rows.emplace_back(src, dst, present, lineno);
  }
  if (in.bad()) fail(source, 0, "read error");

  const int n = declared ? *declared : max_id + 1;
  DirectedNetwork net(n);
  for (const auto& [src, dst, present, at] : rows) {
    if (src >= n || dst >= n) {
      fail(source, at, "actor id out of range [0, " + std::to_string(n) + ")");
    }
    if (present) net.set_edge(src, dst, true);
  }
  return net;
}

DirectedNetwork read_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_edge_list(in, path.string());
}

void write_edge_list(std::ostream& out, const DirectedNetwork& network, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "# n_actors: " << network.size() << "\n";
  out << "src\tdst\n";
  for (int i = 0; i < network.size(); ++i) {
    for (int j = 0; j < network.size(); ++j) {
      if (network.edge(i, j)) out << i << '\t' << j << '\n';
    }
  }
}

std::vector<std::string> read_labels(std::istream& in, int n_actors, const std::string& source) {
  std::vector<std::string> labels(static_cast<std::size_t>(n_actors));
  std::vector<bool> have(labels.size(), false);
  for (int a = 0; a < n_actors; ++a) labels[a] = std::to_string(a);
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (getline_stripped(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const std::string id_text = trim(line.substr(0, tab));
    int id = 0;
    if (!parse_number(id_text, id)) {
      if (!seen_data) {
        seen_data = true;  // header
        continue;
      }
      fail(source, lineno, "bad actor id '" + id_text + "'");
    }
    seen_data = true;
    if (tab == std::string::npos) fail(source, lineno, "expected id<TAB>label");
    if (id < 0 || id >= n_actors) fail(source, lineno, "actor id out of range");
    if (have[id]) fail(source, lineno, "duplicate actor id " + id_text);
    have[id] = true;
    labels[id] = line.substr(tab + 1);
  }
  return labels;
}

std::vector<std::string> read_labels(const std::filesystem::path& path, int n_actors) {
  auto in = open_input(path);
  return read_labels(in, n_actors, path.string());
}

void write_labels(std::ostream& out, const std::vector<std::string>& labels,
                  const Manifest& manifest) {
  out << manifest.comment_block();
  out << "id\tlabel\n";
  for (std::size_t a = 0; a < labels.size(); ++a) out << a << '\t' << labels[a] << '\n';
}

// -- hierarchy JSON -----------------------------------------------------------

std::map<std::vector<int>, std::vector<EntrySummary>> summarize_entries(
    const CompatibilityStats& stats, const Hyperparams& hyper) {
  std::map<std::vector<int>, std::vector<EntrySummary>> out;
  for (const auto& [key, counts] : stats.map()) {
    out[key.parent].push_back(
        {key.donor_child, key.receiver_child, counts, point_estimate(counts, hyper)});
  }
  for (auto& [parent, list] : out) {
    std::sort(list.begin(), list.end(), [](const EntrySummary& a, const EntrySummary& b) {
      return std::pair(a.donor_child, a.receiver_child) < std::pair(b.donor_child, b.receiver_child);
    });
  }
  return out;
}

void write_hierarchy(std::ostream& out, const HierarchyDocument& doc, const Manifest& manifest) {
  const auto tree = HierarchyTree::build(doc.paths);
  std::function<Json(std::size_t)> node_json = [&](std::size_t idx) {
    const auto& node = tree.nodes()[idx];
    Json j;
    j["path_prefix"] = node.prefix;
    j["size"] = node.occupancy;
    j["actor_ids"] = node.actors;
    if (auto it = doc.entries.find(node.prefix); it != doc.entries.end()) {
      Json entries = Json::array();
      for (const auto& e : it->second) {
        entries.push_back({{"donor_child", e.donor_child},
                           {"receiver_child", e.receiver_child},
                           {"ones", e.counts.ones},
                           {"zeros", e.counts.zeros},
                           {"estimate", e.estimate}});
      }
      j["entries"] = std::move(entries);
    }
    Json children = Json::array();
    for (std::size_t c : node.children) children.push_back(node_json(c));
    j["children"] = std::move(children);
    return j;
  };
  Json doc_json;
  doc_json["format"] = "hmmsb-hierarchy";
  doc_json["format_version"] = 1;
  doc_json["manifest"] = manifest_json(manifest);
  doc_json["n_actors"] = doc.paths.size();
  doc_json["depth"] = doc.paths.depth();
  if (!doc.labels.empty()) doc_json["labels"] = doc.labels;
  doc_json["root"] = node_json(0);
  out << doc_json.dump() << '\n';
}

HierarchyDocument read_hierarchy(std::istream& in, const std::string& source) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(source, 0, std::string("invalid JSON: ") + e.what());
  }
  auto bad = [&](const std::string& what) { fail(source, 0, what); };
  try {
    if (j.value("format", "") != "hmmsb-hierarchy") bad("not an hmmsb hierarchy file");
    const int n = j.at("n_actors").get<int>();
    const int depth = j.at("depth").get<int>();
    if (n < 1 || depth < 1) bad("n_actors and depth must be positive");

    HierarchyDocument doc;
    doc.paths = PathAssignment(n, depth);
    std::vector<bool> placed(static_cast<std::size_t>(n), false);
    if (j.contains("labels")) {
      doc.labels = j.at("labels").get<std::vector<std::string>>();
      if (static_cast<int>(doc.labels.size()) != n) bad("labels must list every actor");
    }

    std::function<std::vector<int>(const Json&, const std::vector<int>&)> walk =
        [&](const Json& node, const std::vector<int>& prefix) {
          const auto where = "node [" + join_path(prefix, ',') + "]";
          if (node.at("path_prefix").get<std::vector<int>>() != prefix) {
            bad(where + ": path_prefix does not match its position");
          }
          auto actors = node.at("actor_ids").get<std::vector<int>>();
          if (node.at("size").get<int>() != static_cast<int>(actors.size())) {
            bad(where + ": size does not match actor_ids");
          }
          if (node.contains("entries")) {
            for (const auto& e : node.at("entries")) {
              EdgeCounts c{e.at("ones").get<std::int64_t>(), e.at("zeros").get<std::int64_t>()};
              doc.entries[prefix].push_back({e.at("donor_child").get<int>(),
                                             e.at("receiver_child").get<int>(), c,
                                             e.at("estimate").get<double>()});
            }
          }
          const auto& children = node.at("children");
          if (static_cast<int>(prefix.size()) == depth) {
            if (!children.empty()) bad(where + ": leaf below the maximum depth");
            for (int a : actors) {
              if (a < 0 || a >= n) bad(where + ": actor id out of range");
              if (placed[a]) bad(where + ": actor " + std::to_string(a) + " placed twice");
              placed[a] = true;
              doc.paths.set_path(a, prefix);
            }
          } else {
            if (children.empty() && !actors.empty()) bad(where + ": populated node has no children");
            std::vector<int> below;
            std::set<int> labels;
            for (const auto& child : children) {
              const auto p = child.at("path_prefix").get<std::vector<int>>();
              if (p.size() != prefix.size() + 1) bad(where + ": child prefix has wrong length");
              const int label = p.back();
              if (label < 1 || !labels.insert(label).second) bad(where + ": bad child label");
              auto sub = prefix;
              sub.push_back(label);
              auto got = walk(child, sub);
              below.insert(below.end(), got.begin(), got.end());
            }
            std::sort(below.begin(), below.end());
            auto sorted = actors;
            std::sort(sorted.begin(), sorted.end());
            if (below != sorted) bad(where + ": children do not partition the node's actors");
          }
          return actors;
        };
    walk(j.at("root"), {});
    if (std::find(placed.begin(), placed.end(), false) != placed.end()) {
      bad("some actors are not placed in the tree");
    }
    return doc;
  } catch (const Json::exception& e) {
    fail(source, 0, std::string("malformed hierarchy: ") + e.what());
  }
}

HierarchyDocument read_hierarchy(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_hierarchy(in, path.string());
}

// -- samples ------------------------------------------------------------------

std::string encode_levels(const LevelAssignments& levels, Side side) {
  std::string out;
  int run_level = 0;
  std::int64_t run = 0;
  auto flush = [&] {
    if (run == 0) return;
    if (!out.empty()) out += ',';
    out += std::to_string(run_level) + "x" + std::to_string(run);
  };
  for (int i = 0; i < levels.size(); ++i) {
    for (int j = 0; j < levels.size(); ++j) {
      if (i == j) continue;
      const int z = side == Side::kDonor ? levels.donor(i, j) : levels.receiver(i, j);
      if (z != run_level) {
        flush();
        run_level = z;
        run = 0;
      }
      ++run;
    }
  }
  flush();
  return out.empty() ? "-" : out;
}

void decode_levels(const std::string& text, LevelAssignments& levels, Side side, int max_level) {
  const int n = levels.size();
  const std::int64_t slots = static_cast<std::int64_t>(n) * (n - 1);
  std::int64_t pos = 0;
  auto put = [&](int z) {
    const int i = static_cast<int>(pos / (n - 1));
    int j = static_cast<int>(pos % (n - 1));
    j += j >= i;
    if (side == Side::kDonor) {
      levels.set_donor(i, j, z);
    } else {
      levels.set_receiver(i, j, z);
    }
    ++pos;
  };
  if (text != "-") {
    for (const auto& run : split_on(text, ',')) {
      const auto x = run.find('x');
      int z = 0;
      std::int64_t count = 0;
      if (x == std::string::npos || !parse_number(std::string_view(run).substr(0, x), z) ||
          !parse_number(std::string_view(run).substr(x + 1), count) || count <= 0) {
        throw InputError("bad level run '" + run + "'");
      }
      if (z < 1 || z > max_level) throw InputError("level " + std::to_string(z) + " out of range");
      if (pos + count > slots) throw InputError("level runs exceed the number of pairs");
      for (std::int64_t c = 0; c < count; ++c) put(z);
    }
  }
  if (pos != slots) throw InputError("level runs cover fewer pairs than the network has");
}

void write_samples(std::ostream& out, const SamplesFile& file, const Manifest& manifest) {
  const auto& h = file.header;
  out << "#hmmsb-samples 1\n";
  out << manifest.comment_block();
  out << "n_actors\t" << h.n_actors << '\n';
  out << "depth\t" << h.hyper.max_depth << '\n';
  out << "gamma\t" << format_double(h.hyper.gamma) << '\n';
  out << "m\t" << format_double(h.hyper.m) << '\n';
  out << "pi\t" << format_double(h.hyper.pi) << '\n';
  out << "lambda1\t" << format_double(h.hyper.lambda1) << '\n';
  out << "lambda2\t" << format_double(h.hyper.lambda2) << '\n';
  out << "seed\t" << h.seed << '\n';
  out << "iteration\tlog_likelihood\tpaths\tdonor_levels\treceiver_levels\n";
  for (const auto& s : file.samples) {
    out << s.iteration << '\t' << format_double(s.log_likelihood) << '\t';
    for (int a = 0; a < s.paths.size(); ++a) {
      if (a) out << ';';
      out << join_path(s.paths.path(a), ',');
    }
    out << '\t' << encode_levels(s.levels, Side::kDonor) << '\t'
        << encode_levels(s.levels, Side::kReceiver) << '\n';
  }
}

SamplesFile read_samples(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!getline_stripped(in, line) || line != "#hmmsb-samples 1") {
    fail(source, 1, "not an hmmsb samples file (expected '#hmmsb-samples 1')");
  }
  ++lineno;
  SamplesFile file;
  std::map<std::string, std::string> header;
  bool in_records = false;
  while (getline_stripped(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_on(line, '\t');
    if (!in_records) {
      if (f[0] == "iteration") {
        in_records = true;
        auto need = [&](const char* key) -> const std::string& {
          auto it = header.find(key);
          if (it == header.end()) fail(source, lineno, std::string("missing header field ") + key);
          return it->second;
        };
        auto& h = file.header;
        double* doubles[] = {&h.hyper.gamma, &h.hyper.m, &h.hyper.pi, &h.hyper.lambda1,
                             &h.hyper.lambda2};
        const char* names[] = {"gamma", "m", "pi", "lambda1", "lambda2"};
        for (int k = 0; k < 5; ++k) {
          if (!parse_number(need(names[k]), *doubles[k])) {
            fail(source, lineno, std::string("bad header value for ") + names[k]);
          }
        }
        if (!parse_number(need("n_actors"), h.n_actors) || h.n_actors < 1 ||
            !parse_number(need("depth"), h.hyper.max_depth) || !parse_number(need("seed"), h.seed)) {
          fail(source, lineno, "bad n_actors, depth or seed");
        }
        try {
          h.hyper.validate();
        } catch (const UsageError& e) {
          fail(source, lineno, e.what());
        }
        continue;
      }
      if (f.size() != 2) fail(source, lineno, "expected key<TAB>value");
      header[f[0]] = f[1];
      continue;
    }
    if (f.size() != 5) fail(source, lineno, "expected 5 tab-separated fields");
    const int n = file.header.n_actors;
    const int depth = file.header.hyper.max_depth;
    ChainSample s;
    if (!parse_number(f[0], s.iteration) || s.iteration < 0) fail(source, lineno, "bad iteration");
    if (!parse_number(f[1], s.log_likelihood)) fail(source, lineno, "bad log-likelihood");
    const auto actors = split_on(f[2], ';');
    if (static_cast<int>(actors.size()) != n) fail(source, lineno, "wrong number of paths");
    s.paths = PathAssignment(n, depth);
    for (int a = 0; a < n; ++a) {
      const auto labels = split_on(actors[a], ',');
      if (static_cast<int>(labels.size()) != depth) fail(source, lineno, "path has wrong depth");
      for (int d = 0; d < depth; ++d) {
        if (!parse_number(labels[d], s.paths.path(a)[d]) || s.paths.path(a)[d] < 1) {
          fail(source, lineno, "bad branch label '" + labels[d] + "'");
        }
      }
    }
    s.levels = LevelAssignments(n);
    try {
      decode_levels(f[3], s.levels, Side::kDonor, depth);
      decode_levels(f[4], s.levels, Side::kReceiver, depth);
    } catch (const InputError& e) {
      fail(source, lineno, e.what());
    }
    file.samples.push_back(std::move(s));
  }
  if (!in_records) fail(source, lineno, "missing record header line");
  return file;
}

SamplesFile read_samples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_samples(in, path.string());
}

// -- CSV ----------------------------------------------------------------------

void write_trace(std::ostream& out, const std::vector<double>& trace, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "iteration,log_likelihood\n";
  for (std::size_t t = 0; t < trace.size(); ++t) out << t + 1 << ',' << format_double(trace[t]) << '\n';
}

void write_f1(std::ostream& out, const F1Report& report, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "level,tp,fp,fn,tn,precision,recall,f1\n";
  for (std::size_t k = 0; k < report.per_level.size(); ++k) {
    const auto& c = report.per_level[k];
    out << k + 1 << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',' << c.tn << ','
        << format_double(c.precision) << ',' << format_double(c.recall) << ','
        << format_double(c.f1) << '\n';
  }
  out << "total,,,,,,," << format_double(report.total) << '\n';
}

void write_grid(std::ostream& out, const std::vector<GridCell>& cells, std::size_t selected,
                const Manifest& manifest) {
  out << manifest.comment_block();
  out << "cell,gamma,m,pi,lambda1,lambda2,log_marginal,std_error,n_samples,selected\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& h = cells[c].hyper;
    const auto& e = cells[c].estimate;
    out << c << ',' << format_double(h.gamma) << ',' << format_double(h.m) << ','
        << format_double(h.pi) << ',' << format_double(h.lambda1) << ','
        << format_double(h.lambda2) << ',' << format_double(e.log_estimate) << ','
        << format_double(e.std_error) << ',' << e.n_samples << ',' << (c == selected) << '\n';
  }
}

void write_heldout(std::ostream& out, const HeldoutResult& result, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "split,n_train,n_test,gamma,lambda1,lambda2,train_log_marginal,train_std_error,"
         "test_log_marginal,test_std_error\n";
  for (const auto& s : result.splits) {
    out << s.index << ',' << s.train.size() << ',' << s.test.size() << ','
        << format_double(s.selected.gamma) << ',' << format_double(s.selected.lambda1) << ','
        << format_double(s.selected.lambda2) << ',' << format_double(s.train_estimate.log_estimate)
        << ',' << format_double(s.train_estimate.std_error) << ','
        << format_double(s.test_estimate.log_estimate) << ','
        << format_double(s.test_estimate.std_error) << '\n';
  }
}

void write_heldout_cells(std::ostream& out, const HeldoutResult& result, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "split,cell,gamma,lambda1,lambda2,log_marginal,std_error,selected\n";
  for (const auto& s : result.splits) {
    const std::size_t best = select_best(s.cells);
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
      const auto& cell = s.cells[c];
      out << s.index << ',' << c << ',' << format_double(cell.hyper.gamma) << ','
          << format_double(cell.hyper.lambda1) << ',' << format_double(cell.hyper.lambda2) << ','
          << format_double(cell.estimate.log_estimate) << ','
          << format_double(cell.estimate.std_error) << ',' << (c == best) << '\n';
    }
  }
}

void write_heldout_summary(std::ostream& out, const HeldoutResult& result,
                           const Manifest& manifest) {
  double var = 0.0;
  const double mean = result.mean_test_log_likelihood;
  for (const auto& s : result.splits) {
    var += (s.test_estimate.log_estimate - mean) * (s.test_estimate.log_estimate - mean);
  }
  const std::size_t n = result.splits.size();
  out << manifest.comment_block();
  out << "metric,value\n";
  out << "splits," << n << '\n';
  out << "mean_test_log_marginal," << format_double(mean) << '\n';
  out << "sd_test_log_marginal," << format_double(n > 1 ? std::sqrt(var / double(n - 1)) : 0.0)
      << '\n';
}

void write_b_map(std::ostream& out, const std::map<BEntryKey, double>& b, const Manifest& manifest) {
  out << manifest.comment_block();
  out << "level,parent,donor_child,receiver_child,probability\n";
  for (const auto& [key, p] : b) {
    out << key.level() << ',' << join_path(key.parent, '.') << ',' << key.donor_child << ','
        << key.receiver_child << ',' << format_double(p) << '\n';
  }
}

std::vector<int> block_order(const PathAssignment& paths) {
  std::vector<int> order(static_cast<std::size_t>(paths.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    auto pa = paths.path(a), pb = paths.path(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  return order;
}

void write_permuted_adjacency(std::ostream& out, const DirectedNetwork& network,
                              const PathAssignment& paths, const Manifest& manifest) {
  const auto order = block_order(paths);
  out << manifest.comment_block();
  out << "actor,path";
  for (int b : order) out << ',' << b;
  out << '\n';
  for (int a : order) {
    out << a << ',' << join_path(paths.path(a), '.');
    for (int b : order) out << ',' << (network.edge(a, b) ? 1 : 0);
    out << '\n';
  }
}

// -- DOT ----------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

void write_hierarchy_dot(std::ostream& out, const PathAssignment& paths, const Manifest& manifest) {
  const auto tree = HierarchyTree::build(paths);
  const double total = std::max(1, paths.size());
  out << manifest.comment_block("// ");
  out << "digraph hierarchy {\n";
  out << "  node [shape=circle, style=filled, fillcolor=\"#eeeeee\", fixedsize=true];\n";
  for (std::size_t v = 0; v < tree.nodes().size(); ++v) {
    const auto& node = tree.nodes()[v];
    const std::string name = node.prefix.empty() ? "root" : join_path(node.prefix, '.');
    const double width = 0.4 + 1.6 * std::sqrt(node.occupancy / total);
    out << "  n" << v << " [label=\"" << name << "\\n" << node.occupancy
        << "\", width=" << format_double(std::round(width * 100) / 100) << "];\n";
  }
  for (std::size_t v = 0; v < tree.nodes().size(); ++v) {
    for (std::size_t c : tree.nodes()[v].children) out << "  n" << v << " -> n" << c << ";\n";
  }
  out << "}\n";
}

void write_network_dot(std::ostream& out, const DirectedNetwork& network,
                       const PathAssignment& paths, const LevelAssignments& levels,
                       const Manifest& manifest) {
  const auto tree = HierarchyTree::build(paths);
  // palette slot per community, numbered in tree order within each level
  std::map<std::vector<int>, std::size_t> color;
  std::vector<std::size_t> next(static_cast<std::size_t>(paths.depth()) + 1, 0);
  for (const auto& node : tree.nodes()) {
    if (!node.prefix.empty()) color[node.prefix] = next[node.prefix.size()]++;
  }
  auto community_color = [&](int actor, int level) {
    auto p = paths.path(actor);
    const std::vector<int> prefix(p.begin(), p.begin() + level);
    return kPalette[color.at(prefix) % std::size(kPalette)];
  };
  out << manifest.comment_block("// ");
  out << "digraph network {\n";
  out << "  node [shape=circle, style=filled];\n";
  for (int a = 0; a < network.size(); ++a) {
    const std::string label = network.labels().empty() ? std::to_string(a) : network.labels()[a];
    out << "  " << a << " [label=\"" << dot_escape(label) << "\", fillcolor=\""
        << community_color(a, 1) << "\"];\n";
  }
  for (int i = 0; i < network.size(); ++i) {
    for (int j = 0; j < network.size(); ++j) {
      if (!network.edge(i, j)) continue;
      const int z = std::min(levels.donor(i, j), levels.receiver(i, j));
      const char* style = z == 1 ? "solid" : z == 2 ? "dashed" : "dotted";
      out << "  " << i << " -> " << j << " [color=\"" << community_color(i, z) << ";0.5:"
          << community_color(j, z) << "\", style=" << style << "];\n";
    }
  }
  out << "}\n";
}

// -- config -------------------------------------------------------------------

std::map<std::string, std::string> read_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (getline_stripped(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(source, lineno, "expected key=value");
    std::string key = trim(t.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) fail(source, lineno, "empty key");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

// -- transactional output -------------------------------------------------------

OutputSet::~OutputSet() {
  if (committed_) return;
  for (std::size_t k = 0; k < streams_.size(); ++k) {
    streams_[k]->close();
    std::error_code ec;
    std::filesystem::remove(targets_[k].string() + ".tmp", ec);
  }
}

std::ostream& OutputSet::open(const std::filesystem::path& path) {
  if (committed_) throw UsageError("output set already committed");
  auto stream = std::make_unique<std::ofstream>(path.string() + ".tmp", std::ios::binary);
  if (!*stream) throw UsageError("cannot write " + path.string());
  targets_.push_back(path);
  streams_.push_back(std::move(stream));
  return *streams_.back();
}

void OutputSet::commit() {
  for (std::size_t k = 0; k < streams_.size(); ++k) {
    streams_[k]->flush();
    if (!*streams_[k]) throw UsageError("error writing " + targets_[k].string());
    streams_[k]->close();
  }
  for (const auto& target : targets_) {
    std::filesystem::rename(target.string() + ".tmp", target);
  }
  committed_ = true;
}

}  // namespace hmmsb::io
