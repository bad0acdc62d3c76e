#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hmmsb/eval.hpp"
#include "hmmsb/gibbs.hpp"
#include "hmmsb/model.hpp"

namespace hmmsb::io {

inline constexpr const char* kVersion = "0.1.0";

/// Who produced a file. Written into every output so a result can be traced
/// back to the command and seed that made it.
struct Manifest {
  std::string command;
  std::string invocation;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  /// "# key: value" lines (or another comment prefix) for text formats.
  std::string comment_block(const std::string& prefix = "# ") const;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// -- edge lists ---------------------------------------------------------------

/// Reads "src<TAB>dst[<TAB>0|1]" lines. Blank lines and '#' comments are
/// skipped, except "# n_actors: N" which fixes the actor count (otherwise
/// max id + 1). A first line that does not start with a digit is a header.
/// `source` prefixes diagnostics.
DirectedNetwork read_edge_list(std::istream& in, const std::string& source = "edge list");
DirectedNetwork read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const DirectedNetwork& network, const Manifest& manifest);

/// "id<TAB>label" sidecar; ids must be unique and within [0, n_actors).
std::vector<std::string> read_labels(std::istream& in, int n_actors,
                                     const std::string& source = "labels");
std::vector<std::string> read_labels(const std::filesystem::path& path, int n_actors);
void write_labels(std::ostream& out, const std::vector<std::string>& labels,
                  const Manifest& manifest);

// -- hierarchy JSON -----------------------------------------------------------

/// Counts of one compatibility entry under a node.
struct EntrySummary {
  int donor_child = 0;
  int receiver_child = 0;
  EdgeCounts counts;
  double estimate = 0.0;  // posterior mean, or the true value for simulated truth
};

struct HierarchyDocument {
  PathAssignment paths;
  std::vector<std::string> labels;  // optional
  /// Keyed by parent prefix.
  std::map<std::vector<int>, std::vector<EntrySummary>> entries;
};

/// Entry summaries from counts under `hyper`.
std::map<std::vector<int>, std::vector<EntrySummary>> summarize_entries(
    const CompatibilityStats& stats, const Hyperparams& hyper);

void write_hierarchy(std::ostream& out, const HierarchyDocument& doc, const Manifest& manifest);
HierarchyDocument read_hierarchy(std::istream& in, const std::string& source = "hierarchy");
HierarchyDocument read_hierarchy(const std::filesystem::path& path);

// -- samples ------------------------------------------------------------------

struct SamplesHeader {
  int n_actors = 0;
  Hyperparams hyper;
  std::uint64_t seed = 0;
};

struct SamplesFile {
  SamplesHeader header;
  std::vector<ChainSample> samples;
};

/// Line-oriented records: iteration, log-likelihood, paths, and run-length
/// encoded donor and receiver level matrices.
void write_samples(std::ostream& out, const SamplesFile& file, const Manifest& manifest);
SamplesFile read_samples(std::istream& in, const std::string& source = "samples");
SamplesFile read_samples(const std::filesystem::path& path);

/// "1x5,2x3": row-major over ordered pairs i != j.
std::string encode_levels(const LevelAssignments& levels, Side side);
void decode_levels(const std::string& text, LevelAssignments& levels, Side side, int max_level);

// -- CSV ----------------------------------------------------------------------

void write_trace(std::ostream& out, const std::vector<double>& trace, const Manifest& manifest);
void write_f1(std::ostream& out, const F1Report& report, const Manifest& manifest);
void write_grid(std::ostream& out, const std::vector<GridCell>& cells, std::size_t selected,
                const Manifest& manifest);
void write_heldout(std::ostream& out, const HeldoutResult& result, const Manifest& manifest);
void write_heldout_cells(std::ostream& out, const HeldoutResult& result, const Manifest& manifest);
void write_heldout_summary(std::ostream& out, const HeldoutResult& result,
                           const Manifest& manifest);
void write_b_map(std::ostream& out, const std::map<BEntryKey, double>& b, const Manifest& manifest);

/// Actors ordered by path (then id), and the adjacency matrix permuted so
/// communities appear as blocks.
std::vector<int> block_order(const PathAssignment& paths);
void write_permuted_adjacency(std::ostream& out, const DirectedNetwork& network,
                              const PathAssignment& paths, const Manifest& manifest);

// -- DOT ----------------------------------------------------------------------

/// Tree of communities; nodes are labeled with their sizes.
void write_hierarchy_dot(std::ostream& out, const PathAssignment& paths, const Manifest& manifest);
/// Actors colored by level-1 community. Each edge is colored tail-to-head by
/// the donor's and receiver's communities and drawn solid when it resolves at
/// level 1, dashed at level 2, dotted deeper.
void write_network_dot(std::ostream& out, const DirectedNetwork& network,
                       const PathAssignment& paths, const LevelAssignments& levels,
                       const Manifest& manifest);

// -- config -------------------------------------------------------------------

/// Flat "key=value" lines; '#' comments and blank lines ignored. Later keys
/// override earlier ones.
std::map<std::string, std::string> read_config(std::istream& in, const std::string& source = "config");

// -- transactional output -------------------------------------------------------

/// Every file is written to "<path>.tmp" and renamed into place on commit();
/// without a commit the temporaries are removed, so a failed command leaves no
/// partial outputs behind.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  std::ostream& open(const std::filesystem::path& path);
  void commit();
  const std::vector<std::filesystem::path>& paths() const noexcept { return targets_; }

 private:
  std::vector<std::filesystem::path> targets_;
  std::vector<std::unique_ptr<std::ofstream>> streams_;
  bool committed_ = false;
};

}  // namespace hmmsb::io
