#ifndef PLMIX_DATA_HPP
#define PLMIX_DATA_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace plmix {

/// Thrown for malformed input data (rows, files, flags). The CLI maps it to
/// exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A top-n ordering: distinct 0-based item indices, most preferred first.
/// A full ordering over K items has K-1 entries; the last item is implied.
class PartialOrdering {
 public:
  PartialOrdering() = default;

  /// Validates `items` against `num_items` and throws InputError on
  /// duplicates, out-of-range indices, or a length outside 1..K-1.
  PartialOrdering(std::vector<int> items, int num_items);

  std::span<const int> items() const { return items_; }
  int size() const { return static_cast<int>(items_.size()); }
  int operator[](int t) const { return items_[static_cast<std::size_t>(t)]; }
  bool operator==(const PartialOrdering&) const = default;

 private:
  std::vector<int> items_;
};

/// N partial orderings over K items. Immutable after construction; the
/// position cache backs the u_si and delta_sti indicators.
class RankingDataset {
 public:
  RankingDataset(int num_items, std::vector<PartialOrdering> orderings,
                 std::vector<std::string> item_labels = {});

  int num_items() const { return num_items_; }
  int num_units() const { return static_cast<int>(orderings_.size()); }
  const PartialOrdering& ordering(int s) const {
    return orderings_[static_cast<std::size_t>(s)];
  }
  const std::vector<PartialOrdering>& orderings() const { return orderings_; }
  const std::vector<std::string>& item_labels() const { return item_labels_; }
  int length(int s) const { return ordering(s).size(); }

  /// 0-based position of item i in unit s, or -1 when unranked.
  int position(int s, int i) const {
    return positions_[static_cast<std::size_t>(s) * num_items_ + i];
  }
  /// u_si: 1 iff item i is ranked by unit s.
  bool ranked(int s, int i) const { return position(s, i) >= 0; }
  /// delta_sti with 0-based stage t: 1 iff item i is still available at
  /// stage t (not among the first t chosen items).
  bool available(int s, int t, int i) const {
    const int pos = position(s, i);
    return pos < 0 || pos >= t;
  }

  /// Offset of unit s in flat per-stage arrays; stage_offset(N) is the total.
  std::size_t stage_offset(int s) const {
    return stage_offsets_[static_cast<std::size_t>(s)];
  }
  std::size_t total_stages() const { return stage_offsets_.back(); }

  /// Per-unit lengths n_s.
  std::vector<int> lengths() const;

 private:
  int num_items_;
  std::vector<PartialOrdering> orderings_;
  std::vector<std::string> item_labels_;
  std::vector<int> positions_;
  std::vector<std::size_t> stage_offsets_;
};

/// Observed-data summaries restricted to one ordering length m.
struct Stratum {
  long count = 0;               // N_m
  Eigen::VectorXd top1;         // r_{i,m}
  Eigen::MatrixXd pairs;        // tau_{ii',m}
  Eigen::MatrixXd pair_totals;  // T_{ii',m}
};

struct SummaryStats {
  Eigen::VectorXd top1;
  Eigen::MatrixXd pairs;
  Eigen::MatrixXd pair_totals;
  std::map<int, Stratum> by_length;  // keyed by m = 1..K-1
};

/// Parses ragged CSV text: one unit per row, 1-based items, most preferred
/// first. `#` lines are comments; `# K=<int>` and `# labels=a,b,...` headers
/// are honoured when `num_items` is not supplied. Rows listing all K items
/// are truncated to K-1 entries.
RankingDataset parse_dataset(std::string_view text,
                             std::optional<int> num_items = std::nullopt);

RankingDataset read_dataset(const std::filesystem::path& path,
                            std::optional<int> num_items = std::nullopt);

/// Inverse of parse_dataset (writes the K header and labels if any).
std::string serialize_dataset(const RankingDataset& ds);

Eigen::VectorXd top1_frequencies(const RankingDataset& ds);
Eigen::MatrixXd paired_comparison_matrix(const RankingDataset& ds);
std::map<int, Stratum> conditional_summaries(const RankingDataset& ds);
SummaryStats summarize_dataset(const RankingDataset& ds);

/// Mean rank per item; unranked items in unit s take the midrank
/// (n_s + 1 + K) / 2 of the unassigned positions.
Eigen::VectorXd average_ranks(const RankingDataset& ds);

nlohmann::json summary_to_json(const SummaryStats& stats);

}  // namespace plmix

#endif  // PLMIX_DATA_HPP
