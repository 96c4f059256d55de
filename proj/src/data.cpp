#include "plmix/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace plmix {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view field, int line_no) {
  int value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw InputError("line " + std::to_string(line_no) +
                     ": not an integer item index: '" + std::string(field) +
                     "'");
  }
  return value;
}

}  // namespace

PartialOrdering::PartialOrdering(std::vector<int> items, int num_items)
    : items_(std::move(items)) {
  if (items_.empty()) throw InputError("ordering is empty");
  if (static_cast<int>(items_.size()) > num_items - 1) {
    throw InputError("ordering of length " + std::to_string(items_.size()) +
                     " exceeds K-1 = " + std::to_string(num_items - 1));
  }
  std::vector<bool> seen(static_cast<std::size_t>(num_items), false);
  for (int item : items_) {
    if (item < 0 || item >= num_items) {
      throw InputError("item index " + std::to_string(item + 1) +
                       " out of range 1.." + std::to_string(num_items));
    }
    if (seen[static_cast<std::size_t>(item)]) {
      throw InputError("duplicate item " + std::to_string(item + 1));
    }
    seen[static_cast<std::size_t>(item)] = true;
  }
}

RankingDataset::RankingDataset(int num_items,
                               std::vector<PartialOrdering> orderings,
                               std::vector<std::string> item_labels)
    : num_items_(num_items),
      orderings_(std::move(orderings)),
      item_labels_(std::move(item_labels)) {
  if (num_items_ < 2) throw InputError("need at least K=2 items");
  if (orderings_.empty()) throw InputError("dataset has no orderings");
  if (!item_labels_.empty() &&
      static_cast<int>(item_labels_.size()) != num_items_) {
    throw InputError("expected " + std::to_string(num_items_) +
                     " item labels, got " +
                     std::to_string(item_labels_.size()));
  }
  positions_.assign(orderings_.size() * static_cast<std::size_t>(num_items_),
                    -1);
  stage_offsets_.reserve(orderings_.size() + 1);
  stage_offsets_.push_back(0);
  for (std::size_t s = 0; s < orderings_.size(); ++s) {
    const auto items = orderings_[s].items();
    for (std::size_t t = 0; t < items.size(); ++t) {
      if (items[t] >= num_items_ || static_cast<int>(items.size()) >= num_items_) {
        throw InputError("ordering " + std::to_string(s + 1) +
                         " inconsistent with K=" + std::to_string(num_items_));
      }
      positions_[s * num_items_ + items[t]] = static_cast<int>(t);
    }
    stage_offsets_.push_back(stage_offsets_.back() + items.size());
  }
}

std::vector<int> RankingDataset::lengths() const {
  std::vector<int> out;
  out.reserve(orderings_.size());
  for (const auto& o : orderings_) out.push_back(o.size());
  return out;
}

RankingDataset parse_dataset(std::string_view text,
                             std::optional<int> num_items) {
  std::optional<int> header_k;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> rows;
  std::vector<int> row_lines;

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;

    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.starts_with("K=")) {
        header_k = parse_int(trim(body.substr(2)), line_no);
      } else if (body.starts_with("labels=")) {
        labels.clear();
        for (auto f : split(body.substr(7), ',')) labels.emplace_back(f);
      }
      continue;
    }
    std::vector<int> row;
    for (auto field : split(line, ',')) {
      if (field.empty()) {
        throw InputError("line " + std::to_string(line_no) +
                         ": empty field in row");
      }
      row.push_back(parse_int(field, line_no));
    }
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }

  if (num_items && header_k && *num_items != *header_k) {
    throw InputError("K=" + std::to_string(*num_items) +
                     " conflicts with header K=" + std::to_string(*header_k));
  }
  const std::optional<int> k = num_items ? num_items : header_k;
  if (!k) throw InputError("item count K not given (flag or '# K=' header)");
  if (*k < 2) throw InputError("K must be at least 2");

  std::vector<PartialOrdering> orderings;
  orderings.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    const std::string where = "line " + std::to_string(row_lines[r]) + ": ";
    if (static_cast<int>(row.size()) > *k) {
      throw InputError(where + "row lists " + std::to_string(row.size()) +
                       " items but K=" + std::to_string(*k));
    }
    for (int& item : row) --item;
    try {
      if (static_cast<int>(row.size()) == *k) {
        // Validate the full row, then drop the implied last position.
        PartialOrdering check(std::vector<int>(row.begin(), row.end() - 1),
                              *k);
        if (std::find(row.begin(), row.end() - 1, row.back()) !=
                row.end() - 1 ||
            row.back() < 0 || row.back() >= *k) {
          throw InputError("invalid final item " +
                           std::to_string(row.back() + 1));
        }
        orderings.push_back(std::move(check));
      } else {
        orderings.emplace_back(std::move(row), *k);
      }
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  if (orderings.empty()) throw InputError("dataset has no orderings");
  return RankingDataset(*k, std::move(orderings), std::move(labels));
}

RankingDataset read_dataset(const std::filesystem::path& path,
                            std::optional<int> num_items) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str(), num_items);
}

std::string serialize_dataset(const RankingDataset& ds) {
  std::ostringstream out;
  out << "# K=" << ds.num_items() << '\n';
  if (!ds.item_labels().empty()) {
    out << "# labels=";
    for (std::size_t i = 0; i < ds.item_labels().size(); ++i) {
      out << (i ? "," : "") << ds.item_labels()[i];
    }
    out << '\n';
  }
  for (const auto& o : ds.orderings()) {
    for (int t = 0; t < o.size(); ++t) out << (t ? "," : "") << o[t] + 1;
    out << '\n';
  }
  return out.str();
}

namespace {

// Adds one unit's contribution to top-1 counts and the pair matrix. An item
// ranked at position a beats every item ranked later and every unranked item.
void accumulate_unit(const RankingDataset& ds, int s, Eigen::VectorXd& top1,
                     Eigen::MatrixXd& pairs) {
  const int k = ds.num_items();
  const auto& o = ds.ordering(s);
  top1(o[0]) += 1.0;
  for (int t = 0; t < o.size(); ++t) {
    const int winner = o[t];
    for (int j = 0; j < k; ++j) {
      if (j == winner) continue;
      const int pos = ds.position(s, j);
      if (pos < 0 || pos > t) pairs(winner, j) += 1.0;
    }
  }
}

}  // namespace

Eigen::VectorXd top1_frequencies(const RankingDataset& ds) {
  Eigen::VectorXd top1 = Eigen::VectorXd::Zero(ds.num_items());
  for (int s = 0; s < ds.num_units(); ++s) top1(ds.ordering(s)[0]) += 1.0;
  return top1;
}

Eigen::MatrixXd paired_comparison_matrix(const RankingDataset& ds) {
  const int k = ds.num_items();
  Eigen::VectorXd top1 = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd pairs = Eigen::MatrixXd::Zero(k, k);
  for (int s = 0; s < ds.num_units(); ++s) accumulate_unit(ds, s, top1, pairs);
  return pairs;
}

std::map<int, Stratum> conditional_summaries(const RankingDataset& ds) {
  const int k = ds.num_items();
  std::map<int, Stratum> strata;
  for (int s = 0; s < ds.num_units(); ++s) {
    auto [it, inserted] = strata.try_emplace(ds.length(s));
    Stratum& st = it->second;
    if (inserted) {
      st.top1 = Eigen::VectorXd::Zero(k);
      st.pairs = Eigen::MatrixXd::Zero(k, k);
    }
    ++st.count;
    accumulate_unit(ds, s, st.top1, st.pairs);
  }
  for (auto& [m, st] : strata) st.pair_totals = st.pairs + st.pairs.transpose();
  return strata;
}

SummaryStats summarize_dataset(const RankingDataset& ds) {
  SummaryStats stats;
  stats.by_length = conditional_summaries(ds);
  const int k = ds.num_items();
  stats.top1 = Eigen::VectorXd::Zero(k);
  stats.pairs = Eigen::MatrixXd::Zero(k, k);
  for (const auto& [m, st] : stats.by_length) {
    stats.top1 += st.top1;
    stats.pairs += st.pairs;
  }
  stats.pair_totals = stats.pairs + stats.pairs.transpose();
  return stats;
}

Eigen::VectorXd average_ranks(const RankingDataset& ds) {
  const int k = ds.num_items();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(k);
  for (int s = 0; s < ds.num_units(); ++s) {
    const int n = ds.length(s);
    const double midrank = (n + 1 + k) / 2.0;
    for (int i = 0; i < k; ++i) {
      const int pos = ds.position(s, i);
      total(i) += pos >= 0 ? pos + 1.0 : midrank;
    }
  }
  return total / ds.num_units();
}

namespace {

nlohmann::json to_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<long>(v(i)));
  }
  return out;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(static_cast<long>(m(r, c)));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

nlohmann::json summary_to_json(const SummaryStats& stats) {
  nlohmann::json out;
  out["top1"] = to_json(stats.top1);
  out["pairs"] = to_json(stats.pairs);
  out["pair_totals"] = to_json(stats.pair_totals);
  auto& by_length = out["by_length"] = nlohmann::json::object();
  for (const auto& [m, st] : stats.by_length) {
    by_length[std::to_string(m)] = {{"count", st.count},
                                    {"top1", to_json(st.top1)},
                                    {"pairs", to_json(st.pairs)},
                                    {"pair_totals", to_json(st.pair_totals)}};
  }
  return out;
}

}  // namespace plmix
