#include "plmix/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "plmix/data.hpp"

namespace plmix {

namespace {

constexpr const char* kMagic = "# plmix-chain v1";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError("chain trace line " + std::to_string(line_no) +
                     ": bad number '" + text + "'");
  }
}

int header_value(const std::string& header, const std::string& key) {
  const auto pos = header.find(" " + key + "=");
  if (pos == std::string::npos) {
    throw InputError("chain trace header lacks " + key);
  }
  return std::stoi(header.substr(pos + key.size() + 2));
}

}  // namespace

std::string format_exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_sig6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_chain_csv(std::ostream& out, const Chain& chain,
                     const std::vector<std::vector<int>>* permutations) {
  const int num_g = chain.num_components;
  const int k = chain.num_items;
  out << kMagic << " G=" << num_g << " K=" << k << " N=" << chain.num_units
      << " draws=" << chain.size() << '\n';
  for (int g = 1; g <= num_g; ++g) {
    for (int i = 1; i <= k; ++i) out << 'p' << g << '_' << i << ',';
  }
  for (int g = 1; g <= num_g; ++g) out << "omega" << g << ',';
  out << "deviance";
  if (permutations != nullptr) {
    for (int g = 1; g <= num_g; ++g) out << ",perm" << g;
  }
  out << '\n';
  for (int j = 0; j < chain.size(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    for (int g = 0; g < num_g; ++g) {
      for (int i = 0; i < k; ++i) out << format_exact(chain.p[jj](g, i)) << ',';
    }
    for (int g = 0; g < num_g; ++g) out << format_exact(chain.omega[jj](g)) << ',';
    out << format_exact(chain.deviance[jj]);
    if (permutations != nullptr) {
      for (int h : (*permutations)[jj]) out << ',' << h + 1;
    }
    out << '\n';
  }
}

Chain read_chain_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind(kMagic, 0) != 0) {
    throw InputError("not a plmix chain trace (missing '" + std::string(kMagic) +
                     "' header)");
  }
  Chain chain;
  chain.num_components = header_value(header, "G");
  chain.num_items = header_value(header, "K");
  chain.num_units = header_value(header, "N");
  const int num_g = chain.num_components;
  const int k = chain.num_items;
  if (num_g < 1 || k < 2) throw InputError("chain trace header has bad shape");

  std::string line;
  std::getline(in, line);  // column names
  const std::size_t min_cols = static_cast<std::size_t>(num_g * k + num_g + 1);
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != min_cols && fields.size() != min_cols + num_g) {
      throw InputError("chain trace line " + std::to_string(line_no) +
                       ": expected " + std::to_string(min_cols) + " columns");
    }
    SupportMatrix p(num_g, k);
    Eigen::VectorXd w(num_g);
    std::size_t c = 0;
    for (int g = 0; g < num_g; ++g) {
      for (int i = 0; i < k; ++i) p(g, i) = parse_double(fields[c++], line_no);
    }
    for (int g = 0; g < num_g; ++g) w(g) = parse_double(fields[c++], line_no);
    chain.p.push_back(std::move(p));
    chain.omega.push_back(std::move(w));
    chain.deviance.push_back(parse_double(fields[c], line_no));
  }
  return chain;
}

void write_labels_csv(std::ostream& out, const Chain& chain) {
  for (const auto& labels : chain.z) {
    for (std::size_t s = 0; s < labels.size(); ++s) {
      if (s > 0) out << ',';
      out << labels[s] + 1;
    }
    out << '\n';
  }
}

void read_labels_csv(std::istream& in, Chain& chain) {
  chain.z.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::uint8_t> labels;
    for (const auto& f : split(line)) {
      const int v = static_cast<int>(parse_double(f, line_no));
      if (v < 1 || v > chain.num_components) {
        throw InputError("label file line " + std::to_string(line_no) +
                         ": label out of range");
      }
      labels.push_back(static_cast<std::uint8_t>(v - 1));
    }
    chain.z.push_back(std::move(labels));
  }
}

}  // namespace plmix
