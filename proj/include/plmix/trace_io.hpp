#ifndef PLMIX_TRACE_IO_HPP
#define PLMIX_TRACE_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "plmix/gibbs.hpp"
#include "plmix/relabel.hpp"

namespace plmix {

/// Shortest round-trippable text for a double (17 significant digits).
std::string format_exact(double x);
/// Fixed 6-significant-digit text used in human-facing tables.
std::string format_sig6(double x);

/// Chain trace: a "# plmix-chain v1 G=.. K=.. N=.." line, a column header,
/// then one row per retained draw (p row-major, omega, deviance).
/// `permutations`, when given, adds 1-based perm_g columns.
void write_chain_csv(std::ostream& out, const Chain& chain,
                     const std::vector<std::vector<int>>* permutations = nullptr);

/// Reads a trace written by write_chain_csv; labels are left empty.
/// Throws InputError on a malformed or unsupported file.
Chain read_chain_csv(std::istream& in);

/// One row per retained draw, 1-based component labels per unit.
void write_labels_csv(std::ostream& out, const Chain& chain);
void read_labels_csv(std::istream& in, Chain& chain);

}  // namespace plmix

#endif  // PLMIX_TRACE_IO_HPP
