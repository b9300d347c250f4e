#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linerank {

struct Bus {
  int id = 0;
  double demand = 0.0;  // MW
  bool is_stochastic = false;
  bool is_deterministic = true;

  bool operator==(const Bus&) const = default;
};

/// Oriented transmission line from_bus -> to_bus. A tap ratio of 0 means "no transformer";
/// a rating of 0 means "unrated".
struct Branch {
  int index = 0;  // 1-based line number
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;  // p.u.
  double tap_ratio = 0.0;
  double rating = 0.0;  // MW

  bool operator==(const Branch&) const = default;
};

struct Generator {
  int bus = 0;
  double nominal_output = 0.0;  // MW

  bool operator==(const Generator&) const = default;
};

struct GridCase {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  double base_mva = 100.0;

  std::size_t bus_count() const noexcept { return buses.size(); }
  std::size_t branch_count() const noexcept { return branches.size(); }

  bool operator==(const GridCase&) const = default;
};

/// Parses the MATPOWER m-file subset: `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch`.
/// Other blocks are skipped. Buses carrying at least one generator become stochastic.
/// Throws ParseError (with line number) or ValidationError.
GridCase parse_case(std::istream& in);
GridCase parse_case(std::string_view text);
GridCase load_case(const std::filesystem::path& path);

/// Checks every GridCase invariant, including connectivity.
void validate(const GridCase& grid);

/// Writes a minimal MATPOWER file that parses back to an identical GridCase.
void write_canonical(const GridCase& grid, std::ostream& out);

/// Line susceptance from reactance and tap ratio. Throws DomainError on non-positive reactance
/// or negative tap ratio.
double susceptance(const Branch& branch);

/// Bus id -> 0-based position in GridCase::buses.
std::unordered_map<int, std::size_t> bus_positions(const GridCase& grid);

/// Undirected connectivity of a graph on nodes 0..node_count-1 (union-find).
bool is_connected(std::size_t node_count,
                  std::span<const std::pair<std::size_t, std::size_t>> edges);

}  // namespace linerank
