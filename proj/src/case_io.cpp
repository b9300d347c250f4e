#include "linerank/case_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "linerank/csv.hpp"
#include "linerank/errors.hpp"

namespace linerank {
namespace {

// MATPOWER column positions (0-based).
constexpr std::size_t kBusId = 0, kBusPd = 2, kBusColumns = 3;
constexpr std::size_t kGenBus = 0, kGenPg = 1, kGenColumns = 2;
constexpr std::size_t kBrFrom = 0, kBrTo = 1, kBrX = 3, kBrRateA = 5, kBrTap = 8, kBrColumns = 9;

struct MatrixBlock {
  std::size_t line = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
};

struct ScalarValue {
  std::size_t line = 0;
  std::string text;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    else if (line[i] == '%' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool is_identifier_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Matches `mpc.<name> = <rest>`; returns nothing for any other statement.
std::optional<std::pair<std::string, std::string_view>> match_assignment(std::string_view s) {
  s = trim(s);
  constexpr std::string_view prefix = "mpc.";
  if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
  s.remove_prefix(prefix.size());
  std::size_t n = 0;
  while (n < s.size() && is_identifier_char(s[n])) ++n;
  if (n == 0) return std::nullopt;
  std::string name(s.substr(0, n));
  s = trim(s.substr(n));
  if (s.empty() || s.front() != '=') return std::nullopt;
  return std::make_pair(std::move(name), trim(s.substr(1)));
}

double parse_number(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("invalid numeric token '" + std::string(token) + "'", line);
  return value;
}

class MatFileReader {
public:
  void read(std::istream& in) {
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      consume_line(strip_comment(raw), lineno);
    }
    if (state_ == State::matrix)
      throw ParseError("unterminated matrix block 'mpc." + current_ + "'", blocks_[current_].line);
    if (state_ == State::cell)
      throw ParseError("unterminated cell block 'mpc." + current_ + "'", cell_line_);
  }

  const MatrixBlock& block(const std::string& name) const {
    auto it = blocks_.find(name);
    if (it == blocks_.end()) throw ParseError("missing matrix block 'mpc." + name + "'", 0);
    return it->second;
  }

  double scalar(const std::string& name) const {
    auto it = scalars_.find(name);
    if (it == scalars_.end()) throw ParseError("missing scalar 'mpc." + name + "'", 0);
    return parse_number(trim(it->second.text), it->second.line);
  }

private:
  enum class State { top, matrix, cell };

  void consume_line(std::string_view s, std::size_t lineno) {
    bool continued = false;
    while (true) {
      if (state_ == State::top) {
        auto assignment = match_assignment(s);
        if (!assignment) return;  // function header, blank line, stray ';'
        auto& [name, rest] = *assignment;
        if (blocks_.count(name) || scalars_.count(name))
          throw ParseError("duplicate definition of 'mpc." + name + "'", lineno);
        if (!rest.empty() && rest.front() == '[') {
          state_ = State::matrix;
          current_ = name;
          blocks_[name].line = lineno;
          s = rest.substr(1);
          continue;
        }
        if (!rest.empty() && rest.front() == '{') {
          state_ = State::cell;
          current_ = name;
          cell_line_ = lineno;
          s = rest.substr(1);
          continue;
        }
        auto end = rest.find(';');
        scalars_[name] = ScalarValue{lineno, std::string(rest.substr(0, end))};
        return;
      }
      if (state_ == State::cell) {
        auto close = s.find('}');
        if (close == std::string_view::npos) return;
        state_ = State::top;
        s = s.substr(close + 1);
        continue;
      }

      // Matrix body: whitespace/comma separated numbers, ';' or newline ends a row, ']' the block.
      MatrixBlock& blk = blocks_[current_];
      std::size_t i = 0;
      bool closed = false;
      while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
          ++i;
        } else if (c == ';') {
          flush_row(blk);
          ++i;
        } else if (c == ']') {
          flush_row(blk);
          ++i;
          closed = true;
          break;
        } else if (s.substr(i, 3) == "...") {
          continued = true;
          break;
        } else {
          std::size_t j = i;
          while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',' &&
                 s[j] != ';' && s[j] != ']')
            ++j;
          if (row_.empty()) row_line_ = lineno;
          row_.push_back(parse_number(s.substr(i, j - i), lineno));
          i = j;
        }
      }
      if (closed) {
        state_ = State::top;
        s = s.substr(i);
        continue;
      }
      if (!continued) flush_row(blk);
      return;
    }
  }

  void flush_row(MatrixBlock& blk) {
    if (row_.empty()) return;
    if (!blk.rows.empty() && blk.rows.front().size() != row_.size())
      throw ParseError("row has " + std::to_string(row_.size()) + " columns, expected " +
                           std::to_string(blk.rows.front().size()) + " in 'mpc." + current_ + "'",
                       row_line_);
    blk.rows.push_back(std::move(row_));
    blk.row_lines.push_back(row_line_);
    row_.clear();
  }

  State state_ = State::top;
  std::string current_;
  std::size_t cell_line_ = 0;
  std::vector<double> row_;
  std::size_t row_line_ = 0;
  std::map<std::string, MatrixBlock> blocks_;
  std::map<std::string, ScalarValue> scalars_;
};

void require_columns(const MatrixBlock& blk, std::size_t needed, const char* name) {
  if (blk.rows.empty()) throw ParseError(std::string("empty block 'mpc.") + name + "'", blk.line);
  if (blk.rows.front().size() < needed)
    throw ParseError(std::string("'mpc.") + name + "' needs at least " + std::to_string(needed) +
                         " columns, found " + std::to_string(blk.rows.front().size()),
                     blk.row_lines.front());
}

int as_bus_id(double v, std::size_t line) {
  if (!std::isfinite(v) || v != std::floor(v) || v < 1 || v > 1e9)
    throw ParseError("bus number must be a positive integer, got " + csv::format(v), line);
  return static_cast<int>(v);
}

}  // namespace

GridCase parse_case(std::istream& in) {
  MatFileReader reader;
  reader.read(in);

  GridCase grid;
  grid.base_mva = reader.scalar("baseMVA");

  const MatrixBlock& bus = reader.block("bus");
  require_columns(bus, kBusColumns, "bus");
  for (std::size_t r = 0; r < bus.rows.size(); ++r) {
    Bus b;
    b.id = as_bus_id(bus.rows[r][kBusId], bus.row_lines[r]);
    b.demand = bus.rows[r][kBusPd];
    grid.buses.push_back(b);
  }

  const MatrixBlock& gen = reader.block("gen");
  require_columns(gen, kGenColumns, "gen");
  for (std::size_t r = 0; r < gen.rows.size(); ++r)
    grid.generators.push_back(
        Generator{as_bus_id(gen.rows[r][kGenBus], gen.row_lines[r]), gen.rows[r][kGenPg]});

  const MatrixBlock& branch = reader.block("branch");
  require_columns(branch, kBrColumns, "branch");
  for (std::size_t r = 0; r < branch.rows.size(); ++r) {
    const auto& row = branch.rows[r];
    Branch br;
    br.index = static_cast<int>(r) + 1;
    br.from_bus = as_bus_id(row[kBrFrom], branch.row_lines[r]);
    br.to_bus = as_bus_id(row[kBrTo], branch.row_lines[r]);
    br.reactance = row[kBrX];
    br.tap_ratio = row[kBrTap];
    br.rating = row[kBrRateA];
    grid.branches.push_back(br);
  }

  for (const auto& g : grid.generators)
    for (auto& b : grid.buses)
      if (b.id == g.bus) {
        b.is_stochastic = true;
        b.is_deterministic = false;
      }

  validate(grid);
  return grid;
}

GridCase parse_case(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_case(in);
}

GridCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open case file '" + path.string() + "'");
  return parse_case(in);
}

std::unordered_map<int, std::size_t> bus_positions(const GridCase& grid) {
  std::unordered_map<int, std::size_t> pos;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) pos.emplace(grid.buses[i].id, i);
  return pos;
}

void validate(const GridCase& grid) {
  if (!(grid.base_mva > 0) || !std::isfinite(grid.base_mva))
    throw ValidationError("baseMVA must be positive");
  if (grid.buses.size() < 2) throw ValidationError("a case needs at least 2 buses");
  if (grid.branches.empty()) throw ValidationError("a case needs at least 1 branch");

  std::unordered_map<int, std::size_t> pos;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    const Bus& b = grid.buses[i];
    if (!pos.emplace(b.id, i).second)
      throw ValidationError("duplicate bus id " + std::to_string(b.id));
    if (b.is_stochastic == b.is_deterministic)
      throw ValidationError("bus " + std::to_string(b.id) +
                            " must be exactly one of stochastic/deterministic");
  }

  for (const Generator& g : grid.generators) {
    auto it = pos.find(g.bus);
    if (it == pos.end())
      throw ValidationError("generator references unknown bus " + std::to_string(g.bus));
    if (!grid.buses[it->second].is_stochastic)
      throw ValidationError("generator bus " + std::to_string(g.bus) + " is not stochastic");
  }

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const Branch& br : grid.branches) {
    const std::string tag = "branch " + std::to_string(br.index);
    auto f = pos.find(br.from_bus);
    auto t = pos.find(br.to_bus);
    if (f == pos.end()) throw ValidationError(tag + " references unknown bus " + std::to_string(br.from_bus));
    if (t == pos.end()) throw ValidationError(tag + " references unknown bus " + std::to_string(br.to_bus));
    if (br.from_bus == br.to_bus) throw ValidationError(tag + " is a self-loop");
    if (!(br.reactance > 0)) throw ValidationError(tag + " has non-positive reactance");
    if (!(br.tap_ratio >= 0)) throw ValidationError(tag + " has negative tap ratio");
    if (!(br.rating >= 0)) throw ValidationError(tag + " has negative rating");
    edges.emplace_back(f->second, t->second);
  }
  if (!is_connected(grid.buses.size(), edges)) throw ValidationError("network is not connected");
}

void write_canonical(const GridCase& grid, std::ostream& out) {
  using csv::format;
  out << "function mpc = canonical\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << format(grid.base_mva) << ";\n\n";
  out << "%\tbus_i\ttype\tPd\n";
  out << "mpc.bus = [\n";
  for (const Bus& b : grid.buses) out << '\t' << b.id << "\t1\t" << format(b.demand) << ";\n";
  out << "];\n\n";
  out << "%\tbus\tPg\n";
  out << "mpc.gen = [\n";
  for (const Generator& g : grid.generators) out << '\t' << g.bus << '\t' << format(g.nominal_output) << ";\n";
  out << "];\n\n";
  out << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\n";
  out << "mpc.branch = [\n";
  for (const Branch& br : grid.branches) {
    out << '\t' << br.from_bus << '\t' << br.to_bus << "\t0\t" << format(br.reactance) << "\t0\t"
        << format(br.rating) << '\t' << format(br.rating) << '\t' << format(br.rating) << '\t'
        << format(br.tap_ratio) << ";\n";
  }
  out << "];\n";
}

double susceptance(const Branch& branch) {
  if (!(branch.reactance > 0) || !std::isfinite(branch.reactance))
    throw DomainError("branch " + std::to_string(branch.index) + ": reactance must be positive");
  if (!(branch.tap_ratio >= 0))
    throw DomainError("branch " + std::to_string(branch.index) + ": tap ratio must be non-negative");
  if (branch.tap_ratio == 0.0) return 1.0 / branch.reactance;
  return 1.0 / (branch.tap_ratio * branch.reactance);
}

bool is_connected(std::size_t node_count,
                  std::span<const std::pair<std::size_t, std::size_t>> edges) {
  if (node_count == 0) return false;
  std::vector<std::size_t> parent(node_count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = node_count;
  for (auto [u, v] : edges) {
    auto ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[ru] = rv;
      --components;
    }
  }
  return components == 1;
}

}  // namespace linerank
