#include <fstream>
#include <regex>
#include <sstream>

#include "experts/errors.hpp"
#include "experts/exact.hpp"

namespace experts {

void write_memo(std::ostream& out, const MemoTable& table) {
  out << "b=" << table.b << " d=" << table.d << " version=1\n";
  for (const auto& [state, value] : table.values) {
    out << state.to_string(',') << ';' << to_fraction_string(value) << '\n';
  }
  if (!table.moves.empty()) {
    out << "#moves\n";
    for (const auto& [state, move] : table.moves) {
      out << state.to_string(',') << ";A=" << move.choices.to_string()
          << ";dec=" << move.dec.to_levels_string() << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ';')) out.push_back(field);
  if (!line.empty() && line.back() == ';') out.emplace_back();
  return out;
}

State parse_row_state(const std::string& text, int b, std::size_t line) {
  try {
    State s = parse_state(text, ',');
    require_valid(s, b);
    return s;
  } catch (const DomainError& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

MemoTable read_memo(std::istream& in) {
  MemoTable table;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(1, "empty memo file");
  ++line_no;
  static const std::regex header(R"(b=(\d+) d=(\d+) version=(\d+))");
  std::smatch m;
  if (!std::regex_match(line, m, header)) {
    throw ParseError(line_no, "expected header 'b=<int> d=<int> version=1', got '" + line + "'");
  }
  if (m[3] != "1") throw ParseError(line_no, "unsupported memo version " + m[3].str());
  table.b = std::stoi(m[1]);
  table.d = std::stoi(m[2]);
  if (table.d < 2) throw ParseError(line_no, "d must be at least 2");

  bool in_moves = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line == "#moves") {
      if (in_moves) throw ParseError(line_no, "duplicate #moves section");
      in_moves = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (!in_moves) {
      if (fields.size() != 2) throw ParseError(line_no, "expected 'state;num/den'");
      State s = parse_row_state(fields[0], table.b, line_no);
      Rational v;
      try {
        v = parse_fraction(fields[1]);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, e.what());
      }
      if (v < 0) throw ParseError(line_no, "negative loss value");
      if (!table.values.emplace(std::move(s), std::move(v)).second) {
        throw ParseError(line_no, "duplicate state");
      }
      continue;
    }
    if (fields.size() != 3 || fields[1].rfind("A=", 0) != 0 || fields[2].rfind("dec=", 0) != 0) {
      throw ParseError(line_no, "expected 'state;A=<choices>;dec=<levels>'");
    }
    State s = parse_row_state(fields[0], table.b, line_no);
    try {
      AdversaryMove move{parse_choice_set(fields[1].substr(2), table.d),
                         parse_levels_decomposition(fields[2].substr(4), table.d, table.b)};
      if (!move.dec.decomposes(s) || !move.dec.supported_on(move.choices)) {
        throw ParseError(line_no, "decomposition does not match the state or choice set");
      }
      table.moves.emplace(std::move(s), std::move(move));
    } catch (const DomainError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

void save_memo(const MemoTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write memo file " + path.string());
  write_memo(out, table);
  if (!out) throw std::runtime_error("failed while writing memo file " + path.string());
}

MemoTable load_memo(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read memo file " + path.string());
  return read_memo(in);
}

}  // namespace experts
