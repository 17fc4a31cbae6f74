#include "rwt/datamodel/votes.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rwt {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::vector<VoteRecord> parse_votes(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw Error("votes CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kVotesCsvHeader) {
    throw Error(std::string("votes CSV header must be '") + kVotesCsvHeader + "'");
  }
  std::vector<VoteRecord> votes;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    const std::string where = "votes line " + std::to_string(line_no) + ": ";
    if (f.size() != 5) throw Error(where + "expected 5 fields");
    VoteRecord v;
    v.worker_id = f[0];
    v.image_id = f[1];
    try {
      v.label = parse_text_class(f[2]);
      v.vote_time_s = std::stod(f[3]);
      v.batch = std::stoi(f[4]);
    } catch (const Error& e) {
      throw Error(where + e.what());
    } catch (const std::exception&) {
      throw Error(where + "malformed number");
    }
    if (!(v.vote_time_s > 0.0)) throw Error(where + "vote_time_s must be > 0");
    votes.push_back(std::move(v));
  }
  return votes;
}

std::vector<VoteRecord> read_votes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open votes file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_votes(buf.str());
}

void write_votes(const std::filesystem::path& path,
                 const std::vector<VoteRecord>& votes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write votes file '" + path.string() + "'");
  out << kVotesCsvHeader << '\n';
  for (const auto& v : votes) {
    std::ostringstream t;
    t.precision(17);
    t << v.vote_time_s;
    out << quote_if_needed(v.worker_id) << ',' << quote_if_needed(v.image_id)
        << ',' << to_string(v.label) << ',' << t.str() << ',' << v.batch << '\n';
  }
}

std::map<std::string, std::vector<VoteRecord>> group_by_image(
    const std::vector<VoteRecord>& votes) {
  std::map<std::string, std::vector<VoteRecord>> out;
  for (const auto& v : votes) out[v.image_id].push_back(v);
  return out;
}

}  // namespace rwt
