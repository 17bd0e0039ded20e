#include "lpvmpc/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lpvmpc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw CsvError("not a number: '" + s + "'", line);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  return in;
}

}  // namespace

TrajectoryCsv read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  TrajectoryCsv out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  bool has_v = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    const std::vector<std::string> fields = split_csv(t);
    if (!header_seen) {
      if (fields.size() == 2 && fields[0] == "x" && fields[1] == "y") {
        has_v = false;
      } else if (fields.size() == 3 && fields[0] == "x" && fields[1] == "y" &&
                 fields[2] == "v") {
        has_v = true;
      } else {
        throw CsvError("expected header 'x,y' or 'x,y,v'", line_no);
      }
      header_seen = true;
      continue;
    }
    const std::size_t want = has_v ? 3 : 2;
    if (fields.size() != want) {
      throw CsvError("expected " + std::to_string(want) + " fields, got " +
                         std::to_string(fields.size()),
                     line_no);
    }
    out.x.push_back(parse_double(fields[0], line_no));
    out.y.push_back(parse_double(fields[1], line_no));
    if (has_v) {
      out.v.push_back(parse_double(fields[2], line_no));
    }
  }
  if (!header_seen) {
    throw CsvError("empty trajectory file", line_no == 0 ? 1 : line_no);
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Xy& xy,
                          const std::vector<double>& v) {
  std::string out = v.empty() ? "x,y\n" : "x,y,v\n";
  char buf[128];
  for (std::size_t i = 0; i < xy.x.size(); ++i) {
    if (v.empty()) {
      std::snprintf(buf, sizeof(buf), "%.9f,%.9f\n", xy.x[i], xy.y[i]);
    } else {
      std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.6f\n", xy.x[i], xy.y[i], v[i]);
    }
    out += buf;
  }
  write_text_file(path, out);
}

const char* const kRunLogHeader =
    "t,vx,vy,psi,psi_dot,X,Y,a_cmd,delta_cmd,vx_ref,psi_ref,X_ref,Y_ref,"
    "e_d,e_theta,cte,J,solver_status,cycle_ms";

std::string run_log_to_csv(const RunLog& log) {
  std::string out = kRunLogHeader;
  out += "\n";
  char buf[640];
  for (const RunRecord& r : log.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%s,%.3f\n",
                  r.t, r.truth.vx, r.truth.vy, r.truth.psi, r.truth.psi_dot, r.truth.x,
                  r.truth.y, r.a_cmd, r.delta_cmd, r.vx_ref, r.psi_ref, r.x_ref, r.y_ref, r.e_d,
                  r.e_theta, r.cte, r.cost, r.solver_status.c_str(), r.cycle_ms);
    out += buf;
  }
  return out;
}

void write_run_log_csv(const std::filesystem::path& path, const RunLog& log) {
  write_text_file(path, run_log_to_csv(log));
}

RunLog read_run_log_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  RunLog log;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    if (!header_seen) {
      if (t != kRunLogHeader) {
        throw CsvError("run-log header does not match the expected columns", line_no);
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = split_csv(t);
    if (fields.size() != 19) {
      throw CsvError("expected 19 fields, got " + std::to_string(fields.size()), line_no);
    }
    RunRecord r;
    r.t = parse_double(fields[0], line_no);
    r.truth.vx = parse_double(fields[1], line_no);
    r.truth.vy = parse_double(fields[2], line_no);
    r.truth.psi = parse_double(fields[3], line_no);
    r.truth.psi_dot = parse_double(fields[4], line_no);
    r.truth.x = parse_double(fields[5], line_no);
    r.truth.y = parse_double(fields[6], line_no);
    r.a_cmd = parse_double(fields[7], line_no);
    r.delta_cmd = parse_double(fields[8], line_no);
    r.vx_ref = parse_double(fields[9], line_no);
    r.psi_ref = parse_double(fields[10], line_no);
    r.x_ref = parse_double(fields[11], line_no);
    r.y_ref = parse_double(fields[12], line_no);
    r.e_d = parse_double(fields[13], line_no);
    r.e_theta = parse_double(fields[14], line_no);
    r.cte = parse_double(fields[15], line_no);
    r.cost = parse_double(fields[16], line_no);
    r.solver_status = fields[17];
    r.cycle_ms = parse_double(fields[18], line_no);
    r.measured = r.truth;
    log.rows.push_back(std::move(r));
  }
  if (!header_seen) {
    throw CsvError("empty run-log file", line_no == 0 ? 1 : line_no);
  }
  return log;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace lpvmpc
