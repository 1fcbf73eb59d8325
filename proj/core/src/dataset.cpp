#include "sigverify/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "sigverify/error.hpp"

namespace sigverify {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::FieldCount: return "FieldCount";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidSignature: return "InvalidSignature";
    case ErrorCode::FilenameRule: return "FilenameRule";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DegenerateExtent: return "DegenerateExtent";
    case ErrorCode::PatchTooLarge: return "PatchTooLarge";
    case ErrorCode::AlreadyRemoved: return "AlreadyRemoved";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LineSearchFailure: return "LineSearchFailure";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::PoolTooFine: return "PoolTooFine";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyTraining: return "EmptyTraining";
    case ErrorCode::ThresholdUnset: return "ThresholdUnset";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::InsufficientGenuine: return "InsufficientGenuine";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

const char* to_string(Label label) {
  switch (label) {
    case Label::genuine: return "genuine";
    case Label::skilled_forgery: return "skilled_forgery";
    case Label::random_forgery: return "random_forgery";
  }
  return "unknown";
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

long long parse_int(std::string_view token, int line_no, ErrorCode code) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    raise(code, "line " + std::to_string(line_no) + ": not an integer: '" + std::string(token) + "'");
  return value;
}

double parse_real(std::string_view token, int line_no) {
  // tolerant numeric parse for column_mapped corpora
  std::string buf(token);
  char* end = nullptr;
  double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(value))
    raise(ErrorCode::FieldCount, "line " + std::to_string(line_no) + ": not a number: '" + buf + "'");
  return value;
}

void check_signature_invariants(const RawSignature& sig) {
  if (sig.points.size() < 2)
    raise(ErrorCode::TooFewPoints, "signature has " + std::to_string(sig.points.size()) + " point(s)");
  bool any_down = false;
  for (std::size_t i = 0; i < sig.points.size(); ++i) {
    const auto& p = sig.points[i];
    if (p.pressure < 0)
      raise(ErrorCode::InvalidSignature, "negative pressure at point " + std::to_string(i));
    if (i > 0 && p.t < sig.points[i - 1].t)
      raise(ErrorCode::NonMonotoneTime,
            "timestamp decreases at point " + std::to_string(i));
    any_down = any_down || p.pen_down;
  }
  if (!any_down) raise(ErrorCode::InvalidSignature, "no pen-down point");
}

RawSignature parse_svc2004(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  int line_no = 0;

  // header: point count
  long long declared = -1;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 1)
      raise(ErrorCode::MalformedHeader, "expected a single point count on line " + std::to_string(line_no));
    declared = parse_int(tokens[0], line_no, ErrorCode::MalformedHeader);
    break;
  }
  if (declared < 0) raise(ErrorCode::MalformedHeader, "missing point count line");
  if (declared < 2) raise(ErrorCode::TooFewPoints, "declared point count " + std::to_string(declared));

  RawSignature sig;
  sig.points.reserve(static_cast<std::size_t>(declared));
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (static_cast<long long>(sig.points.size()) == declared)
      raise(ErrorCode::MalformedHeader, "more data lines than the declared " + std::to_string(declared) + " points");
    if (tokens.size() != 7)
      raise(ErrorCode::FieldCount, "line " + std::to_string(line_no) + ": expected 7 columns, got " +
                                       std::to_string(tokens.size()));
    SignaturePoint p;
    p.x = static_cast<double>(parse_int(tokens[0], line_no, ErrorCode::FieldCount));
    p.y = static_cast<double>(parse_int(tokens[1], line_no, ErrorCode::FieldCount));
    p.t = static_cast<double>(parse_int(tokens[2], line_no, ErrorCode::FieldCount));
    p.pen_down = parse_int(tokens[3], line_no, ErrorCode::FieldCount) != 0;
    p.azimuth = static_cast<double>(parse_int(tokens[4], line_no, ErrorCode::FieldCount));
    p.altitude = static_cast<double>(parse_int(tokens[5], line_no, ErrorCode::FieldCount));
    p.pressure = static_cast<double>(parse_int(tokens[6], line_no, ErrorCode::FieldCount));
    sig.points.push_back(p);
  }
  if (static_cast<long long>(sig.points.size()) != declared)
    raise(ErrorCode::MalformedHeader, "declared " + std::to_string(declared) + " points, found " +
                                          std::to_string(sig.points.size()));
  check_signature_invariants(sig);
  return sig;
}

RawSignature parse_column_mapped(const std::string& content, const DatasetLayout& layout) {
  const auto& cols = layout.column_map;
  bool has_x = false, has_y = false, has_t = false, has_pen = false, has_pressure = false;
  for (const auto& c : cols) {
    if (c == "x") has_x = true;
    else if (c == "y") has_y = true;
    else if (c == "t") has_t = true;
    else if (c == "pen_down") has_pen = true;
    else if (c == "pressure") has_pressure = true;
    else if (c != "azimuth" && c != "altitude" && c != "skip")
      raise(ErrorCode::ConfigError, "unknown column name '" + c + "'");
  }
  if (!has_x || !has_y)
    raise(ErrorCode::ConfigError, "column_map must include x and y");

  RawSignature sig;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != cols.size())
      raise(ErrorCode::FieldCount, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(cols.size()) + " columns, got " +
                                       std::to_string(tokens.size()));
    SignaturePoint p;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      double v = parse_real(tokens[i], line_no);
      const auto& name = cols[i];
      if (name == "x") p.x = v;
      else if (name == "y") p.y = v;
      else if (name == "t") p.t = v;
      else if (name == "pen_down") p.pen_down = v != 0;
      else if (name == "pressure") p.pressure = v;
      else if (name == "azimuth") p.azimuth = v;
      else if (name == "altitude") p.altitude = v;
    }
    if (!has_pressure) p.pressure = 1.0;
    if (!has_pen) p.pen_down = p.pressure > 0;
    if (!has_t) p.t = static_cast<double>(sig.points.size());
    sig.points.push_back(p);
  }
  check_signature_invariants(sig);
  return sig;
}

}  // namespace

RawSignature parse_signature(const std::string& content, const DatasetLayout& layout) {
  if (content.empty()) raise(ErrorCode::MalformedHeader, "empty file");
  switch (layout.preset) {
    case LayoutPreset::svc2004: return parse_svc2004(content);
    case LayoutPreset::column_mapped: return parse_column_mapped(content, layout);
  }
  raise(ErrorCode::ConfigError, "unknown layout preset");
}

std::string serialize_signature_svc2004(const RawSignature& sig) {
  std::ostringstream out;
  out << sig.points.size() << "\n";
  for (const auto& p : sig.points) {
    out << std::llround(p.x) << ' ' << std::llround(p.y) << ' ' << std::llround(p.t) << ' '
        << (p.pen_down ? 1 : 0) << ' ' << std::llround(p.azimuth) << ' '
        << std::llround(p.altitude) << ' ' << std::llround(p.pressure) << "\n";
  }
  return out.str();
}

std::size_t Dataset::signature_count() const {
  std::size_t n = 0;
  for (const auto& [id, u] : users) n += u.genuine.size() + u.forgeries.size();
  return n;
}

namespace {

/// Compile a glob-with-captures rule into a regex. {user} captures the id,
/// {sample} the sample number; other glob syntax is limited to * and ?.
std::regex compile_filename_rule(const std::string& rule, int& user_group, int& sample_group) {
  std::string re;
  user_group = sample_group = 0;
  int group = 0;
  for (std::size_t i = 0; i < rule.size();) {
    if (rule.compare(i, 6, "{user}") == 0) {
      re += "([A-Za-z0-9_-]+?)";
      user_group = ++group;
      i += 6;
    } else if (rule.compare(i, 8, "{sample}") == 0) {
      re += "([0-9]+)";
      sample_group = ++group;
      i += 8;
    } else {
      char c = rule[i++];
      if (c == '*') re += ".*";
      else if (c == '?') re += ".";
      else if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos) re += std::string("\\") + c;
      else re += c;
    }
  }
  if (user_group == 0 || sample_group == 0)
    raise(ErrorCode::ConfigError, "filename_rule must contain {user} and {sample}: '" + rule + "'");
  return std::regex(re);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& root, const DatasetLayout& layout,
                     bool fail_fast, std::vector<ParseFailure>* failures) {
  if (!std::filesystem::is_directory(root))
    raise(ErrorCode::IoFailure, "not a directory: " + root.string());

  int user_group = 0, sample_group = 0;
  std::regex rule = compile_filename_rule(layout.filename_rule, user_group, sample_group);

  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
    if (entry.is_regular_file()) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());  // deterministic merge order

  Dataset ds;
  for (const auto& path : paths) {
    std::smatch m;
    std::string name = path.filename().string();
    if (!std::regex_match(name, m, rule)) continue;
    try {
      std::string user = m[user_group].str();
      long sample = std::stol(m[sample_group].str());
      Label label;
      if (sample >= 1 && sample <= layout.genuine_per_user) {
        label = Label::genuine;
      } else if (sample <= layout.genuine_per_user + layout.forgery_per_user) {
        label = Label::skilled_forgery;
      } else {
        raise(ErrorCode::FilenameRule,
              "sample index " + std::to_string(sample) + " outside 1.." +
                  std::to_string(layout.genuine_per_user + layout.forgery_per_user));
      }
      RawSignature sig = parse_signature(read_file(path), layout);
      sig.user_id = user;
      sig.label = label;
      sig.source_path = path.string();
      auto& bucket = ds.users[user];
      (label == Label::genuine ? bucket.genuine : bucket.forgeries).push_back(std::move(sig));
    } catch (const Error& e) {
      if (fail_fast) throw Error(e.code(), path.string() + ": " + e.what());
      if (failures) failures->push_back({path.string(), e.what()});
    }
  }
  if (ds.users.empty())
    raise(ErrorCode::EmptyDataset, "no files matching '" + layout.filename_rule + "' under " + root.string());
  return ds;
}

}  // namespace sigverify
