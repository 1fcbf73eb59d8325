#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sigverify/types.hpp"

namespace sigverify {

enum class LayoutPreset { svc2004, column_mapped };

/// How a dataset directory maps onto users, labels and point fields.
///
/// The svc2004 preset is fixed: line 1 holds the point count, then one point
/// per line as 7 whitespace-separated integers in the order
///   X Y timestamp button azimuth altitude pressure
/// with button 0 = pen up, 1 = pen down.
///
/// column_mapped covers corpora whose file syntax is undocumented: every
/// non-empty line carries one point, columns named by `column_map`. x and y
/// are required; missing pen_down is synthesized as pressure > 0, missing t
/// as the sample index, missing pressure as constant 1. A column named
/// "skip" is parsed and discarded.
struct DatasetLayout {
  LayoutPreset preset = LayoutPreset::svc2004;
  std::vector<std::string> column_map;

  /// Filename pattern binding user id and sample number: {user} captures the
  /// id, {sample} the 1-based sample index; '*' and '?' glob as usual.
  /// Samples 1..genuine_per_user are genuine, the next forgery_per_user are
  /// skilled forgeries.
  std::string filename_rule = "U{user}S{sample}.*";
  int genuine_per_user = 20;
  int forgery_per_user = 20;
};

RawSignature parse_signature(const std::string& content, const DatasetLayout& layout);

/// Render a signature in the svc2004 text format (integers, 7 columns).
std::string serialize_signature_svc2004(const RawSignature& sig);

struct UserSignatures {
  std::vector<RawSignature> genuine;
  std::vector<RawSignature> forgeries;
};

struct Dataset {
  std::map<std::string, UserSignatures> users;  // keyed by user id, ordered

  std::size_t signature_count() const;
};

struct ParseFailure {
  std::string path;
  std::string message;
};

/// Enumerate and parse every file under `root` matching the layout's
/// filename rule. With fail_fast the first bad file throws; otherwise
/// failures are collected into `failures` and healthy files are kept.
Dataset load_dataset(const std::filesystem::path& root, const DatasetLayout& layout,
                     bool fail_fast = true, std::vector<ParseFailure>* failures = nullptr);

}  // namespace sigverify
