#ifndef TSDICT_IO_HPP
#define TSDICT_IO_HPP

// File formats for series, dictionaries, profiles and label regions.
// Every format has a string-level parser/formatter pair (the parsers are
// what the robustness fuzzing drives) plus thin file wrappers. Malformed
// input of any kind must surface as a structured error, never a crash.
//
//  - series, text: one decimal sample per line, optional leading
//    "# n=<count>" header; round-trips exactly via shortest-round-trip
//    formatting.
//  - series, binary: magic "MPD1", little-endian u64 count, then count
//    little-endian doubles; the fidelity path (bit-exact round trip).
//  - dictionary: a JSON document; unknown fields are rejected with a
//    versioned error rather than ignored so future revisions cannot be
//    silently misread.
//  - profile: tab-separated table with a "# m=<m> kind=<kind>" line and a
//    column header, one row per window.
//  - labels: tab-separated "start end" half-open sample regions,
//    normalized (sorted, merged) on load.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tsdict/dictionary.hpp"
#include "tsdict/errors.hpp"
#include "tsdict/profiles.hpp"
#include "tsdict/series.hpp"

namespace tsdict {

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary format assumes a little-endian host");

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view field, std::size_t line_no, const char* what) {
  field = trim(field);
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw error(errc::parse_error,
                std::string("line ") + std::to_string(line_no) + ": malformed " + what + " '" +
                    std::string(field) + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(std::string_view field, std::size_t line_no, const char* what) {
  field = trim(field);
  std::uint64_t v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw error(errc::parse_error,
                std::string("line ") + std::to_string(line_no) + ": malformed " + what + " '" +
                    std::string(field) + "'");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view field, std::size_t line_no, const char* what) {
  field = trim(field);
  std::int64_t v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw error(errc::parse_error,
                std::string("line ") + std::to_string(line_no) + ": malformed " + what + " '" +
                    std::string(field) + "'");
  }
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

// splits on '\n'; the callback receives (1-based line number, line content)
template <class F>
void for_each_line(std::string_view text, F&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    ++line_no;
    fn(line_no, text.substr(pos, end - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == ',')) ++pos;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t' && line[end] != ',') ++end;
    if (end > pos) out.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errc::io_error, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw error(errc::io_error, "read failure on '" + path + "'");
  return std::move(ss).str();
}

inline void spill(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw error(errc::io_error, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw error(errc::io_error, "write failure on '" + path + "'");
}

} // namespace detail

// ---------------------------------------------------------------- series

inline constexpr char series_magic[4] = {'M', 'P', 'D', '1'};

inline std::string format_series_text(const TimeSeries& T) {
  std::string out = "# n=" + std::to_string(T.n()) + "\n";
  for (double v : T.values) {
    out += detail::format_double(v);
    out += '\n';
  }
  return out;
}

inline std::string format_series_binary(const TimeSeries& T) {
  std::string out(4 + 8 + 8 * T.n(), '\0');
  std::memcpy(out.data(), series_magic, 4);
  const std::uint64_t n = T.n();
  std::memcpy(out.data() + 4, &n, 8);
  std::memcpy(out.data() + 12, T.values.data(), 8 * T.n());
  return out;
}

// Parses either form (binary is detected by its magic). Rejects empty
// series and non-finite samples.
inline TimeSeries parse_series(std::string_view content) {
  if (content.size() >= 4 && std::memcmp(content.data(), series_magic, 4) == 0) {
    if (content.size() < 12) {
      throw error(errc::parse_error, "binary series truncated before the sample count");
    }
    std::uint64_t n = 0;
    std::memcpy(&n, content.data() + 4, 8);
    // compare without forming 12 + 8n, which can wrap for absurd counts
    if ((content.size() - 12) % 8 != 0 || (content.size() - 12) / 8 != n) {
      throw error(errc::parse_error, "binary series length does not match its sample count");
    }
    if (n == 0) throw error(errc::parse_error, "series holds no samples");
    TimeSeries T;
    T.values.resize(n);
    std::memcpy(T.values.data(), content.data() + 12, 8 * n);
    for (std::size_t i = 0; i < T.n(); ++i) {
      if (!std::isfinite(T.values[i])) {
        throw error(errc::non_finite_input, "sample " + std::to_string(i) + " is not finite");
      }
    }
    return T;
  }

  TimeSeries T;
  std::optional<std::uint64_t> declared;
  detail::for_each_line(content, [&](std::size_t line_no, std::string_view raw) {
    const std::string_view line = detail::trim(raw);
    if (line.empty()) return;
    if (line.front() == '#') {
      if (!T.values.empty() || declared) {
        throw error(errc::parse_error,
                    "line " + std::to_string(line_no) + ": unexpected header after data");
      }
      const std::string_view rest = detail::trim(line.substr(1));
      if (rest.size() < 3 || rest.substr(0, 2) != "n=") {
        throw error(errc::parse_error, "line " + std::to_string(line_no) + ": unrecognized header line");
      }
      declared = detail::parse_uint(rest.substr(2), line_no, "sample count");
      return;
    }
    const double v = detail::parse_double(line, line_no, "sample");
    if (!std::isfinite(v)) {
      throw error(errc::non_finite_input, "line " + std::to_string(line_no) + ": sample is not finite");
    }
    T.values.push_back(v);
  });
  if (declared && *declared != T.n()) {
    throw error(errc::parse_error, "declared sample count " + std::to_string(*declared) +
                                       " does not match the " + std::to_string(T.n()) + " samples present");
  }
  if (T.n() == 0) throw error(errc::parse_error, "series holds no samples");
  return T;
}

inline TimeSeries read_series(const std::string& path) { return parse_series(detail::slurp(path)); }
inline void write_series_text(const std::string& path, const TimeSeries& T) {
  detail::spill(path, format_series_text(T));
}
inline void write_series_binary(const std::string& path, const TimeSeries& T) {
  detail::spill(path, format_series_binary(T));
}

// ------------------------------------------------------------ dictionary

inline constexpr int dictionary_format_version = 1;

inline std::string format_dictionary(const Dictionary& D) {
  nlohmann::json j;
  j["format_version"] = dictionary_format_version;
  j["m"] = D.m;
  j["k"] = D.k;
  j["source_length"] = D.source_length;
  j["space_saving"] = D.space_saving;
  if (D.e_max) {
    j["e_max"] = *D.e_max;
  } else {
    j["e_max"] = nullptr;
  }
  j["core_starts"] = D.core_starts;
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : D.segments) {
    nlohmann::json seg;
    seg["start"] = s.start;
    seg["length"] = s.length();
    seg["values"] = s.values;
    segs.push_back(std::move(seg));
  }
  j["segments"] = std::move(segs);
  return j.dump() + "\n";
}

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                  const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw error(errc::version_error, std::string("unknown field '") + it.key() + "' in " + where +
                                           " (this reader implements format_version " +
                                           std::to_string(dictionary_format_version) + ")");
    }
  }
}

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw error(errc::schema_error, std::string("missing field '") + key + "' in " + where);
  }
  return *it;
}

inline std::uint64_t as_uint(const nlohmann::json& v, const char* what) {
  if (!v.is_number_unsigned()) {
    throw error(errc::schema_error, std::string(what) + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

inline double as_finite_number(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) throw error(errc::schema_error, std::string(what) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw error(errc::non_finite_input, std::string(what) + " is not finite");
  return d;
}

} // namespace detail

inline Dictionary parse_dictionary(std::string_view content) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::parse_error, e.what());
  }
  if (!j.is_object()) throw error(errc::schema_error, "dictionary document must be a JSON object");

  const auto& ver = detail::require_field(j, "format_version", "dictionary");
  if (!ver.is_number_unsigned() || ver.get<std::uint64_t>() != dictionary_format_version) {
    throw error(errc::version_error, "unsupported format_version (this reader implements version " +
                                         std::to_string(dictionary_format_version) + ")");
  }
  detail::reject_unknown_fields(
      j, {"format_version", "m", "k", "source_length", "space_saving", "e_max", "core_starts", "segments"},
      "dictionary");

  Dictionary D;
  D.m = detail::as_uint(detail::require_field(j, "m", "dictionary"), "m");
  if (D.m < 2) throw error(errc::schema_error, "m must be at least 2");
  D.k = detail::as_finite_number(detail::require_field(j, "k", "dictionary"), "k");
  if (D.k < 0.0) throw error(errc::schema_error, "k must be non-negative");
  D.source_length = detail::as_uint(detail::require_field(j, "source_length", "dictionary"), "source_length");
  D.space_saving = detail::as_finite_number(detail::require_field(j, "space_saving", "dictionary"), "space_saving");

  const auto& emax = detail::require_field(j, "e_max", "dictionary");
  if (emax.is_null()) {
    D.e_max.reset();
  } else {
    const double e = detail::as_finite_number(emax, "e_max");
    if (e < 0.0) throw error(errc::schema_error, "e_max must be non-negative");
    D.e_max = e;
  }

  const auto& cores = detail::require_field(j, "core_starts", "dictionary");
  if (!cores.is_array()) throw error(errc::schema_error, "core_starts must be an array");
  for (const auto& c : cores) {
    const std::uint64_t start = detail::as_uint(c, "core start");
    // bounds phrased to avoid start + m wrapping on absurd inputs
    if (start >= D.source_length || D.source_length - start < D.m) {
      throw error(errc::schema_error, "core start " + std::to_string(start) + " leaves no room for a window");
    }
    D.core_starts.push_back(start);
  }
  for (std::size_t a = 0; a < D.core_starts.size(); ++a) {
    for (std::size_t b = a + 1; b < D.core_starts.size(); ++b) {
      const std::size_t lo = std::min(D.core_starts[a], D.core_starts[b]);
      const std::size_t hi = std::max(D.core_starts[a], D.core_starts[b]);
      if (hi - lo <= D.m / 2) {
        throw error(errc::schema_error, "core starts " + std::to_string(lo) + " and " + std::to_string(hi) +
                                            " violate the separation rule");
      }
    }
  }

  const auto& segs = detail::require_field(j, "segments", "dictionary");
  if (!segs.is_array() || segs.empty()) {
    throw error(errc::schema_error, "segments must be a non-empty array");
  }
  std::size_t prev_end = 0;
  std::size_t stored = 0;
  for (const auto& sj : segs) {
    if (!sj.is_object()) throw error(errc::schema_error, "segment entries must be objects");
    detail::reject_unknown_fields(sj, {"start", "length", "values"}, "segment");
    Segment s;
    s.start = detail::as_uint(detail::require_field(sj, "start", "segment"), "segment start");
    const std::uint64_t len = detail::as_uint(detail::require_field(sj, "length", "segment"), "segment length");
    if (len < D.m) throw error(errc::schema_error, "segment shorter than the window length");
    // bounds phrased to avoid start + len wrapping on absurd inputs
    if (s.start >= D.source_length || D.source_length - s.start < len) {
      throw error(errc::schema_error, "segment extends past the source series");
    }
    if (!D.segments.empty() && s.start < prev_end) {
      throw error(errc::schema_error, "segments overlap or are out of order");
    }
    const auto& vals = detail::require_field(sj, "values", "segment");
    if (!vals.is_array() || vals.size() != len) {
      throw error(errc::schema_error, "segment values must be an array of 'length' numbers");
    }
    s.values.reserve(len);
    for (const auto& v : vals) s.values.push_back(detail::as_finite_number(v, "segment value"));
    prev_end = s.start + len;
    stored += len;
    D.segments.push_back(std::move(s));
  }
  if (D.source_length == 0) throw error(errc::schema_error, "source_length must be positive");
  const double recomputed = 1.0 - static_cast<double>(stored) / static_cast<double>(D.source_length);
  if (std::fabs(recomputed - D.space_saving) > 1e-12) {
    throw error(errc::schema_error, "stored space_saving does not match the segment contents");
  }
  return D;
}

inline Dictionary read_dictionary(const std::string& path) { return parse_dictionary(detail::slurp(path)); }
inline void write_dictionary(const std::string& path, const Dictionary& D) {
  detail::spill(path, format_dictionary(D));
}

// --------------------------------------------------------------- profile

inline const char* join_kind_name(join_kind k) { return k == join_kind::self ? "self-join" : "ab-join"; }

inline std::string format_profile(const MatrixProfile& P) {
  std::string out = "# m=" + std::to_string(P.m) + " kind=" + join_kind_name(P.kind) + "\n";
  out += "window_start\tdistance\tnn_index\n";
  for (std::size_t i = 0; i < P.values.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += detail::format_double(P.values[i]);
    out += '\t';
    out += std::to_string(P.indices[i]);
    out += '\n';
  }
  return out;
}

inline MatrixProfile parse_profile(std::string_view content) {
  MatrixProfile P;
  bool got_meta = false;
  bool got_header = false;
  detail::for_each_line(content, [&](std::size_t line_no, std::string_view raw) {
    const std::string_view line = detail::trim(raw);
    if (line.empty()) return;
    if (!got_meta) {
      if (line.size() < 2 || line.front() != '#') {
        throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected '# m=<m> kind=<kind>'");
      }
      const auto fields = detail::split_fields(line.substr(1));
      if (fields.size() != 2 || fields[0].substr(0, 2) != "m=" || fields[1].substr(0, 5) != "kind=") {
        throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected '# m=<m> kind=<kind>'");
      }
      P.m = detail::parse_uint(fields[0].substr(2), line_no, "window length");
      if (P.m < 2) throw error(errc::schema_error, "window length must be at least 2");
      const std::string_view kind = fields[1].substr(5);
      if (kind == "self-join") {
        P.kind = join_kind::self;
      } else if (kind == "ab-join") {
        P.kind = join_kind::ab;
      } else {
        throw error(errc::schema_error, "line " + std::to_string(line_no) + ": unknown profile kind");
      }
      got_meta = true;
      return;
    }
    if (!got_header) {
      if (line != "window_start\tdistance\tnn_index") {
        throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected the column header");
      }
      got_header = true;
      return;
    }
    const auto fields = detail::split_fields(line);
    if (fields.size() != 3) {
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected 3 columns");
    }
    const std::uint64_t start = detail::parse_uint(fields[0], line_no, "window start");
    if (start != P.values.size()) {
      throw error(errc::schema_error, "line " + std::to_string(line_no) + ": window starts must be consecutive");
    }
    const double dist = detail::parse_double(fields[1], line_no, "distance");
    if (std::isnan(dist) || dist < 0.0) {
      throw error(errc::schema_error, "line " + std::to_string(line_no) + ": distance must be non-negative");
    }
    const std::int64_t nn = detail::parse_int(fields[2], line_no, "neighbor index");
    if (nn < MatrixProfile::no_neighbor) {
      throw error(errc::schema_error, "line " + std::to_string(line_no) + ": neighbor index out of range");
    }
    P.values.push_back(dist);
    P.indices.push_back(nn);
  });
  if (!got_meta || !got_header) throw error(errc::parse_error, "profile header missing");
  if (P.values.empty()) throw error(errc::schema_error, "profile holds no rows");
  return P;
}

inline MatrixProfile read_profile(const std::string& path) { return parse_profile(detail::slurp(path)); }
inline void write_profile(const std::string& path, const MatrixProfile& P) {
  detail::spill(path, format_profile(P));
}

// ---------------------------------------------------------------- labels

inline std::string format_labels(const std::vector<interval>& regions) {
  std::string out = "# start\tend\n";
  for (const auto& r : regions) {
    out += std::to_string(r.first);
    out += '\t';
    out += std::to_string(r.second);
    out += '\n';
  }
  return out;
}

// Returns the regions sorted and merged (overlapping or touching regions
// collapse into one).
inline std::vector<interval> parse_labels(std::string_view content) {
  std::vector<interval> regions;
  detail::for_each_line(content, [&](std::size_t line_no, std::string_view raw) {
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 2) {
      throw error(errc::parse_error, "line " + std::to_string(line_no) + ": expected 'start end'");
    }
    const std::uint64_t lo = detail::parse_uint(fields[0], line_no, "region start");
    const std::uint64_t hi = detail::parse_uint(fields[1], line_no, "region end");
    if (lo >= hi) {
      throw error(errc::schema_error, "line " + std::to_string(line_no) + ": region start must precede end");
    }
    regions.emplace_back(lo, hi);
  });
  if (regions.empty()) throw error(errc::schema_error, "label file holds no regions");
  return merge_intervals(regions);
}

inline std::vector<interval> read_labels(const std::string& path) { return parse_labels(detail::slurp(path)); }
inline void write_labels(const std::string& path, const std::vector<interval>& regions) {
  detail::spill(path, format_labels(regions));
}

} // namespace tsdict

#endif // TSDICT_IO_HPP
