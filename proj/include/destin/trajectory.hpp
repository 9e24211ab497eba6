#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "destin/intent.hpp"
#include "destin/numerics.hpp"

namespace destin {

/// One position fix. Coordinates are meters in the local frame, or degrees
/// (lat, lon) before conversion when the track was read as geodetic.
struct TrackSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct Track {
  std::vector<TrackSample> samples;
  bool geodetic = false;  // coordinates are (lat, lon) awaiting projection
};

constexpr double kEarthRadius = 6371000.0;  // meters
constexpr double kMaxLatitude = 85.0;       // degrees; projection degenerates near poles

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_number(const std::string& s, long line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", line);
  }
  if (pos != s.size() || !std::isfinite(v)) {
    throw ParseError("not a finite number: '" + s + "'", line);
  }
  return v;
}

}  // namespace detail

/// Parse a track stream: header `t,x,y` (local meters) or `t,lat,lon`
/// (geodetic, flagged for conversion), strictly increasing timestamps.
inline Track parse_track(std::istream& in) {
  Track track;
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("empty track: missing header", 1);
  ++line_no;
  const auto header = detail::split_csv(line);
  if (header == std::vector<std::string>{"t", "x", "y"}) {
    track.geodetic = false;
  } else if (header == std::vector<std::string>{"t", "lat", "lon"}) {
    track.geodetic = true;
  } else {
    throw ParseError("expected header 't,x,y' or 't,lat,lon'", 1);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
    TrackSample s;
    s.t = detail::parse_number(fields[0], line_no);
    s.x = detail::parse_number(fields[1], line_no);
    s.y = detail::parse_number(fields[2], line_no);
    if (!track.samples.empty() && s.t <= track.samples.back().t) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    track.samples.push_back(s);
  }
  return track;
}

inline Track parse_track(const std::string& text) {
  std::istringstream in(text);
  return parse_track(in);
}

/// Equirectangular projection about an origin: x is easting, y is northing.
/// Adequate for tracks within roughly a kilometer of the origin.
inline std::vector<TrackSample> latlon_to_local(const std::vector<TrackSample>& samples,
                                                double origin_lat, double origin_lon) {
  if (std::abs(origin_lat) >= kMaxLatitude) {
    throw std::invalid_argument("latlon_to_local: origin latitude too close to a pole");
  }
  const double to_rad = M_PI / 180.0;
  const double cos_lat0 = std::cos(origin_lat * to_rad);
  std::vector<TrackSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (std::abs(s.x) >= kMaxLatitude) {
      throw std::invalid_argument("latlon_to_local: sample latitude too close to a pole");
    }
    TrackSample local;
    local.t = s.t;
    local.x = kEarthRadius * (s.y - origin_lon) * to_rad * cos_lat0;
    local.y = kEarthRadius * (s.x - origin_lat) * to_rad;
    out.push_back(local);
  }
  return out;
}

/// Inverse of latlon_to_local; returns samples as (t, lat, lon).
inline std::vector<TrackSample> local_to_latlon(const std::vector<TrackSample>& samples,
                                                double origin_lat, double origin_lon) {
  const double to_deg = 180.0 / M_PI;
  const double cos_lat0 = std::cos(origin_lat * M_PI / 180.0);
  std::vector<TrackSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    TrackSample geo;
    geo.t = s.t;
    geo.x = origin_lat + (s.y / kEarthRadius) * to_deg;
    geo.y = origin_lon + (s.x / (kEarthRadius * cos_lat0)) * to_deg;
    out.push_back(geo);
  }
  return out;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

enum class ReportFormat { Csv, Json };

constexpr const char* kReportCsvHeader = "t,p_return,p_not,T_map,T_std,decision";

/// Serialize reports, one row/object per timestep.
inline void emit_report(const std::vector<IntentReport>& reports, ReportFormat format,
                        std::ostream& out) {
  if (reports.empty()) throw std::invalid_argument("emit_report: empty report list");
  if (format == ReportFormat::Csv) {
    out << kReportCsvHeader << "\n";
    for (const auto& r : reports) {
      out << detail::format_number(r.t) << ',' << detail::format_number(r.p_return) << ','
          << detail::format_number(r.p_not) << ',' << detail::format_number(r.T_map) << ','
          << detail::format_number(r.T_std) << ',' << to_string(r.decision) << "\n";
    }
  } else {
    out << "[\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      out << "  {\"t\": " << detail::format_number(r.t)
          << ", \"p_return\": " << detail::format_number(r.p_return)
          << ", \"p_not\": " << detail::format_number(r.p_not)
          << ", \"T_map\": " << detail::format_number(r.T_map)
          << ", \"T_std\": " << detail::format_number(r.T_std) << ", \"decision\": \""
          << to_string(r.decision) << "\"}" << (i + 1 < reports.size() ? "," : "") << "\n";
    }
    out << "]\n";
  }
}

inline std::string emit_report(const std::vector<IntentReport>& reports, ReportFormat format) {
  std::ostringstream out;
  emit_report(reports, format, out);
  return out.str();
}

/// Read back a CSV report stream (arrival weights are not serialized).
inline std::vector<IntentReport> parse_report_csv(std::istream& in) {
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line) || detail::trim(line) != kReportCsvHeader) {
    throw ParseError("expected report header '" + std::string(kReportCsvHeader) + "'", 1);
  }
  ++line_no;
  std::vector<IntentReport> reports;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 6) throw ParseError("expected 6 fields", line_no);
    IntentReport r;
    r.t = detail::parse_number(fields[0], line_no);
    r.p_return = detail::parse_number(fields[1], line_no);
    r.p_not = detail::parse_number(fields[2], line_no);
    r.T_map = detail::parse_number(fields[3], line_no);
    r.T_std = detail::parse_number(fields[4], line_no);
    r.decision = decision_from_string(fields[5]);
    reports.push_back(r);
  }
  return reports;
}

inline std::vector<IntentReport> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_report_csv(in);
}

}  // namespace destin
