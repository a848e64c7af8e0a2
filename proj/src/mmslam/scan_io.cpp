#include "mmslam/scan_io.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <ostream>

namespace mmslam {

using nlohmann::json;

std::string scan_to_json_line(int step, const Scan& scan) {
  json clusters = json::array();
  for (const auto& cluster : scan) {
    json paths = json::array();
    for (const auto& z : cluster) {
      paths.push_back({z.toa, z.aoa_az, z.aoa_el, z.aod_az, z.aod_el});
    }
    clusters.push_back(std::move(paths));
  }
  return json{{"k", step}, {"clusters", clusters}}.dump();
}

void write_scan_line(std::ostream& out, int step, const Scan& scan) {
  out << scan_to_json_line(step, scan) << '\n';
}

ScanRecord parse_scan_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ScanIoError(std::string("invalid scan line: ") + e.what());
  }
  if (!j.is_object() || !j.contains("k") || !j.contains("clusters") ||
      !j["k"].is_number_integer() || !j["clusters"].is_array()) {
    throw ScanIoError("scan line must hold integer \"k\" and array \"clusters\"");
  }
  ScanRecord rec;
  rec.step = j["k"].get<int>();
  for (const auto& c : j["clusters"]) {
    if (!c.is_array() || c.empty()) throw ScanIoError("cluster must be a non-empty array");
    ClusterMeasurement cluster;
    for (const auto& p : c) {
      if (!p.is_array() || p.size() != 5) throw ScanIoError("path must hold 5 numbers");
      for (const auto& v : p) {
        if (!v.is_number()) throw ScanIoError("path must hold 5 numbers");
      }
      cluster.push_back(ChannelParam{p[0].get<double>(), p[1].get<double>(), p[2].get<double>(),
                                     p[3].get<double>(), p[4].get<double>()});
    }
    rec.scan.push_back(std::move(cluster));
  }
  return rec;
}

std::vector<ScanRecord> read_scan_log(std::istream& in) {
  std::vector<ScanRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_scan_line(line));
    const int expected = static_cast<int>(out.size());
    if (out.back().step != expected) {
      throw ScanIoError("scan log out of order: expected k=" + std::to_string(expected) +
                        ", got k=" + std::to_string(out.back().step));
    }
  }
  return out;
}

std::vector<ScanRecord> read_scan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScanIoError("cannot open scan file " + path);
  return read_scan_log(in);
}

}  // namespace mmslam
