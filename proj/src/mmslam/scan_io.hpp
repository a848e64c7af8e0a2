#pragma once

#include "mmslam/chanmodel.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmslam {

class ScanIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One JSON line: {"k": step, "clusters": [[[toa, aoa_az, aoa_el, aod_az, aod_el], ...], ...]}.
std::string scan_to_json_line(int step, const Scan& scan);
void write_scan_line(std::ostream& out, int step, const Scan& scan);

struct ScanRecord {
  int step = 0;
  Scan scan;
};

ScanRecord parse_scan_line(const std::string& line);
/// Reads every non-empty line; steps must be 1, 2, ... in order.
std::vector<ScanRecord> read_scan_log(std::istream& in);
std::vector<ScanRecord> read_scan_file(const std::string& path);

}  // namespace mmslam
