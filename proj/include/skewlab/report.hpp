#pragma once

#include <map>
#include <string>
#include <vector>

namespace skewlab {

/// Run summary: config echo, named metrics, artifact paths, duration.
struct Report {
    std::string command;
    std::map<std::string, std::string> config_echo;
    std::map<std::string, double> metrics;
    std::vector<std::string> artifacts;
    double duration_seconds = 0.0;
    std::string error; // machine-readable error code, empty on success

    std::string to_json() const;
};

/// temp + rename so partially written artifacts never appear.
void write_file_atomic(const std::string& path, const std::string& content);
void write_csv_atomic(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows);

} // namespace skewlab
