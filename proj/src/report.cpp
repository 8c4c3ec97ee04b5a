#include "skewlab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace skewlab {

std::string Report::to_json() const {
    nlohmann::json j;
    j["schema_version"] = "1";
    j["command"] = command;
    j["config"] = config_echo;
    j["metrics"] = metrics;
    j["artifacts"] = artifacts;
    j["duration_seconds"] = duration_seconds;
    if (!error.empty()) j["error"] = error;
    return j.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

void write_csv_atomic(const std::string& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << header << "\n";
    out.precision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << row[i];
        }
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

} // namespace skewlab
