#pragma once

// Check records and deterministic JSON-lines / CSV report emission.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace opfield {

struct CheckRecord {
    std::string suite;
    std::string check;
    std::string anchor; // stable identifier of the verified identity
    std::string status; // pass | fail | info
    double metric = 0.0;
    double tol = 0.0; // 0 for info records
    double ms = 0.0;

    bool operator<(const CheckRecord& o) const {
        if (suite != o.suite) return suite < o.suite;
        return check < o.check;
    }
};

inline CheckRecord make_check(std::string suite, std::string check,
                              std::string anchor, double metric, double tol,
                              double ms) {
    CheckRecord r;
    r.suite = std::move(suite);
    r.check = std::move(check);
    r.anchor = std::move(anchor);
    r.metric = metric;
    r.tol = tol;
    r.ms = ms;
    r.status = metric <= tol ? "pass" : "fail";
    return r;
}

// A check that passes when the metric is at least a floor (control cases
// that must NOT vanish).
inline CheckRecord make_floor_check(std::string suite, std::string check,
                                    std::string anchor, double metric,
                                    double floor, double ms) {
    CheckRecord r;
    r.suite = std::move(suite);
    r.check = std::move(check);
    r.anchor = std::move(anchor);
    r.metric = metric;
    r.tol = floor;
    r.ms = ms;
    r.status = metric >= floor ? "pass" : "fail";
    return r;
}

inline CheckRecord make_info(std::string suite, std::string check,
                             std::string anchor, double metric, double ms) {
    CheckRecord r;
    r.suite = std::move(suite);
    r.check = std::move(check);
    r.anchor = std::move(anchor);
    r.metric = metric;
    r.tol = 0.0;
    r.ms = ms;
    r.status = "info";
    return r;
}

inline nlohmann::json record_to_json(const CheckRecord& r) {
    return nlohmann::json{{"suite", r.suite},   {"check", r.check},
                          {"anchor", r.anchor}, {"status", r.status},
                          {"metric", r.metric}, {"tol", r.tol},
                          {"ms", r.ms}};
}

inline CheckRecord record_from_json(const nlohmann::json& j) {
    CheckRecord r;
    r.suite = j.at("suite").get<std::string>();
    r.check = j.at("check").get<std::string>();
    r.anchor = j.at("anchor").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.metric = j.at("metric").get<double>();
    r.tol = j.at("tol").get<double>();
    r.ms = j.at("ms").get<double>();
    return r;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// JSON lines (one record per line) or CSV, sorted for determinism, with a
// pass/fail summary footer.
inline void emit_report(std::vector<CheckRecord> records,
                        std::ostream& os, const std::string& format) {
    std::sort(records.begin(), records.end());
    int pass = 0, fail = 0, info = 0;
    for (const auto& r : records) {
        if (r.status == "pass") ++pass;
        else if (r.status == "fail") ++fail;
        else ++info;
    }
    if (format == "json") {
        for (const auto& r : records) os << record_to_json(r).dump() << "\n";
        os << nlohmann::json{{"summary", true}, {"pass", pass},
                             {"fail", fail},    {"info", info}}.dump()
           << "\n";
    } else if (format == "csv") {
        os << "suite,check,anchor,status,metric,tol,ms\n";
        std::ostringstream num;
        for (const auto& r : records) {
            num.str("");
            num.precision(17);
            num << r.metric << "," << r.tol << "," << r.ms;
            os << csv_escape(r.suite) << "," << csv_escape(r.check) << ","
               << csv_escape(r.anchor) << "," << r.status << "," << num.str()
               << "\n";
        }
        os << "summary,,,," << pass << "," << fail << "," << info << "\n";
    } else {
        throw std::invalid_argument("emit_report: format must be json or csv");
    }
}

inline void emit_report(const std::vector<CheckRecord>& records,
                        const std::string& path, const std::string& format) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_report: cannot write " + path);
    emit_report(records, os, format);
}

// Parse a JSON-lines report back into records (summary line skipped).
inline std::vector<CheckRecord> parse_report(std::istream& is) {
    std::vector<CheckRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (j.contains("summary")) continue;
        out.push_back(record_from_json(j));
    }
    return out;
}

} // namespace opfield
