#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tokleak/core.hpp"

namespace tokleak {

enum class Direction { ServerToClient, ClientToServer };

inline const char* to_string(Direction d) {
    return d == Direction::ServerToClient ? "S2C" : "C2S";
}

// One observed encrypted packet: the unit an on-path eavesdropper sees.
struct PacketRecord {
    std::int64_t timestamp_us = 0;  // microseconds since trace start
    Direction direction = Direction::ServerToClient;
    std::int64_t payload_len = 0;   // bytes, >= 0
    std::string stream_id;

    bool operator==(const PacketRecord&) const = default;
};

// Immutable after load; safe to share across threads.
struct Trace {
    std::vector<PacketRecord> packets;
    std::map<std::string, std::string> meta;

    bool operator==(const Trace&) const = default;
};

// Line format: `<timestamp_us> <S2C|C2S> <payload_len> <stream_id>`.
// `#meta key=value` lines before the first record populate Trace::meta;
// other `#` lines are comments.
inline Trace load_trace(std::istream& in, const std::string& source = "<stream>") {
    Trace trace;
    std::unordered_map<std::string, std::int64_t> last_ts;
    std::string line;
    std::size_t lineno = 0;
    bool saw_record = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (!saw_record && line.rfind("#meta ", 0) == 0) {
                std::string kv = line.substr(6);
                auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    throw ParseError(source + ":" + std::to_string(lineno) +
                                     ": malformed #meta line");
                }
                trace.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            continue;
        }
        std::istringstream fields(line);
        PacketRecord rec;
        std::string dir;
        if (!(fields >> rec.timestamp_us >> dir >> rec.payload_len >> rec.stream_id)) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": malformed record");
        }
        std::string extra;
        if (fields >> extra) {
            throw ParseError(source + ":" + std::to_string(lineno) + ": trailing fields");
        }
        if (dir == "S2C") {
            rec.direction = Direction::ServerToClient;
        } else if (dir == "C2S") {
            rec.direction = Direction::ClientToServer;
        } else {
            throw ParseError(source + ":" + std::to_string(lineno) +
                             ": bad direction '" + dir + "'");
        }
        if (rec.payload_len < 0) {
            throw ParseError(source + ":" + std::to_string(lineno) +
                             ": negative payload_len");
        }
        auto it = last_ts.find(rec.stream_id);
        if (it != last_ts.end() && rec.timestamp_us < it->second) {
            throw ParseError(source + ": non-monotone timestamps in stream '" +
                             rec.stream_id + "' at line " + std::to_string(lineno));
        }
        last_ts[rec.stream_id] = rec.timestamp_us;
        trace.packets.push_back(std::move(rec));
        saw_record = true;
    }
    return trace;
}

inline Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file: " + path);
    return load_trace(in, path);
}

inline void save_trace(const Trace& trace, std::ostream& out) {
    for (const auto& [k, v] : trace.meta) {
        out << "#meta " << k << "=" << v << "\n";
    }
    for (const auto& p : trace.packets) {
        out << p.timestamp_us << ' ' << to_string(p.direction) << ' '
            << p.payload_len << ' ' << p.stream_id << "\n";
    }
}

inline void save_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    save_trace(trace, out);
}

inline std::vector<PacketRecord> filter_stream(const Trace& trace,
                                               const std::string& stream_id,
                                               Direction direction) {
    std::vector<PacketRecord> result;
    for (const auto& p : trace.packets) {
        if (p.stream_id == stream_id && p.direction == direction) {
            result.push_back(p);
        }
    }
    return result;
}

inline std::vector<std::int64_t> payload_sizes(const std::vector<PacketRecord>& packets) {
    std::vector<std::int64_t> sizes;
    sizes.reserve(packets.size());
    for (const auto& p : packets) sizes.push_back(p.payload_len);
    return sizes;
}

}  // namespace tokleak
