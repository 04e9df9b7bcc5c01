#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tokleak/core.hpp"
#include "tokleak/metrics.hpp"
#include "tokleak/reconstruct.hpp"

namespace tokleak {

// Line-oriented child process client. Used for both external reconstructors
// and external embedders; one request, a block of response lines.
class LineProtocolProcess {
public:
    explicit LineProtocolProcess(const std::string& command) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0) {
            throw Error("failed to create pipes for: " + command);
        }
        pid_ = fork();
        if (pid_ < 0) throw Error("fork failed for: " + command);
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        out_ = fdopen(to_child[1], "w");
        in_ = fdopen(from_child[0], "r");
        if (!out_ || !in_) throw Error("fdopen failed for: " + command);
    }

    LineProtocolProcess(const LineProtocolProcess&) = delete;
    LineProtocolProcess& operator=(const LineProtocolProcess&) = delete;

    ~LineProtocolProcess() {
        if (out_) fclose(out_);
        if (in_) fclose(in_);
        if (pid_ > 0) waitpid(pid_, nullptr, 0);
    }

    void send_line(const std::string& line) {
        fputs(line.c_str(), out_);
        fputc('\n', out_);
        fflush(out_);
    }

    std::optional<std::string> recv_line() {
        std::string line;
        int c;
        while ((c = fgetc(in_)) != EOF && c != '\n') line.push_back(static_cast<char>(c));
        if (c == EOF && line.empty()) return std::nullopt;
        return line;
    }

private:
    pid_t pid_ = -1;
    FILE* out_ = nullptr;
    FILE* in_ = nullptr;
};

namespace detail {

inline std::string escape_newlines(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\n') {
            out += "\\n";
        } else if (c == '\\') {
            out += "\\\\";
        } else {
            out += c;
        }
    }
    return out;
}

inline std::string unescape_newlines(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            out += s[i + 1] == 'n' ? '\n' : s[i + 1];
            ++i;
        } else {
            out += s[i];
        }
    }
    return out;
}

}  // namespace detail

// Adapter for a neural (or any out-of-process) reconstructor.
// Request:  `FIRST <l1> <l2> ...`  or  `INNER <l1> <l2> ... | <context>`
// Response: `CAND <log_score> <text>` lines, then `END`.
class ExternalReconstructor : public Reconstructor {
public:
    explicit ExternalReconstructor(const std::string& command) : proc_(command) {}

    std::vector<ScoredCandidate> reconstruct_first(const std::vector<int>& lengths) override {
        return request("FIRST " + render(lengths));
    }

    std::vector<ScoredCandidate> reconstruct_inner(const std::vector<int>& lengths,
                                                   const std::string& context) override {
        return request("INNER " + render(lengths) + " | " + detail::escape_newlines(context));
    }

private:
    static std::string render(const std::vector<int>& lengths) {
        std::string s;
        for (int len : lengths) {
            if (!s.empty()) s += ' ';
            s += std::to_string(len);
        }
        return s;
    }

    std::vector<ScoredCandidate> request(const std::string& line) {
        proc_.send_line(line);
        std::vector<ScoredCandidate> cands;
        while (true) {
            auto reply = proc_.recv_line();
            if (!reply) throw Error("external reconstructor closed the stream");
            if (*reply == "END") break;
            if (reply->rfind("CAND ", 0) != 0) {
                throw Error("external reconstructor: bad line: " + *reply);
            }
            std::istringstream fields(reply->substr(5));
            ScoredCandidate c;
            fields >> c.log_score;
            std::string rest;
            std::getline(fields, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            c.text = detail::unescape_newlines(rest);
            cands.push_back(std::move(c));
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const auto& a, const auto& b) { return a.log_score > b.log_score; });
        return cands;
    }

    LineProtocolProcess proc_;
};

// Adapter for an out-of-process embedding model.
// Request:  `EMBED <text>` (newlines escaped)
// Response: `VEC <v1> <v2> ...`
class ExternalEmbedder : public EmbeddingProvider {
public:
    explicit ExternalEmbedder(const std::string& command) : proc_(command) {}

    std::vector<double> embed(const std::string& text) override {
        proc_.send_line("EMBED " + detail::escape_newlines(text));
        auto reply = proc_.recv_line();
        if (!reply || reply->rfind("VEC ", 0) != 0) {
            throw Error("external embedder: bad reply");
        }
        std::istringstream fields(reply->substr(4));
        std::vector<double> vec;
        double v;
        while (fields >> v) vec.push_back(v);
        return vec;
    }

private:
    LineProtocolProcess proc_;
};

}  // namespace tokleak
