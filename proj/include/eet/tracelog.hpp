#pragma once

// The trace-log file format: one interaction per line,
//
//   Sender -> Receiver : message(v1, v2)
//
// Blank lines and '#' comments are ignored. Zero-argument messages keep the
// parentheses. The same event syntax appears in witness output and in the
// monitor's verdict stream.

#include <cctype>
#include <string>
#include <vector>

#include "model.hpp"

namespace eet {

namespace tracelog_detail {

struct LineScanner {
    const std::string& text;
    std::size_t pos = 0;
    int line;

    void skip_spaces() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    [[noreturn]] void fail(const std::string& why) {
        throw Error(ErrorKind::LogSyntax, "line " + std::to_string(line) + ": " + why);
    }

    std::string ident() {
        skip_spaces();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected a name at column " + std::to_string(start + 1));
        return text.substr(start, pos - start);
    }

    void expect(const std::string& s) {
        skip_spaces();
        if (text.compare(pos, s.size(), s) != 0) fail("expected '" + s + "'");
        pos += s.size();
    }

    bool peek(char c) {
        skip_spaces();
        return pos < text.size() && text[pos] == c;
    }

    bool done() {
        skip_spaces();
        return pos == text.size();
    }
};

}  // namespace tracelog_detail

inline Interaction parse_trace_line(const std::string& line_text, int line_number) {
    tracelog_detail::LineScanner s{line_text, 0, line_number};
    Interaction ev;
    ev.sender = s.ident();
    s.expect("->");
    ev.receiver = s.ident();
    s.expect(":");
    ev.message = s.ident();
    s.expect("(");
    if (!s.peek(')')) {
        while (true) {
            ev.args.push_back(s.ident());
            if (s.peek(',')) {
                s.expect(",");
                continue;
            }
            break;
        }
    }
    s.expect(")");
    if (!s.done()) s.fail("trailing input after the event");
    return ev;
}

// Parses a whole log. Declaredness against a Document is a separate concern
// of the consumer (member, monitor).
inline Trace parse_trace_log(const std::string& text) {
    Trace out;
    std::size_t start = 0;
    int line_number = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        ++line_number;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        bool blank = true;
        for (char c : line)
            if (c != ' ' && c != '\t' && c != '\r') blank = false;
        if (!blank) out.push_back(parse_trace_line(line, line_number));
        if (end == text.size()) break;
        start = end + 1;
    }
    return out;
}

inline std::string format_trace_log(const Trace& t) {
    std::string out;
    for (const Interaction& ev : t) {
        out += to_string(ev);
        out += "\n";
    }
    return out;
}

}  // namespace eet
