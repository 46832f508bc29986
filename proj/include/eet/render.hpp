#pragma once

// Deterministic diagram output. Components are vertical axes, time runs top
// to bottom, one row per message. Choice and par render as labeled frames,
// loops as a right-hand bar labeled with the bounds, references as labeled
// boxes. Identical input yields byte-identical output in both formats.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"

namespace eet {

struct RenderOptions {
    enum class Format { Text, Svg };

    Format format = Format::Text;
    std::vector<std::string> column_order;  // empty: declaration order from the document
    bool show_params = true;
    unsigned px_per_row = 28;  // svg only
};

namespace render_detail {

struct ArrowItem {
    int row = 0;
    std::size_t from = 0, to = 0;  // column indices
    std::string label;
};

struct NoteItem {
    int row = 0;
    std::string text;
};

struct FrameItem {
    int top = 0, bottom = 0;
    std::vector<int> seps;
    std::string label;
    int depth = 1;
};

struct BarItem {
    int first = 0, last = 0;
    std::string label;
    int level = 1;
};

struct Layout {
    std::vector<std::string> columns;
    int rows = 0;
    std::vector<ArrowItem> arrows;
    std::vector<NoteItem> notes;
    std::vector<FrameItem> frames;
    std::vector<BarItem> bars;
    int max_frame_depth = 0;
    int max_bar_level = 0;
};

inline std::vector<std::string> pick_columns(const Document& doc, const RenderOptions& opts) {
    if (opts.column_order.empty()) return doc.components;
    for (const auto& name : opts.column_order)
        if (!doc.has_component(name))
            throw Error(ErrorKind::UnknownComponent, "'" + name + "' is not a declared component");
    std::set<std::string> distinct(opts.column_order.begin(), opts.column_order.end());
    if (distinct.size() != opts.column_order.size())
        throw Error(ErrorKind::UnknownComponent, "column order repeats a component");
    return opts.column_order;
}

struct LayoutBuilder {
    const RenderOptions& opts;
    Layout lay;
    std::map<std::string, std::size_t> index;
    int frame_depth = 0;
    int bar_level = 0;

    explicit LayoutBuilder(const Document& doc, const RenderOptions& options) : opts(options) {
        lay.columns = pick_columns(doc, options);
        for (std::size_t i = 0; i < lay.columns.size(); ++i) index[lay.columns[i]] = i;
    }

    std::size_t column_of(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end())
            throw Error(ErrorKind::UnknownComponent,
                        "component '" + name + "' has no axis in this diagram");
        return it->second;
    }

    std::string message_label(const std::string& message,
                              const std::vector<std::string>& args) const {
        if (!opts.show_params) return message;
        std::string label = message + "(";
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) label += ", ";
            label += args[i];
        }
        label += ")";
        return label;
    }

    void arrow(const std::string& sender, const std::string& receiver, const std::string& label) {
        std::size_t a = column_of(sender), b = column_of(receiver);
        lay.arrows.push_back({lay.rows, a, b, label});
        lay.rows += (a == b) ? 2 : 1;
    }

    void note(const std::string& text) {
        lay.notes.push_back({lay.rows, text});
        lay.rows += 1;
    }

    void emit_frame(const std::string& label, const std::vector<ExprPtr>& bodies) {
        ++frame_depth;
        lay.max_frame_depth = std::max(lay.max_frame_depth, frame_depth);
        FrameItem frame;
        frame.label = label;
        frame.depth = frame_depth;
        frame.top = lay.rows++;
        for (std::size_t i = 0; i < bodies.size(); ++i) {
            if (i) frame.seps.push_back(lay.rows++);
            emit(bodies[i]);
        }
        frame.bottom = lay.rows++;
        lay.frames.push_back(std::move(frame));
        --frame_depth;
    }

    void emit(const ExprPtr& e) {
        switch (e->kind) {
            case ExprKind::Empty:
                return;
            case ExprKind::Dead:
                note("[dead]");
                return;
            case ExprKind::Message: {
                std::vector<std::string> args;
                for (const Term& t : e->args) args.push_back(t.text);
                arrow(e->sender, e->receiver, message_label(e->message, args));
                return;
            }
            case ExprKind::Seq:
                emit(e->children[0]);
                emit(e->children[1]);
                return;
            case ExprKind::Choice:
                emit_frame("choice", e->children);
                return;
            case ExprKind::Interleave:
                emit_frame("par", {e->children[0], e->children[1]});
                return;
            case ExprKind::Ref:
                emit_frame("ref " + e->ref_name, {});
                return;
            case ExprKind::Loop: {
                ++bar_level;
                lay.max_bar_level = std::max(lay.max_bar_level, bar_level);
                int first = lay.rows;
                emit(e->children[0]);
                if (lay.rows == first) lay.rows += 1;  // keep the bar visible
                std::string bounds =
                    std::to_string(e->loop_min) + ".." +
                    (e->loop_max ? std::to_string(*e->loop_max) : std::string("*"));
                lay.bars.push_back({first, lay.rows - 1, bounds, bar_level});
                --bar_level;
                return;
            }
            case ExprKind::Guarded: {
                emit(e->children[0]);
                note("[ where " + to_string(e->guard) + " ]");
                return;
            }
        }
    }
};

// --- text backend -------------------------------------------------------------

struct Canvas {
    std::vector<std::string> lines;

    void put(std::size_t row, std::size_t col, const std::string& text) {
        if (lines.size() <= row) lines.resize(row + 1);
        std::string& line = lines[row];
        if (line.size() < col + text.size()) line.resize(col + text.size(), ' ');
        for (std::size_t i = 0; i < text.size(); ++i) line[col + i] = text[i];
    }

    void put(std::size_t row, std::size_t col, char c) { put(row, col, std::string(1, c)); }

    std::string str() const {
        std::string out;
        for (std::string line : lines) {
            while (!line.empty() && line.back() == ' ') line.pop_back();
            out += line;
            out += "\n";
        }
        return out;
    }
};

inline std::string render_text(const Layout& lay) {
    const std::size_t ncols = lay.columns.size();
    if (ncols == 0) return "\n";

    std::size_t max_label = 0;
    for (const auto& a : lay.arrows) max_label = std::max(max_label, a.label.size());

    // Column gap: enough for the widest label between adjacent axes and for
    // adjacent component names not to touch.
    std::size_t gap = std::max<std::size_t>(12, max_label + 6);
    for (std::size_t i = 0; i + 1 < ncols; ++i)
        gap = std::max(gap, (lay.columns[i].size() + 1) / 2 + (lay.columns[i + 1].size() + 1) / 2 + 4);

    const std::size_t frame_pad = 2 * static_cast<std::size_t>(lay.max_frame_depth) + 2;
    const std::size_t left = std::max((lay.columns.front().size() + 1) / 2, frame_pad);
    std::vector<std::size_t> x(ncols);
    for (std::size_t i = 0; i < ncols; ++i) x[i] = left + i * gap;

    bool self_on_last = false;
    for (const auto& a : lay.arrows)
        if (a.from == a.to && a.from == ncols - 1) self_on_last = true;
    std::size_t right = std::max((lay.columns.back().size() + 1) / 2, frame_pad);
    if (self_on_last) right = std::max(right, max_label + 6);
    const std::size_t width = x.back() + right + 1;

    Canvas canvas;
    // header and axis stubs; body rows start at line 2
    for (std::size_t i = 0; i < ncols; ++i) {
        const std::string& name = lay.columns[i];
        canvas.put(0, x[i] - (name.size() - 1) / 2, name);
        canvas.put(1, x[i], '|');
        canvas.put(static_cast<std::size_t>(lay.rows) + 2, x[i], '|');
    }
    auto line_of = [](int row) { return static_cast<std::size_t>(row) + 2; };

    std::set<int> border_rows;
    for (const auto& f : lay.frames) {
        border_rows.insert(f.top);
        border_rows.insert(f.bottom);
        for (int s : f.seps) border_rows.insert(s);
    }

    for (int r = 0; r < lay.rows; ++r) {
        if (border_rows.count(r)) continue;
        for (std::size_t i = 0; i < ncols; ++i) canvas.put(line_of(r), x[i], '|');
        for (const auto& f : lay.frames)
            if (f.top < r && r < f.bottom) {
                std::size_t fl = 2 * static_cast<std::size_t>(f.depth - 1);
                canvas.put(line_of(r), fl, '|');
                canvas.put(line_of(r), width - 1 - fl, '|');
            }
    }

    for (const auto& f : lay.frames) {
        std::size_t fl = 2 * static_cast<std::size_t>(f.depth - 1);
        std::size_t fr = width - 1 - fl;
        auto horizontal = [&](int row, bool dashed, const std::string& label) {
            std::string text(fr - fl + 1, dashed ? ' ' : '-');
            text.front() = '+';
            text.back() = '+';
            if (dashed)
                for (std::size_t i = 2; i + 2 < text.size(); i += 2) text[i] = '-';
            canvas.put(line_of(row), fl, text);
            if (!label.empty()) canvas.put(line_of(row), fl + 3, " " + label + " ");
        };
        horizontal(f.top, false, f.label);
        for (int s : f.seps) horizontal(s, true, "");
        horizontal(f.bottom, false, "");
    }

    for (const auto& a : lay.arrows) {
        std::size_t row = line_of(a.row);
        if (a.from == a.to) {
            std::size_t xa = x[a.from];
            std::size_t w = a.label.size() + 4;
            std::string out(w, '-');
            std::size_t lab = (w - a.label.size()) / 2;
            for (std::size_t i = 0; i < a.label.size(); ++i) out[lab + i] = a.label[i];
            canvas.put(row, xa + 1, out + "+");
            canvas.put(row + 1, xa + 1, "<" + std::string(w - 1, '-') + "+");
            continue;
        }
        std::size_t xa = x[a.from], xb = x[a.to];
        std::size_t lo = std::min(xa, xb), hi = std::max(xa, xb);
        std::string out(hi - lo - 1, '-');
        if (xa < xb) out.back() = '>';
        else out.front() = '<';
        // center the label in the dash run, keeping the head clear
        std::size_t room = out.size() - 1;
        std::size_t lab = (xa < xb ? 0 : 1) + (room - a.label.size()) / 2;
        for (std::size_t i = 0; i < a.label.size(); ++i) out[lab + i] = a.label[i];
        canvas.put(row, lo + 1, out);
    }

    for (const auto& n : lay.notes) {
        std::size_t mid = (x.front() + x.back()) / 2;
        std::size_t start = n.text.size() / 2 >= mid ? 0 : mid - n.text.size() / 2;
        canvas.put(line_of(n.row), start, n.text);
    }

    for (const auto& b : lay.bars) {
        std::size_t bx = width + 2 + 3 * static_cast<std::size_t>(b.level - 1);
        for (int r = b.first; r <= b.last; ++r) {
            char c = (r == b.first || r == b.last) ? '+' : '|';
            canvas.put(line_of(r), bx, c);
        }
        canvas.put(line_of(b.first), bx + 2, b.label);
    }

    return canvas.str();
}

// --- svg backend ---------------------------------------------------------------

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string render_svg(const Layout& lay, unsigned px_per_row) {
    if (px_per_row == 0)
        throw Error(ErrorKind::InvalidExpr, "px_per_row must be positive");
    const int cw = 8;  // nominal character width at font-size 13
    const int rh = static_cast<int>(px_per_row);
    const int ncols = static_cast<int>(lay.columns.size());

    int max_label = 0;
    for (const auto& a : lay.arrows)
        max_label = std::max(max_label, static_cast<int>(a.label.size()));

    int gap = std::max(120, max_label * cw + 48);
    for (int i = 0; i + 1 < ncols; ++i)
        gap = std::max(gap, static_cast<int>(lay.columns[i].size() + lay.columns[i + 1].size()) *
                                    cw / 2 +
                                24);
    const int frame_pad = 6 * lay.max_frame_depth + 8;
    const int left =
        ncols ? std::max(static_cast<int>(lay.columns.front().size()) * cw / 2 + 8, frame_pad) : 0;
    std::vector<int> x(ncols);
    for (int i = 0; i < ncols; ++i) x[i] = left + i * gap;

    bool self_on_last = false;
    for (const auto& a : lay.arrows)
        if (a.from == a.to && static_cast<int>(a.from) == ncols - 1) self_on_last = true;
    int right = ncols ? std::max(static_cast<int>(lay.columns.back().size()) * cw / 2 + 8,
                                 frame_pad)
                      : 16;
    if (self_on_last) right = std::max(right, max_label * cw + 56);
    const int axes_right = (ncols ? x.back() : 0) + right;

    int bar_extent = 0;
    int max_bar_label = 0;
    for (const auto& b : lay.bars)
        max_bar_label = std::max(max_bar_label, static_cast<int>(b.label.size()));
    if (lay.max_bar_level > 0)
        bar_extent = 8 + 18 * (lay.max_bar_level - 1) + 10 + max_bar_label * cw + 8;
    const int width = axes_right + bar_extent + 8;

    const int body_top = 40;
    auto row_y = [&](int r) { return body_top + r * rh; };
    const int axes_bottom = row_y(lay.rows) + 10;
    const int height = axes_bottom + 16;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<g font-family=\"monospace\" font-size=\"13\">\n";

    for (int i = 0; i < ncols; ++i) {
        os << "<text x=\"" << x[i] << "\" y=\"24\" text-anchor=\"middle\">"
           << xml_escape(lay.columns[i]) << "</text>\n";
        os << "<line x1=\"" << x[i] << "\" y1=\"32\" x2=\"" << x[i] << "\" y2=\"" << axes_bottom
           << "\" stroke=\"black\"/>\n";
    }

    for (const auto& f : lay.frames) {
        int fl = 4 + 6 * (f.depth - 1);
        int fr = axes_right - 4 - 6 * (f.depth - 1);
        int top = row_y(f.top) + rh / 2;
        int bottom = row_y(f.bottom) + rh / 2;
        os << "<rect x=\"" << fl << "\" y=\"" << top << "\" width=\"" << fr - fl << "\" height=\""
           << bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fl + 6 << "\" y=\"" << top + 16 << "\">" << xml_escape(f.label)
           << "</text>\n";
        for (int s : f.seps)
            os << "<line x1=\"" << fl << "\" y1=\"" << row_y(s) + rh / 2 << "\" x2=\"" << fr
               << "\" y2=\"" << row_y(s) + rh / 2
               << "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (const auto& a : lay.arrows) {
        if (a.from == a.to) {
            int xa = x[a.from];
            int lw = std::max(40, static_cast<int>(a.label.size()) * cw + 16);
            int y1 = row_y(a.row) + rh / 2 + 4;
            int y2 = row_y(a.row + 1) + rh / 2;
            os << "<text x=\"" << xa + 10 << "\" y=\"" << y1 - 5 << "\">" << xml_escape(a.label)
               << "</text>\n";
            os << "<polyline points=\"" << xa << "," << y1 << " " << xa + lw << "," << y1 << " "
               << xa + lw << "," << y2 << " " << xa + 12 << "," << y2
               << "\" fill=\"none\" stroke=\"black\"/>\n";
            os << "<polygon points=\"" << xa + 2 << "," << y2 << " " << xa + 12 << "," << y2 - 4
               << " " << xa + 12 << "," << y2 + 4 << "\"/>\n";
            continue;
        }
        int xa = x[a.from], xb = x[a.to];
        int yc = row_y(a.row) + (2 * rh) / 3;
        int dir = xb > xa ? 1 : -1;
        int tail = xb - dir * 10;
        os << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << yc - 6
           << "\" text-anchor=\"middle\">" << xml_escape(a.label) << "</text>\n";
        os << "<line x1=\"" << xa << "\" y1=\"" << yc << "\" x2=\"" << tail << "\" y2=\"" << yc
           << "\" stroke=\"black\"/>\n";
        os << "<polygon points=\"" << xb - dir * 2 << "," << yc << " " << tail << "," << yc - 4
           << " " << tail << "," << yc + 4 << "\"/>\n";
    }

    for (const auto& n : lay.notes) {
        int mid = ncols ? (x.front() + x.back()) / 2 : width / 2;
        os << "<text x=\"" << mid << "\" y=\"" << row_y(n.row) + (2 * rh) / 3
           << "\" text-anchor=\"middle\">" << xml_escape(n.text) << "</text>\n";
    }

    for (const auto& b : lay.bars) {
        int bx = axes_right + 8 + 18 * (b.level - 1);
        int y1 = row_y(b.first) + 4;
        int y2 = row_y(b.last + 1) - 4;
        os << "<line x1=\"" << bx << "\" y1=\"" << y1 << "\" x2=\"" << bx << "\" y2=\"" << y2
           << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << bx + 6 << "\" y=\"" << y1 + 12 << "\">" << xml_escape(b.label)
           << "</text>\n";
    }

    os << "</g>\n</svg>\n";
    return os.str();
}

inline std::string render_layout(const Layout& lay, const RenderOptions& opts) {
    return opts.format == RenderOptions::Format::Text ? render_text(lay)
                                                      : render_svg(lay, opts.px_per_row);
}

}  // namespace render_detail

// Draws an expression as written: references appear as labeled boxes, loops
// as bars, parameters by their formal names unless instantiated.
inline std::string render_eet(const ExprPtr& e, const Document& doc, const RenderOptions& opts) {
    render_detail::LayoutBuilder builder(doc, opts);
    builder.emit(e);
    return render_detail::render_layout(builder.lay, opts);
}

// Draws one trace: arrows strictly in trace order, no frames.
inline std::string render_trace(const Trace& t, const Document& doc, const RenderOptions& opts) {
    render_detail::LayoutBuilder builder(doc, opts);
    for (const Interaction& ev : t)
        builder.arrow(ev.sender, ev.receiver, builder.message_label(ev.message, ev.args));
    return render_detail::render_layout(builder.lay, opts);
}

}  // namespace eet
