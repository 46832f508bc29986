// eetc: compiler and analysis toolkit for extended event traces.
//
// Subcommands: check, enumerate, member, refine, consistent, conjoin,
// monitor, render. Exit codes: 0 = the checked property holds (or plain
// success), 1 = the property fails (witness on stdout), 2 = usage, parse, or
// configuration error (diagnostics on stderr).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eet/analysis.hpp"
#include "eet/automaton.hpp"
#include "eet/enumerate.hpp"
#include "eet/model.hpp"
#include "eet/monitor.hpp"
#include "eet/parser.hpp"
#include "eet/render.hpp"
#include "eet/tracelog.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw eet::Error(eet::ErrorKind::UnknownName, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

eet::Document load_document(const std::string& path) {
    std::string source = read_file(path);
    eet::ParseResult result = eet::parse(source);
    if (!result.ok()) {
        for (const auto& e : result.errors)
            std::cerr << path << ":" << eet::to_string(e) << "\n";
        throw eet::Error(eet::ErrorKind::InvalidExpr,
                         std::to_string(result.errors.size()) + " error(s) in '" + path + "'");
    }
    return *std::move(result.document);
}

eet::ExprPtr load_eet(const eet::Document& doc, const std::string& name) {
    return eet::resolve(doc, name);  // throws UnknownName for missing definitions
}

eet::Trace load_trace(const std::string& path) { return eet::parse_trace_log(read_file(path)); }

void print_witness(const eet::Trace& witness) {
    std::cout << "witness:\n";
    if (witness.empty()) std::cout << "# empty trace\n";
    for (const auto& ev : witness) std::cout << eet::to_string(ev) << "\n";
}

int report_outcome(const eet::CheckReport& report, bool as_json) {
    if (as_json) {
        std::cout << eet::to_json(report).dump(2) << "\n";
    } else {
        std::cout << eet::to_string(report.question) << ": " << (report.holds ? "true" : "false")
                  << "\n";
        if (report.witness) print_witness(*report.witness);
    }
    return report.holds ? 0 : 1;
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(csv);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compiler and analysis toolkit for extended event traces"};
    app.require_subcommand(1);

    std::string file, eet_name, trace_path, out_path;
    std::string abstract_name, concrete_name, scenario_name, complete_name, eets_csv;
    std::string member_mode = "exact", consistent_mode = "segment", format = "text";
    std::string columns_csv;
    unsigned max_len = 6, px_per_row = 28;
    bool as_json = false, no_params = false;

    auto* check = app.add_subcommand("check", "parse and validate a document");
    check->add_option("file", file, "document to check")->required();

    auto* enumerate = app.add_subcommand("enumerate", "list all traces up to a length bound");
    enumerate->add_option("file", file)->required();
    enumerate->add_option("--eet", eet_name, "definition to enumerate")->required();
    enumerate->add_option("--max-len", max_len, "length bound")->required();

    auto* member = app.add_subcommand("member", "is the logged trace in the language?");
    member->add_option("file", file)->required();
    member->add_option("--eet", eet_name)->required();
    member->add_option("--trace", trace_path, "trace-log file")->required();
    member->add_option("--mode", member_mode, "exact or embed")
        ->check(CLI::IsMember({"exact", "embed"}));
    member->add_flag("--json", as_json, "emit the check report as JSON");

    auto* refine = app.add_subcommand("refine", "does the concrete refine the abstract?");
    refine->add_option("file", file)->required();
    refine->add_option("--abstract", abstract_name)->required();
    refine->add_option("--concrete", concrete_name)->required();
    refine->add_flag("--json", as_json);

    auto* consistent = app.add_subcommand("consistent", "loose scenario consistency");
    consistent->add_option("file", file)->required();
    consistent->add_option("--scenario", scenario_name)->required();
    consistent->add_option("--complete", complete_name)->required();
    consistent->add_option("--mode", consistent_mode, "segment or embed")
        ->check(CLI::IsMember({"segment", "embed"}));
    consistent->add_flag("--json", as_json);

    auto* conjoin = app.add_subcommand("conjoin", "is the conjunction non-empty?");
    conjoin->add_option("file", file)->required();
    conjoin->add_option("--eets", eets_csv, "comma-separated definition names")->required();
    conjoin->add_flag("--json", as_json);

    auto* monitor = app.add_subcommand("monitor", "replay a log, one verdict per event");
    monitor->add_option("file", file)->required();
    monitor->add_option("--eet", eet_name)->required();
    monitor->add_option("--trace", trace_path)->required();

    auto* render = app.add_subcommand("render", "draw a definition as a sequence diagram");
    render->add_option("file", file)->required();
    render->add_option("--eet", eet_name)->required();
    render->add_option("--format", format, "svg or text")
        ->check(CLI::IsMember({"svg", "text"}));
    render->add_option("-o,--output", out_path, "output file (default: stdout)");
    render->add_option("--columns", columns_csv, "explicit component order");
    render->add_option("--px-per-row", px_per_row, "vertical spacing (svg)");
    render->add_flag("--no-params", no_params, "hide message arguments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (check->parsed()) {
            eet::Document doc = load_document(file);
            std::cout << "ok: " << doc.components.size() << " components, "
                      << doc.messages.size() << " messages, " << doc.eets.size() << " eets\n";
            return 0;
        }

        if (enumerate->parsed()) {
            eet::Document doc = load_document(file);
            eet::BoundedDenotation den = eet::denote(load_eet(doc, eet_name), doc, max_len);
            std::size_t i = 0;
            for (const auto& trace : den.traces) {
                std::cout << "# trace " << ++i << ": length " << trace.size() << "\n";
                for (const auto& ev : trace) std::cout << eet::to_string(ev) << "\n";
                std::cout << "\n";
            }
            std::cout << "# " << den.traces.size() << " trace(s) of length <= " << den.bound
                      << "\n";
            return 0;
        }

        if (member->parsed()) {
            eet::Document doc = load_document(file);
            eet::ExprPtr e = load_eet(doc, eet_name);
            eet::Trace t = load_trace(trace_path);
            eet::CheckReport report;
            if (member_mode == "exact") {
                report = eet::member(t, e, doc);
            } else {
                for (const auto& ev : t) eet::check_declared(doc, ev);
                report = eet::loose_consistent(e, eet::trace_to_expr(t), eet::LooseMode::Embed, doc);
            }
            return report_outcome(report, as_json);
        }

        if (refine->parsed()) {
            eet::Document doc = load_document(file);
            eet::CheckReport report = eet::refines(load_eet(doc, concrete_name),
                                                   load_eet(doc, abstract_name), doc);
            return report_outcome(report, as_json);
        }

        if (consistent->parsed()) {
            eet::Document doc = load_document(file);
            auto mode = consistent_mode == "segment" ? eet::LooseMode::Segment
                                                     : eet::LooseMode::Embed;
            eet::CheckReport report = eet::loose_consistent(
                load_eet(doc, scenario_name), load_eet(doc, complete_name), mode, doc);
            return report_outcome(report, as_json);
        }

        if (conjoin->parsed()) {
            eet::Document doc = load_document(file);
            std::vector<eet::ExprPtr> es;
            for (const auto& name : split_csv(eets_csv)) es.push_back(load_eet(doc, name));
            if (es.empty())
                throw eet::Error(eet::ErrorKind::InvalidExpr, "--eets names no definitions");
            return report_outcome(eet::conjoin_nonempty(es, doc), as_json);
        }

        if (monitor->parsed()) {
            eet::Document doc = load_document(file);
            eet::ExprPtr e = load_eet(doc, eet_name);
            eet::Trace log = load_trace(trace_path);
            eet::RunResult run = eet::run_log(e, doc, log);
            for (const auto& v : run.verdicts) {
                nlohmann::ordered_json j;
                j["i"] = v.index;
                j["event"] = eet::to_string(v.event);
                j["verdict"] = eet::to_string(v.verdict);
                std::cout << j.dump() << "\n";
            }
            return run.final_state.in_language ? 0 : 1;
        }

        if (render->parsed()) {
            eet::Document doc = load_document(file);
            eet::ExprPtr e = doc.find_eet(eet_name);  // draw as written, refs as boxes
            if (!e)
                throw eet::Error(eet::ErrorKind::UnknownName,
                                 "eet '" + eet_name + "' is not defined");
            eet::RenderOptions opts;
            opts.format = format == "svg" ? eet::RenderOptions::Format::Svg
                                          : eet::RenderOptions::Format::Text;
            opts.column_order = split_csv(columns_csv);
            opts.show_params = !no_params;
            opts.px_per_row = px_per_row;
            std::string bytes = eet::render_eet(e, doc, opts);
            if (out_path.empty()) {
                std::cout << bytes;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                if (!out)
                    throw eet::Error(eet::ErrorKind::UnknownName,
                                     "cannot write '" + out_path + "'");
                out << bytes;
            }
            return 0;
        }
    } catch (const eet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
