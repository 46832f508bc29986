#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "eet/parser.hpp"
#include "eet/render.hpp"
#include "support/fixtures.hpp"

using namespace eet;
using testsupport::fig2_trace;
using testsupport::load_car_rental;

namespace {

std::size_t arrow_heads(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '>' || c == '<') ++n;
    return n;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

// Minimal well-formedness scan: every tag closes, attributes are quoted.
bool well_formed_xml(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    bool saw_root = false;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        std::size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty()) return false;
        if (tag[0] == '?') continue;  // declaration
        std::size_t quotes = 0;
        for (char c : tag)
            if (c == '"') ++quotes;
        if (quotes % 2) return false;
        if (tag[0] == '/') {
            std::string name = tag.substr(1);
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
            continue;
        }
        if (tag.back() == '/') continue;  // self-closing
        std::string name = tag.substr(0, tag.find_first_of(" \t"));
        stack.push_back(name);
        saw_root = true;
    }
    return stack.empty() && saw_root;
}

bool pure_ascii(const std::string& text) {
    for (unsigned char c : text)
        if (c > 126 || (c < 32 && c != '\n')) return false;
    return true;
}

}  // namespace

TEST_CASE("the empty expression renders as bare axes") {
    Document doc = load_car_rental();
    RenderOptions opts;
    std::string text = render_eet(Expr::empty(), doc, opts);
    CHECK(arrow_heads(text) == 0);
    CHECK(count_of(text, "Customer") == 1);
    CHECK(count_of(text, "ReservationBranch") == 1);
    CHECK(count_of(text, "PickupBranch") == 1);
    CHECK(pure_ascii(text));
}

TEST_CASE("the success scenario shows five arrows in order") {
    Document doc = load_car_rental();
    RenderOptions opts;
    std::string text = render_eet(doc.find_eet("SuccessfulReservation"), doc, opts);
    CHECK(arrow_heads(text) == 5);
    // top-to-bottom order matches the diagram
    std::vector<std::string> labels = {"request(f, t, c)", "check_availability(f, t, c)",
                                       "available()", "offer(p)", "confirmation()"};
    std::size_t last = 0;
    for (const auto& label : labels) {
        std::size_t at = text.find(label);
        REQUIRE(at != std::string::npos);
        CHECK(at > last);
        last = at;
    }
}

TEST_CASE("rendering twice yields identical bytes") {
    Document doc = load_car_rental();
    for (auto format : {RenderOptions::Format::Text, RenderOptions::Format::Svg}) {
        RenderOptions opts;
        opts.format = format;
        std::string once = render_eet(doc.find_eet("CarReservation"), doc, opts);
        std::string again = render_eet(doc.find_eet("CarReservation"), doc, opts);
        CHECK(once == again);
    }
}

TEST_CASE("composed definitions draw frames, bars and reference boxes") {
    Document doc = load_car_rental();
    RenderOptions opts;
    std::string car = render_eet(doc.find_eet("CarReservation"), doc, opts);
    CHECK(count_of(car, "0..*") == 1);
    CHECK(count_of(car, "0..1") == 1);
    CHECK(count_of(car, "ref FailedReservation") == 1);
    CHECK(count_of(car, "ref SuccessfulReservation") == 1);
    CHECK(arrow_heads(car) == 0);  // references hide their messages

    std::string failed = render_eet(doc.find_eet("FailedReservation"), doc, opts);
    CHECK(count_of(failed, "choice") == 1);
    CHECK(count_of(failed, "ref CarNotAvailable") == 1);
    CHECK(count_of(failed, "ref CustomersReject") == 1);
}

TEST_CASE("trace rendering draws one arrow per event") {
    Document doc = load_car_rental();
    RenderOptions opts;
    CHECK(arrow_heads(render_trace({}, doc, opts)) == 0);
    CHECK(arrow_heads(render_trace(fig2_trace(), doc, opts)) == 5);
}

TEST_CASE("self-messages loop back to their own axis") {
    Document doc;
    doc.components = {"Clock"};
    doc.messages.emplace_back("tick", MessageSig{});
    RenderOptions opts;
    Trace t = {{"Clock", "Clock", "tick", {}}};
    std::string text = render_trace(t, doc, opts);
    CHECK(arrow_heads(text) == 1);
    CHECK(count_of(text, "tick()") == 1);

    opts.format = RenderOptions::Format::Svg;
    std::string svg = render_trace(t, doc, opts);
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "<polygon") == 1);
}

TEST_CASE("svg output is well-formed and counts arrows as polygons") {
    Document doc = load_car_rental();
    RenderOptions opts;
    opts.format = RenderOptions::Format::Svg;
    std::string svg = render_eet(doc.find_eet("SuccessfulReservation"), doc, opts);
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "<polygon") == 5);
    CHECK(count_of(svg, "<line") >= 3);  // at least the three axes
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);

    std::string car = render_eet(doc.find_eet("CarReservation"), doc, opts);
    CHECK(well_formed_xml(car));
    CHECK(count_of(car, "<polygon") == 0);
    CHECK(count_of(car, "<rect") == 2);  // two reference boxes
}

TEST_CASE("text output is pure ascii in every fixture rendering") {
    Document doc = load_car_rental();
    RenderOptions opts;
    for (const auto& [name, e] : doc.eets) CHECK(pure_ascii(render_eet(e, doc, opts)));
}

TEST_CASE("explicit column order is honored and validated") {
    Document doc = load_car_rental();
    RenderOptions opts;
    opts.column_order = {"PickupBranch", "ReservationBranch", "Customer"};
    std::string text = render_eet(doc.find_eet("SuccessfulReservation"), doc, opts);
    CHECK(text.find("PickupBranch") < text.find("ReservationBranch"));
    CHECK(text.find("ReservationBranch") < text.find("Customer"));

    opts.column_order = {"Customer"};  // misses components the diagram uses
    CHECK_THROWS_MATCHES(render_eet(doc.find_eet("SuccessfulReservation"), doc, opts), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.kind() == ErrorKind::UnknownComponent;
                         }));

    opts.column_order = {"Customer", "Stranger"};
    CHECK_THROWS_AS(render_eet(Expr::empty(), doc, opts), Error);
}

TEST_CASE("hiding parameters shortens labels") {
    Document doc = load_car_rental();
    RenderOptions opts;
    opts.show_params = false;
    std::string text = render_eet(doc.find_eet("SuccessfulReservation"), doc, opts);
    CHECK(count_of(text, "request") == 1);
    CHECK(count_of(text, "(") == 0);
}

TEST_CASE("guards render as notes without adding arrows") {
    auto parsed = parse(
        "domain D = { d1, d2 }\n"
        "component A, B\n"
        "msg m(x: D)\n"
        "eet G {\n"
        "  A -> B : m(k)\n"
        "  where k != d2\n"
        "}\n");
    REQUIRE(parsed.ok());
    RenderOptions opts;
    std::string text = render_eet(parsed.document->find_eet("G"), *parsed.document, opts);
    CHECK(arrow_heads(text) == 1);
    CHECK(text.find("where k != d2") != std::string::npos);
}

TEST_CASE("a zero row height is rejected for svg") {
    Document doc = load_car_rental();
    RenderOptions opts;
    opts.format = RenderOptions::Format::Svg;
    opts.px_per_row = 0;
    CHECK_THROWS_AS(render_eet(Expr::empty(), doc, opts), Error);
}
