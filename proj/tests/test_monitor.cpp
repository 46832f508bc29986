#include <catch2/catch_amalgamated.hpp>

#include "eet/analysis.hpp"
#include "eet/enumerate.hpp"
#include "eet/monitor.hpp"
#include "eet/parser.hpp"
#include "eet/tracelog.hpp"
#include "support/fixtures.hpp"

using namespace eet;
using testsupport::fig2_trace;
using testsupport::load_car_rental;

TEST_CASE("starting on the full protocol accepts the empty trace and stays live") {
    Document doc = load_car_rental();
    MonitorState s = start(resolve(doc, "CarReservation"), doc);
    CHECK(s.consumed == 0);
    CHECK(s.in_language);
    CHECK(s.extensible);
    CHECK(s.verdict() == VerdictToken::AcceptedLive);
}

TEST_CASE("starting on the success scenario is pending") {
    Document doc = load_car_rental();
    ExprPtr sr = resolve(doc, "SuccessfulReservation");
    CHECK(denote(sr, doc, 0).traces.empty());  // oracle: epsilon not accepted
    MonitorState s = start(sr, doc);
    CHECK_FALSE(s.in_language);
    CHECK(s.extensible);
    CHECK(s.verdict() == VerdictToken::Pending);
}

TEST_CASE("an empty-language description is violated from the start") {
    Document doc = load_car_rental();
    // a dead expression arises from an unsatisfiable guard
    Predicate never;
    never.atoms.push_back({Term::param("p"), false, Term::param("p")});
    ExprPtr dead = substitute(
        Expr::guarded(Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("p")}),
                      never),
        doc, {{"p", "q1"}});
    REQUIRE(dead->kind == ExprKind::Dead);
    MonitorState s = start(dead, doc);
    CHECK_FALSE(s.in_language);
    CHECK_FALSE(s.extensible);
    CHECK(s.verdict() == VerdictToken::Violated);
}

TEST_CASE("after a full success the protocol is accepted and final") {
    Document doc = load_car_rental();
    ExprPtr car = resolve(doc, "CarReservation");
    MonitorState s = start(car, doc);
    for (const auto& ev : fig2_trace()) s = step(s, ev, doc);
    CHECK(s.consumed == 5);
    CHECK(s.in_language);
    CHECK_FALSE(s.extensible);
    CHECK(s.verdict() == VerdictToken::AcceptedFinal);

    // oracle: no word up to length 9 strictly extends the success word
    auto words = denote(car, doc, 9).traces;
    for (const auto& w : words) {
        if (w.size() <= fig2_trace().size()) continue;
        CHECK_FALSE(std::equal(fig2_trace().begin(), fig2_trace().end(), w.begin()));
    }
}

TEST_CASE("an offer before a request violates the success scenario") {
    Document doc = load_car_rental();
    ExprPtr sr = resolve(doc, "SuccessfulReservation");
    MonitorState s = start(sr, doc);
    s = step(s, {"ReservationBranch", "Customer", "offer", {"q1"}}, doc);
    CHECK_FALSE(s.in_language);
    CHECK_FALSE(s.extensible);
    CHECK(s.verdict() == VerdictToken::Violated);
    // oracle: no accepted word begins with an offer
    for (const auto& w : denote(sr, doc, 5).traces) {
        REQUIRE_FALSE(w.empty());
        CHECK(w[0].message == "request");
    }
}

TEST_CASE("step counts events") {
    Document doc = load_car_rental();
    MonitorState s = start(resolve(doc, "CarReservation"), doc);
    std::size_t before = s.consumed;
    s = step(s, fig2_trace()[0], doc);
    CHECK(s.consumed == before + 1);
}

TEST_CASE("step is a pure transition") {
    Document doc = load_car_rental();
    MonitorState s = start(resolve(doc, "CarReservation"), doc);
    MonitorState once = step(s, fig2_trace()[0], doc);
    MonitorState twice = step(s, fig2_trace()[0], doc);
    CHECK(once.current == twice.current);
    CHECK(once.in_language == twice.in_language);
    CHECK(once.extensible == twice.extensible);
    CHECK(once.consumed == twice.consumed);
}

TEST_CASE("undeclared interactions are configuration errors, not violations") {
    Document doc = load_car_rental();
    MonitorState s = start(resolve(doc, "CarReservation"), doc);
    Interaction typo{"Customer", "ReservationBranch", "requets", {"p1", "p2", "compact"}};
    CHECK_THROWS_MATCHES(step(s, typo, doc), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::UnknownInteraction; }));
}

TEST_CASE("run_log reports the position of a bad event") {
    Document doc = load_car_rental();
    Trace log = fig2_trace();
    log[2] = {"Customer", "Customer", "oops", {}};
    try {
        run_log(resolve(doc, "CarReservation"), doc, log);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownInteraction);
        CHECK(std::string(e.what()).find("event 3") != std::string::npos);
    }
}

TEST_CASE("the monitor agrees with membership on random logs") {
    testsupport::Rng rng(909090);
    Document doc = testsupport::generator_doc();
    for (int i = 0; i < 60; ++i) {
        ExprPtr e = testsupport::random_bounded_expr(rng, doc);
        InteractionAutomaton a = compile(e, doc);
        Trace log = testsupport::random_trace(rng, a.alphabet, 7);
        if (a.alphabet.empty()) continue;
        RunResult run = run_log(e, doc, log);
        CHECK(run.final_state.in_language == member(log, e, doc).holds);
        CHECK(run.final_state.consumed == log.size());
    }
}

TEST_CASE("losing extensibility is permanent") {
    testsupport::Rng rng(111213);
    Document doc = testsupport::generator_doc();
    for (int i = 0; i < 60; ++i) {
        ExprPtr e = testsupport::random_bounded_expr(rng, doc);
        InteractionAutomaton a = compile(e, doc);
        if (a.alphabet.empty()) continue;
        Trace log = testsupport::random_trace(rng, a.alphabet, 7);
        RunResult run = run_log(e, doc, log);
        bool lost = !start(e, doc).extensible;
        for (const auto& v : run.verdicts) {
            if (lost) {
                CHECK_FALSE(v.extensible);
                CHECK(v.verdict == VerdictToken::Violated);
            }
            lost = lost || !v.extensible;
        }
    }
}

TEST_CASE("verdict tokens cover the flag matrix") {
    CHECK(verdict_token(true, true) == VerdictToken::AcceptedLive);
    CHECK(verdict_token(true, false) == VerdictToken::AcceptedFinal);
    CHECK(verdict_token(false, true) == VerdictToken::Pending);
    CHECK(verdict_token(false, false) == VerdictToken::Violated);
    CHECK(std::string(to_string(VerdictToken::Pending)) == "PENDING");
    CHECK(std::string(to_string(VerdictToken::Violated)) == "VIOLATED");
    CHECK(std::string(to_string(VerdictToken::AcceptedLive)) == "ACCEPTED-LIVE");
    CHECK(std::string(to_string(VerdictToken::AcceptedFinal)) == "ACCEPTED-FINAL");
}

TEST_CASE("events outside the alphabet but declared move to the sink") {
    Document doc = load_car_rental();
    ExprPtr sr = resolve(doc, "SuccessfulReservation");
    MonitorState s = start(sr, doc);
    // pay() is declared in the document but never used by the scenario
    s = step(s, {"Customer", "ReservationBranch", "pay", {}}, doc);
    CHECK(s.verdict() == VerdictToken::Violated);
}

TEST_CASE("trace logs parse with comments, blanks and positions") {
    std::string text =
        "# a log\n"
        "\n"
        "Customer -> ReservationBranch : request(p1, p2, compact)\n"
        "  PickupBranch -> ReservationBranch : available()  # inline comment\n";
    Trace t = parse_trace_log(text);
    REQUIRE(t.size() == 2);
    CHECK(t[0].message == "request");
    CHECK(t[0].args == std::vector<std::string>{"p1", "p2", "compact"});
    CHECK(t[1].args.empty());

    CHECK(parse_trace_log("").empty());
    try {
        parse_trace_log("Customer -> : request()\n");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LogSyntax);
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("formatting and parsing a log round-trips") {
    Trace t = fig2_trace();
    CHECK(parse_trace_log(format_trace_log(t)) == t);
}
