#include <catch2/catch_amalgamated.hpp>

#include "eet/model.hpp"
#include "eet/parser.hpp"
#include "support/fixtures.hpp"

using namespace eet;
using testsupport::load_car_rental;

TEST_CASE("free_params on Empty is empty") {
    Document doc = load_car_rental();
    CHECK(free_params(Expr::empty(), doc).empty());
}

TEST_CASE("free_params of the request message lists all three parameters") {
    Document doc = load_car_rental();
    ExprPtr request = Expr::msg("Customer", "ReservationBranch", "request",
                                {Term::param("f"), Term::param("t"), Term::param("c")});
    auto params = free_params(request, doc);
    REQUIRE(params.size() == 3);
    CHECK(params.at("f") == "Period");
    CHECK(params.at("t") == "Period");
    CHECK(params.at("c") == "CarType");
}

TEST_CASE("free_params merges shared occurrences into one entry") {
    Document doc = load_car_rental();
    ExprPtr offer = Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("p")});
    ExprPtr twice = Expr::seq(offer, offer);
    auto params = free_params(twice, doc);
    REQUIRE(params.size() == 1);
    CHECK(params.at("p") == "Price");
}

TEST_CASE("free_params excludes parameters of referenced definitions") {
    Document doc = load_car_rental();
    CHECK(free_params(Expr::ref("SuccessfulReservation"), doc).empty());
}

TEST_CASE("free_params rejects undeclared or misused messages") {
    Document doc = load_car_rental();
    ExprPtr unknown = Expr::msg("Customer", "ReservationBranch", "book", {});
    CHECK_THROWS_MATCHES(free_params(unknown, doc), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::UnknownMessage; }));

    ExprPtr wrong_arity = Expr::msg("Customer", "ReservationBranch", "request", {Term::param("f")});
    CHECK_THROWS_MATCHES(free_params(wrong_arity, doc), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::ArityMismatch; }));

    // same name with two domains
    ExprPtr conflict =
        Expr::seq(Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("f")}),
                  Expr::msg("Customer", "ReservationBranch", "request",
                            {Term::param("f"), Term::param("t"), Term::param("c")}));
    CHECK_THROWS_MATCHES(free_params(conflict, doc), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::DomainMismatch; }));
}

TEST_CASE("substitute replaces parameters by constants") {
    Document doc = load_car_rental();
    ExprPtr request = Expr::msg("Customer", "ReservationBranch", "request",
                                {Term::param("f"), Term::param("t"), Term::param("c")});
    ExprPtr grounded =
        substitute(request, doc, {{"f", "p1"}, {"t", "p2"}, {"c", "compact"}});
    ExprPtr expected = Expr::msg("Customer", "ReservationBranch", "request",
                                 {Term::constant("p1"), Term::constant("p2"),
                                  Term::constant("compact")});
    CHECK(equal(grounded, expected));
    CHECK(free_params(grounded, doc).empty());
}

TEST_CASE("an unsatisfiable guard collapses to the empty language") {
    Document doc = load_car_rental();
    ExprPtr body = Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("f")});
    Predicate never;
    never.atoms.push_back({Term::param("f"), false, Term::param("f")});  // f != f
    ExprPtr guarded = Expr::guarded(body, never);
    ExprPtr out = substitute(guarded, doc, {{"f", "q1"}});
    CHECK(out->kind == ExprKind::Dead);
}

TEST_CASE("a satisfied guard drops") {
    Document doc = load_car_rental();
    ExprPtr body = Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("f")});
    Predicate eq;
    eq.atoms.push_back({Term::param("f"), true, Term::constant("q1")});
    ExprPtr out = substitute(Expr::guarded(body, eq), doc, {{"f", "q1"}});
    CHECK(equal(out, Expr::msg("ReservationBranch", "Customer", "offer", {Term::constant("q1")})));
}

TEST_CASE("substitute validates the binding") {
    Document doc = load_car_rental();
    ExprPtr offer = Expr::msg("ReservationBranch", "Customer", "offer", {Term::param("p")});
    CHECK_THROWS_MATCHES(substitute(offer, doc, {}), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::IncompleteBinding; }));
    CHECK_THROWS_MATCHES(substitute(offer, doc, {{"p", "compact"}}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.kind() == ErrorKind::DomainMismatch;
                         }));
}

TEST_CASE("substitute is idempotent once no free parameters remain") {
    testsupport::Rng rng(7001);
    Document doc = testsupport::generator_doc();
    for (int i = 0; i < 60; ++i) {
        ExprPtr e = testsupport::random_expr(rng, doc);
        auto params = free_params(e, doc);
        Binding binding;
        for (const auto& [name, domain] : params) binding[name] = doc.find_domain(domain)->front();
        ExprPtr closed = substitute(e, doc, binding);
        CHECK(free_params(closed, doc).empty());
        CHECK(equal(substitute(closed, doc, binding), closed));
        CHECK(equal(substitute(closed, doc, {}), closed));
    }
}

TEST_CASE("independently parsed copies are structurally equal") {
    auto text = testsupport::read_file(testsupport::fixture_path("car_rental.eet"));
    auto first = parse(text);
    auto second = parse(text);
    REQUIRE(first.ok());
    REQUIRE(second.ok());
    CHECK(*first.document == *second.document);
    for (const auto& [name, e] : first.document->eets)
        CHECK(equal(e, second.document->find_eet(name)));
}

TEST_CASE("the fixture document passes the standalone validator") {
    Document doc = load_car_rental();
    CHECK(validate(doc).empty());
}

TEST_CASE("the validator reports broken documents") {
    Document doc = load_car_rental();
    doc.domains.emplace_back("Empty", std::vector<std::string>{});
    doc.eets.emplace_back("Loose", Expr::ref("Nowhere"));
    auto problems = validate(doc);
    REQUIRE(problems.size() >= 2);
}

TEST_CASE("check_declared accepts fixture events and rejects others") {
    Document doc = load_car_rental();
    for (const auto& ev : testsupport::fig2_trace()) CHECK_NOTHROW(check_declared(doc, ev));
    Interaction bad{"Customer", "ReservationBranch", "request", {"p1", "p2", "wrong"}};
    CHECK_THROWS_MATCHES(check_declared(doc, bad), Error, Catch::Matchers::Predicate<Error>([](
        const Error& e) { return e.kind() == ErrorKind::UnknownInteraction; }));
    Interaction unknown{"Nobody", "Customer", "request", {"p1", "p2", "compact"}};
    CHECK_THROWS_AS(check_declared(doc, unknown), Error);
}

TEST_CASE("trace_to_expr denotes exactly the one trace") {
    Trace fig2 = testsupport::fig2_trace();
    ExprPtr e = trace_to_expr(fig2);
    Document doc = load_car_rental();
    CHECK(free_params(e, doc).empty());
    CHECK(trace_to_expr({})->kind == ExprKind::Empty);
}
