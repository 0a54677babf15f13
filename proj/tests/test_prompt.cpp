#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "surveysim/prompt.hpp"

using namespace surveysim;

namespace {

std::string read_golden(const std::string& name) {
    std::string path = std::string(SURVEYSIM_SOURCE_DIR) + "/tests/golden/" + name;
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

CountryNames test_countries() {
    return CountryNames::load(std::string(SURVEYSIM_SOURCE_DIR) + "/assets/countries.csv");
}

Respondent man_1990_de() {
    Respondent r;
    r.id = "r1";
    r.country = "DE";
    r.gender = Gender::Man;
    r.birth_year = 1990;
    r.weight = 1.0;
    return r;
}

const Question kQ1{"Q1", "Gays and lesbians free to live life as they wish"};

}  // namespace

TEST_CASE("golden prompt texts") {
    auto countries = test_countries();

    SUBCASE("P1") {
        auto prompt = render(man_1990_de(), kQ1, PromptTemplate::p1(), countries);
        CHECK(prompt.text == read_golden("p1.txt"));
        CHECK(prompt.template_id == TemplateId::P1);
        CHECK(prompt.respondent_id == "r1");
        CHECK(prompt.question_id == "Q1");
    }
    SUBCASE("P2 inserts the occupation sentence") {
        Respondent r = man_1990_de();
        r.gender = Gender::Woman;
        r.isco_label = "Waiters";
        auto prompt = render(r, kQ1, PromptTemplate::p2(), countries);
        CHECK(prompt.text == read_golden("p2.txt"));
    }
    SUBCASE("P3 reverses the option list only") {
        auto prompt = render(man_1990_de(), kQ1, PromptTemplate::p3(), countries);
        CHECK(prompt.text == read_golden("p3.txt"));
    }
}

TEST_CASE("render is pure") {
    auto countries = test_countries();
    auto a = render(man_1990_de(), kQ1, PromptTemplate::p1(), countries);
    auto b = render(man_1990_de(), kQ1, PromptTemplate::p1(), countries);
    CHECK(a.text == b.text);
}

TEST_CASE("render error paths") {
    auto countries = test_countries();
    CHECK_THROWS_AS(render(man_1990_de(), kQ1, PromptTemplate::p2(), countries),
                    MissingOccupation);
    Respondent r = man_1990_de();
    r.country = "XX";
    CHECK_THROWS_AS(render(r, kQ1, PromptTemplate::p1(), countries),
                    UnknownCountryDisplayName);
}

TEST_CASE("to_canonical") {
    CHECK(to_canonical(PromptTemplate::p1(), 2) == 2);
    CHECK(to_canonical(PromptTemplate::p2(), 4) == 4);
    CHECK(to_canonical(PromptTemplate::p3(), 5) == 1);
    CHECK(to_canonical(PromptTemplate::p3(), 3) == 3);
    CHECK_THROWS_AS(to_canonical(PromptTemplate::p1(), 0), OutOfRangeReply);
    CHECK_THROWS_AS(to_canonical(PromptTemplate::p3(), 6), OutOfRangeReply);
}

TEST_CASE("reversal map is an involution and stays in range") {
    for (int k = 1; k <= 5; ++k) {
        int once = to_canonical(PromptTemplate::p3(), k);
        CHECK(once >= 1);
        CHECK(once <= 5);
        CHECK(to_canonical(PromptTemplate::p3(), once) == k);
        for (auto tmpl : {PromptTemplate::p1(), PromptTemplate::p2(), PromptTemplate::p3()}) {
            int v = to_canonical(tmpl, k);
            CHECK(v >= 1);
            CHECK(v <= 5);
            CHECK(from_canonical(tmpl, v) == k);
        }
    }
}

TEST_CASE("option labels follow the template order") {
    auto p1 = option_labels(PromptTemplate::p1());
    CHECK(p1[0] == "Agree strongly");
    CHECK(p1[4] == "Disagree strongly");
    auto p3 = option_labels(PromptTemplate::p3());
    CHECK(p3[0] == "Disagree strongly");
    CHECK(p3[4] == "Agree strongly");
    CHECK(p3[2] == "Neither agree nor disagree");
}
