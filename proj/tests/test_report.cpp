#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "surveysim/report.hpp"

using namespace surveysim;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name) {
        path = fs::temp_directory_path() / ("surveysim_rep_" + name);
        std::error_code ec;
        fs::remove(path, ec);
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

Respondent make_respondent(const std::string& id, const std::string& country,
                           Gender gender, int year, double weight,
                           std::map<std::string, AnswerValue> answers) {
    Respondent r;
    r.id = id;
    r.country = country;
    r.gender = gender;
    r.birth_year = year;
    r.weight = weight;
    r.answers = std::move(answers);
    return r;
}

SimulationRecord valid_record(const std::string& id, const std::string& qid,
                              TemplateId tmpl, int canonical) {
    SimulationRecord rec;
    rec.respondent_id = id;
    rec.question_id = qid;
    rec.template_id = tmpl;
    rec.parse_outcome = ParsedResponse::valid(canonical, std::to_string(canonical));
    rec.canonical_value = canonical;
    return rec;
}

EvalCell cell_of(const std::string& country, const std::string& q,
                 const std::string& tmpl, const std::string& backend,
                 double mean_diff, double j) {
    EvalCell c;
    c.country = country;
    c.question_id = q;
    c.template_name = tmpl;
    c.backend_name = backend;
    c.mean_diff = mean_diff;
    c.j = j;
    c.n_pairs = 10;
    return c;
}

}  // namespace

TEST_CASE("grouping names round-trip") {
    for (auto g : {Grouping::Country, Grouping::CountryGender,
                   Grouping::CountryGenderYear})
        CHECK(grouping_from_name(grouping_name(g)) == g);
    CHECK_THROWS_AS(grouping_from_name("per_city"), std::invalid_argument);
}

TEST_CASE("coarsen collapses the finer key fields") {
    GroupKey key{"DE", Gender::Woman, 1985};
    CHECK(coarsen(key, Grouping::CountryGenderYear) == key);
    auto cg = coarsen(key, Grouping::CountryGender);
    CHECK(cg.country == "DE");
    CHECK(cg.gender == Gender::Woman);
    CHECK(cg.birth_year == 0);
    auto c = coarsen(key, Grouping::Country);
    CHECK(c.country == "DE");
    CHECK(c.birth_year == 0);
    // two different keys of one country collapse to the same coarse key
    CHECK(coarsen({"DE", Gender::Man, 1950}, Grouping::Country) == c);
}

TEST_CASE("evaluate produces one row per country") {
    std::vector<Respondent> panel = {
        make_respondent("a", "DE", Gender::Man, 1990, 1.0, {{"Q1", AnswerValue::valid(2)}}),
        make_respondent("b", "DE", Gender::Man, 1990, 1.0, {{"Q1", AnswerValue::valid(2)}}),
        make_respondent("c", "GR", Gender::Woman, 1970, 1.0,
                        {{"Q1", AnswerValue::missing(MissingKind::DontKnow)}}),
    };
    std::vector<SimulationRecord> records = {
        valid_record("a", "Q1", TemplateId::P1, 2),
        valid_record("b", "Q1", TemplateId::P1, 4),
    };

    auto cells = evaluate(panel, records, {"Q1", "s"}, PromptTemplate::p1(), "mock",
                          Grouping::CountryGenderYear);
    REQUIRE(cells.size() == 2);

    const EvalCell& de = cells[0];
    CHECK(de.country == "DE");
    CHECK_FALSE(de.zero_pairs);
    CHECK(de.n_pairs == 2);
    CHECK(de.human_mean == doctest::Approx(2.0));
    CHECK(de.model_mean == doctest::Approx(3.0));
    CHECK(de.mean_diff == doctest::Approx(1.0));
    // one subgroup: human {2:2}, model {2:1, 4:1} -> I=1, U=3
    CHECK(de.j == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const EvalCell& gr = cells[1];
    CHECK(gr.country == "GR");
    CHECK(gr.zero_pairs);
    CHECK(gr.n_pairs == 0);
    CHECK(gr.n_human_missing == 1);
}

TEST_CASE("coarser grouping never lowers the index") {
    std::vector<Respondent> panel;
    std::vector<SimulationRecord> records;
    int id = 0;
    for (int year : {1950, 1990}) {
        for (int i = 0; i < 4; ++i) {
            std::string rid = "r" + std::to_string(id++);
            // humans answer by cohort, the model mirrors the other cohort
            int human = year == 1950 ? 1 : 5;
            int model = year == 1950 ? 5 : 1;
            panel.push_back(make_respondent(rid, "DE", Gender::Man, year, 1.0,
                                            {{"Q1", AnswerValue::valid(human)}}));
            records.push_back(valid_record(rid, "Q1", TemplateId::P1, model));
        }
    }
    auto fine = evaluate(panel, records, {"Q1", "s"}, PromptTemplate::p1(), "mock",
                         Grouping::CountryGenderYear);
    auto coarse = evaluate(panel, records, {"Q1", "s"}, PromptTemplate::p1(), "mock",
                           Grouping::Country);
    REQUIRE(fine.size() == 1);
    REQUIRE(coarse.size() == 1);
    CHECK(fine[0].j == doctest::Approx(0.0));    // disjoint within every cohort
    CHECK(coarse[0].j == doctest::Approx(1.0));  // identical once pooled
    CHECK(fine[0].mean_diff == coarse[0].mean_diff);  // row stats unaffected
}

TEST_CASE("table formatting marks best and worst per row") {
    std::vector<EvalCell> cells = {
        cell_of("DE", "Q1", "P1", "alpha", 0.30, 0.80),
        cell_of("DE", "Q1", "P1", "beta", -0.10, 0.60),
        cell_of("GR", "Q1", "P1", "alpha", 0.06, 0.90),
    };
    EvalCell empty = cell_of("GR", "Q1", "P1", "beta", 0, 0);
    empty.zero_pairs = true;
    empty.n_pairs = 0;
    cells.push_back(empty);

    std::string text = format_report_tables(cells);
    CHECK(text.find("== Q1 ==") != std::string::npos);
    CHECK(text.find("mean difference (model - human)") != std::string::npos);
    CHECK(text.find("J-index") != std::string::npos);
    // mean table: beta (-0.10) is closer to zero than alpha (0.30)
    CHECK(text.find("*-0.10*") != std::string::npos);
    CHECK(text.find("[0.30]") != std::string::npos);
    // J table: alpha (0.80) beats beta (0.60)
    CHECK(text.find("*0.80*") != std::string::npos);
    CHECK(text.find("[0.60]") != std::string::npos);
    // the missing GR/beta cell renders as n/a
    CHECK(text.find("n/a") != std::string::npos);
    // average rows
    CHECK(text.find("Avg. (abs.)") != std::string::npos);
    CHECK(text.find("Avg.") != std::string::npos);

    // mean-table average for alpha: (|0.30| + |0.06|) / 2 = 0.18
    std::size_t avg_pos = text.find("Avg. (abs.)");
    std::size_t line_end = text.find('\n', avg_pos);
    std::string avg_line = text.substr(avg_pos, line_end - avg_pos);
    CHECK(avg_line.find("0.18") != std::string::npos);
}

TEST_CASE("single-backend tables carry no markers") {
    std::vector<EvalCell> cells = {cell_of("DE", "Q1", "P1", "alpha", 0.30, 0.80)};
    std::string text = format_report_tables(cells);
    CHECK(text.find('*') == std::string::npos);
    CHECK(text.find('[') == std::string::npos);
}

TEST_CASE("report files start with a timestamp header unless disabled") {
    std::vector<EvalCell> cells = {cell_of("DE", "Q1", "P1", "alpha", 0.25, 0.75)};
    TempFile csv("report.csv");
    write_report_csv(csv.path.string(), cells);
    std::string with_ts = read_file(csv.path);
    CHECK(with_ts.rfind("# generated_at ", 0) == 0);

    TempFile bare("report_bare.csv");
    write_report_csv(bare.path.string(), cells, false);
    std::string first = read_file(bare.path);
    CHECK(first.rfind("country,question,template,backend,", 0) == 0);
    CHECK(first.find("0.25") != std::string::npos);
    write_report_csv(bare.path.string(), cells, false);
    CHECK(read_file(bare.path) == first);  // byte-stable without the timestamp
}

TEST_CASE("zero-pair rows leave statistic fields empty in the CSV") {
    EvalCell empty = cell_of("GR", "Q1", "P1", "alpha", 0, 0);
    empty.zero_pairs = true;
    empty.n_pairs = 0;
    empty.n_human_missing = 3;
    TempFile csv("zero.csv");
    write_report_csv(csv.path.string(), {empty}, false);
    std::string text = read_file(csv.path);
    CHECK(text.find("GR,Q1,P1,alpha,,,,,,,0,3,0,true") != std::string::npos);
}

TEST_CASE("series rows expose per-subgroup means and spreads") {
    std::vector<Respondent> panel = {
        make_respondent("a", "DE", Gender::Man, 1990, 1.0, {{"Q1", AnswerValue::valid(1)}}),
        make_respondent("b", "DE", Gender::Man, 1990, 1.0, {{"Q1", AnswerValue::valid(5)}}),
        make_respondent("c", "DE", Gender::Woman, 1970, 2.0, {{"Q1", AnswerValue::valid(3)}}),
    };
    std::vector<SimulationRecord> records = {
        valid_record("a", "Q1", TemplateId::P1, 3),
        valid_record("b", "Q1", TemplateId::P1, 3),
        valid_record("c", "Q1", TemplateId::P1, 2),
    };
    auto rows = build_series(panel, records, {"Q1", "s"}, PromptTemplate::p1(), "mock");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].gender == Gender::Man);
    CHECK(rows[0].human_mean == doctest::Approx(3.0));
    CHECK(rows[0].human_std == doctest::Approx(2.0));
    CHECK(rows[0].model_std == doctest::Approx(0.0));
    CHECK(rows[1].gender == Gender::Woman);
    CHECK(rows[1].n_pairs == 1);

    TempFile csv("series.csv");
    write_series_csv(csv.path.string(), rows, false);
    std::string text = read_file(csv.path);
    CHECK(text.rfind("country,gender,birth_year,", 0) == 0);
    CHECK(text.find("DE,man,1990,Q1,P1,mock,3,2,3,0,2") != std::string::npos);
}

TEST_CASE("exclusion accounting CSV") {
    ExclusionRow row;
    row.question_id = "Q1";
    row.template_name = "P2";
    row.backend_name = "mock";
    row.panel_size = 100;
    row.n_pairs = 80;
    row.n_human_missing = 12;
    row.n_model_invalid = 8;
    row.render_failures = 3;
    TempFile csv("excl.csv");
    write_exclusions_csv(csv.path.string(), {row}, false);
    std::string text = read_file(csv.path);
    CHECK(text.find("Q1,P2,mock,100,80,12,8,3") != std::string::npos);
}

TEST_CASE("report tables match the frozen fixture") {
    // deterministic two-country, two-backend scenario, built by hand so the
    // fixture is stable under refactors of the pipeline upstream of reporting
    std::vector<EvalCell> cells;
    for (const std::string& q : {"Q1", "Q2"}) {
        for (const std::string& tmpl : {"P1", "P3"}) {
            int salt = (q == "Q2" ? 2 : 0) + (tmpl == "P3" ? 1 : 0);
            cells.push_back(cell_of("DE", q, tmpl, "alpha", 0.10 * salt, 0.9 - 0.05 * salt));
            cells.push_back(cell_of("DE", q, tmpl, "beta", 0.25 - 0.1 * salt, 0.7));
            cells.push_back(cell_of("GR", q, tmpl, "alpha", -0.15, 0.8));
            EvalCell gr_beta = cell_of("GR", q, tmpl, "beta", 0, 0);
            gr_beta.zero_pairs = true;
            gr_beta.n_pairs = 0;
            cells.push_back(gr_beta);
        }
    }
    std::string text = format_report_tables(cells);

    fs::path golden = fs::path(SURVEYSIM_SOURCE_DIR) / "tests/golden/report_tables.txt";
    if (std::getenv("UPDATE_GOLDEN")) {
        std::ofstream out(golden, std::ios::binary);
        out << text;
    }
    CHECK(text == read_file(golden));
}
