// Integration tests for the command-line binary. The CLI is a thin shell:
// every command's output must be reproducible by library calls alone, so
// these tests run the real executable (path injected at build time) and
// compare its files byte-for-byte against the library formatters. They also
// pin the exit-code contract: 0 success, 1 domain error, 2 usage error.
#include "doctest.h"

#include "mbsdao/dao.hpp"
#include "mbsdao/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace mbsdao;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mbsdao_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const TempDir& dir, const std::string& args,
                  const std::string& stdin_path = {}) {
    fs::path out = dir.path / "stdout.txt";
    fs::path err = dir.path / "stderr.txt";
    std::string cmd = std::string(MBSDAO_CLI_PATH) + " " + args;
    cmd += stdin_path.empty() ? " < /dev/null" : " < " + stdin_path;
    cmd += " > " + out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

TransferEvent sale(std::uint64_t seq, std::int64_t t, Serial serial, AccountId from, AccountId to,
                   Money price) {
    TransferEvent e;
    e.seq = seq;
    e.block_time = t;
    e.kind = EventKind::sale;
    e.cls = 7;
    e.serial = serial;
    e.from = from;
    e.to = to;
    e.price = price;
    return e;
}

} // namespace

TEST_CASE("usage errors exit 2 with a synopsis on stderr") {
    TempDir d;

    RunResult bare = run_cli(d, "");
    CHECK(bare.code == 2);
    CHECK(bare.err.find("usage: mbsdao") != std::string::npos);

    CHECK(run_cli(d, "frobnicate").code == 2);
    CHECK(run_cli(d, "simulate --seed 1 --frobnicate").code == 2);
    CHECK(run_cli(d, "wash-detect --window -5").code == 2);

    RunResult no_seed = run_cli(d, "simulate");
    CHECK(no_seed.code == 2);
    CHECK(no_seed.err.find("--seed") != std::string::npos);
    CHECK(no_seed.err.find("usage: mbsdao") != std::string::npos);

    // a nonexistent input path is a usage error, not a domain error
    CHECK(run_cli(d, "simulate --seed 1 --config " + (d.path / "nope.json").string()).code == 2);

    CHECK(run_cli(d, "--help").code == 0);
    CHECK(run_cli(d, "simulate --help").code == 0);
}

TEST_CASE("config content errors exit 1") {
    TempDir d;
    fs::path cfg = d.path / "s.json";

    write_file(cfg, "{\"cpr_annual\": 2.0}");
    RunResult bad = run_cli(d, "simulate --seed 1 --config " + cfg.string());
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);

    write_file(cfg, "{\"cpr_annuall\": 0.1}");
    RunResult typo = run_cli(d, "simulate --seed 1 --config " + cfg.string());
    CHECK(typo.code == 1);
    CHECK(typo.err.find("unknown key") != std::string::npos);

    write_file(cfg, "not json at all");
    CHECK(run_cli(d, "simulate --seed 1 --config " + cfg.string()).code == 1);

    write_file(cfg, "{\"principal\": \"1000.00\", \"rate_annual\": 0.05}");
    CHECK(run_cli(d, "originate --config " + cfg.string()).code == 1); // missing n_periods
}

TEST_CASE("simulate is deterministic and a thin shell over the library") {
    TempDir d;
    fs::path cfg = d.path / "s.json";
    write_file(cfg, R"({"horizon_months": 6, "n_loans": 4, "scheme": "waterfall",
                        "cpr_annual": 0.08, "cdr_annual": 0.02})");

    std::string base = "simulate --seed 42 --config " + cfg.string() + " --out ";
    RunResult r1 = run_cli(d, base + (d.path / "a").string());
    RunResult r2 = run_cli(d, base + (d.path / "b").string());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(r1.out == r2.out);

    // two runs with the same seed produce byte-identical artifacts
    for (const char* name : {"events.jsonl", "period_reports.csv", "tranches.csv", "lag.txt",
                             "summary.json"}) {
        std::string a = slurp(d.path / "a" / name);
        CHECK(!a.empty());
        CHECK(a == slurp(d.path / "b" / name));
    }

    // and the artifacts equal what direct library calls produce
    ScenarioConfig cfg_lib;
    cfg_lib.seed = 42;
    cfg_lib.horizon_months = 6;
    cfg_lib.n_loans = 4;
    cfg_lib.scheme = SchemeKind::waterfall;
    cfg_lib.cpr_annual = 0.08;
    cfg_lib.cdr_annual = 0.02;
    Scenario s(cfg_lib);
    const std::vector<PeriodReport>& reports = s.run();
    CHECK(slurp(d.path / "a" / "events.jsonl") == events_to_jsonl(s.ledger().log()));
    CHECK(slurp(d.path / "a" / "period_reports.csv") == period_reports_csv(reports));
    CHECK(slurp(d.path / "a" / "tranches.csv") ==
          tranche_report_csv(s.securitizer().report(s.pool_id())));

    // the jsonl period-report format is selectable
    RunResult r3 = run_cli(d, base + (d.path / "c").string() + " --format jsonl");
    REQUIRE(r3.code == 0);
    CHECK(slurp(d.path / "c" / "period_reports.jsonl") == period_reports_jsonl(reports));
    CHECK(!fs::exists(d.path / "c" / "period_reports.csv"));
}

TEST_CASE("originate writes the library's amortization schedule verbatim") {
    TempDir d;
    fs::path cfg = d.path / "terms.json";
    write_file(cfg, R"({"principal": "100000.00", "rate_annual": 0.06,
                        "periods_per_year": 12, "n_periods": 360})");

    RunResult r = run_cli(d, "originate --config " + cfg.string() + " --out " +
                                 (d.path / "o").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("payment 599.55 x 360 periods") != std::string::npos);

    AnnuityTerms terms;
    terms.principal = 10'000'000;
    terms.nominal_rate = Rate::from_double(0.06);
    terms.periods_per_year = 12;
    terms.n_periods = 360;
    CHECK(slurp(d.path / "o" / "schedule.csv") == schedule_csv(ann_schedule(terms)));
    CHECK(!slurp(d.path / "o" / "events.jsonl").empty());
}

TEST_CASE("wash-detect reads stdin and applies the pairing window") {
    TempDir d;
    std::vector<TransferEvent> log;
    log.push_back(sale(0, 1'000, 55, 1, 2, 1'200));
    log.push_back(sale(1, 1'180, 55, 2, 1, 1'200)); // reversal 180 s later
    fs::path events = d.path / "events.jsonl";
    write_file(events, events_to_jsonl(log));

    RunResult wide = run_cli(d, "wash-detect --window 3600 --out " + (d.path / "w").string(),
                             events.string());
    REQUIRE(wide.code == 0);
    CHECK(wide.out.find("pairs flagged: 1") != std::string::npos);
    CHECK(wide.out.find("flagged volume: 24.00") != std::string::npos);
    CHECK(wide.out.find("clean volume: 0.00") != std::string::npos);
    CHECK(slurp(d.path / "w" / "wash.csv") == wash_report_csv(detect_wash_sales(log, 3'600)));

    RunResult narrow = run_cli(d, "wash-detect --window 60 --out " + (d.path / "n").string(),
                               events.string());
    REQUIRE(narrow.code == 0);
    CHECK(narrow.out.find("pairs flagged: 0") != std::string::npos);
    CHECK(narrow.out.find("clean volume: 24.00") != std::string::npos);

    // --in reads the same log from a file instead of stdin
    RunResult from_file = run_cli(d, "wash-detect --window 3600 --in " + events.string() +
                                         " --out " + (d.path / "f").string());
    REQUIRE(from_file.code == 0);
    CHECK(from_file.out == wide.out);
}

TEST_CASE("dao session verbs replay the script and persist it") {
    TempDir d;
    fs::path session = d.path / "session.json";
    write_file(session, R"({"setup": {"accounts": 3,
                                      "classes": [{"name": "gov", "votes_per_token": 1}],
                                      "contributions": [{"account": 1, "amount": "600.00"},
                                                        {"account": 2, "amount": "400.00"}]},
                            "ops": []})");
    std::string base = " --session " + session.string();

    RunResult p = run_cli(d, "dao propose" + base +
                                 " --kind set_parameter --proposer 1"
                                 " --key quorum_ppm --value 300000");
    REQUIRE(p.code == 0);
    CHECK(p.out.find("proposal 1 (set_parameter): open") != std::string::npos);

    REQUIRE(run_cli(d, "dao vote" + base + " --proposal 1 --account 1 --choice yes").code == 0);
    REQUIRE(run_cli(d, "dao vote" + base + " --proposal 1 --account 2 --choice no").code == 0);

    RunResult e = run_cli(d, "dao execute" + base + " --proposal 1 --at 90000");
    REQUIRE(e.code == 0);
    CHECK(e.out.find("proposal 1 (set_parameter): executed") != std::string::npos);
    CHECK(e.out.find("yes 600000 no 400000") != std::string::npos);

    // the session file accumulated the ops
    std::string text = slurp(session);
    CHECK(text.find("\"propose\"") != std::string::npos);
    CHECK(text.find("\"vote\"") != std::string::npos);
    CHECK(text.find("\"execute\"") != std::string::npos);

    // same script through direct library calls reaches the same state
    Ledger ledger;
    AccountId a1 = ledger.create_account();
    AccountId a2 = ledger.create_account();
    ledger.create_account();
    ledger.fund(a1, 60'000);
    ledger.fund(a2, 40'000);
    Dao dao(ledger, {{"gov", 1, std::nullopt}}, {{a1, 60'000}, {a2, 40'000}}, DaoParameters{},
            1'000'000);
    dao.install_royalty_tracking(ledger);
    std::uint64_t id = dao.propose_parameter(ledger, a1, "quorum_ppm", 300'000);
    dao.vote(ledger, id, a1, VoteChoice::yes);
    dao.vote(ledger, id, a2, VoteChoice::no);
    ledger.advance_time(90'000);
    dao.execute(ledger, id);
    CHECK(dao.parameters().quorum_ppm == 300'000);
    TallyResult t = dao.tally_result(id);
    CHECK(t.yes == 600'000);
    CHECK(t.no == 400'000);

    // a vote on a missing proposal is a domain error, and the failed op
    // must not be persisted
    std::string before = slurp(session);
    CHECK(run_cli(d, "dao vote" + base + " --proposal 9 --account 1 --choice yes").code == 1);
    CHECK(slurp(session) == before);
}

TEST_CASE("ispo and lag-report match the library formatters") {
    TempDir d;
    fs::path cfg = d.path / "ispo.json";
    write_file(cfg, R"({"rewards": [1000.0, 2000.0], "retention": 0.99,
                        "prices": [0.45, 0.5]})");
    RunResult r = run_cli(d, "ispo --config " + cfg.string() + " --out " +
                                 (d.path / "i").string());
    REQUIRE(r.code == 0);
    IspoSeries series = ispo_inflows({1'000.0, 2'000.0}, 0.99, {0.45, 0.5});
    CHECK(slurp(d.path / "i" / "ispo.csv") == ispo_csv(series));
    CHECK(r.out.find("total inflow 2970") != std::string::npos);

    RunResult lag = run_cli(d, "lag-report --seed 9 --out " + (d.path / "l").string());
    REQUIRE(lag.code == 0);
    CHECK(lag.out.find("onchain") != std::string::npos);
    CHECK(lag.out.find("traditional") != std::string::npos);
    CHECK(lag.out == slurp(d.path / "l" / "lag.txt"));
}

TEST_CASE("export dumps the full scenario inventory") {
    TempDir d;
    fs::path cfg = d.path / "s.json";
    write_file(cfg, R"({"seed": 7, "horizon_months": 4, "n_loans": 3})");
    fs::path out = d.path / "e";
    RunResult r = run_cli(d, "export --config " + cfg.string() + " --out " + out.string());
    REQUIRE(r.code == 0);

    for (const char* name :
         {"events.jsonl", "period_reports.csv", "period_reports.jsonl", "balances.csv",
          "lag.txt", "summary.json"})
        CHECK(fs::exists(out / name));

    ScenarioConfig cfg_lib;
    cfg_lib.seed = 7;
    cfg_lib.horizon_months = 4;
    cfg_lib.n_loans = 3;
    Scenario s(cfg_lib);
    s.run();
    CHECK(slurp(out / "balances.csv") == balances_csv(s.ledger()));
    for (std::uint64_t id : s.loan_ids()) {
        fs::path loan = out / "loans" / ("loan_" + std::to_string(id) + ".csv");
        REQUIRE(fs::exists(loan));
        CHECK(slurp(loan) == loan_history_csv(s.book().account(id)));
    }
}
