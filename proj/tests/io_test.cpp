#include "checks.hpp"

#include "mbsdao/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace mbsdao;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("event logs round-trip through jsonl") {
    Ledger l;
    AccountId a = l.create_account();
    AccountId b = l.create_account();
    l.fund(a, 50'000);
    l.fund(b, 50'000);
    ClassId deeds = l.register_class("deed", TokenKind::non_fungible, std::nullopt,
                                     Rate::from_nano(100'000'000), a);
    TokenRef t = l.mint_nft(deeds, a, "parcel");
    l.advance_time(1'234);
    l.transfer_nft(t, a, b, 10'000); // primary: no royalty
    l.transfer_nft(t, b, a, 9'000);  // secondary: royalty field set
    l.log_status(deeds, t.serial, a, 3);

    std::string text = events_to_jsonl(l.log());
    CHECK(std::count(text.begin(), text.end(), '\n') ==
          static_cast<std::ptrdiff_t>(l.log().size()));

    std::istringstream in(text);
    std::vector<TransferEvent> parsed = events_from_jsonl(in);
    REQUIRE(parsed.size() == l.log().size());
    bool saw_royalty = false;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        const TransferEvent& x = l.log()[i];
        const TransferEvent& y = parsed[i];
        CHECK(y.seq == x.seq);
        CHECK(y.block_time == x.block_time);
        CHECK(y.kind == x.kind);
        CHECK(y.cls == x.cls);
        CHECK(y.serial == x.serial);
        CHECK(y.amount == x.amount);
        CHECK(y.from == x.from);
        CHECK(y.to == x.to);
        CHECK(y.price == x.price);
        CHECK(y.royalty == x.royalty);
        saw_royalty = saw_royalty || x.royalty != 0;
    }
    CHECK(saw_royalty);
}

TEST_CASE("the jsonl reader skips blanks and rejects garbage") {
    Ledger l;
    AccountId a = l.create_account();
    l.fund(a, 100);
    std::string line = event_to_json_text(l.log()[0]);

    std::istringstream in(line + "\r\n\n" + line + "\n");
    CHECK(events_from_jsonl(in).size() == 2);

    std::istringstream bad("not json\n");
    CHECK_ERR(events_from_jsonl(bad), Err::InvalidArgument);
    std::istringstream arr("[1,2]\n");
    CHECK_ERR(events_from_jsonl(arr), Err::InvalidArgument);
    std::istringstream missing("{\"seq\":1}\n");
    CHECK_THROWS(events_from_jsonl(missing));
}

TEST_CASE("amortization schedules export as csv") {
    AnnuityTerms t;
    t.principal = 100'000; // 1,000.00, zero-rate so every row is exact
    t.nominal_rate = Rate::from_nano(0);
    t.periods_per_year = 12;
    t.n_periods = 4;

    std::vector<std::string> lines = lines_of(schedule_csv(ann_schedule(t)));
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "period,due_time,event,interest,principal,payment,balance");
    CHECK(lines[1] == "0,0,IED,0.00,1000.00,1000.00,1000.00");
    CHECK(lines[2] == "1,2628000,scheduled_payment,0.00,250.00,250.00,750.00");
    CHECK(lines[5] == "4,10512000,maturity,0.00,250.00,250.00,0.00");
}

TEST_CASE("loan histories export as csv") {
    ScenarioConfig cfg;
    cfg.seed = 7;
    cfg.horizon_months = 3;
    cfg.n_loans = 1;
    cfg.loans.n_periods = 12;
    Scenario s(cfg);
    s.run();

    const MortgageAccount& m = s.book().account(s.loan_ids()[0]);
    REQUIRE(m.history.size() >= 3);
    std::vector<std::string> lines = lines_of(loan_history_csv(m));
    REQUIRE(lines.size() == m.history.size() + 1);
    CHECK(lines[0] == "period,due,paid,arrears,state");
    for (std::size_t i = 0; i < m.history.size(); ++i) {
        const MortgageAccount::HistoryRow& row = m.history[i];
        std::ostringstream want;
        want << row.period << ',' << format_money(row.due) << ',' << format_money(row.paid)
             << ',' << format_money(row.arrears) << ',' << to_string(row.state);
        CHECK(lines[i + 1] == want.str());
    }
}

TEST_CASE("period reports export as csv and jsonl") {
    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.horizon_months = 6;
    cfg.n_loans = 3;
    cfg.loans.n_periods = 12;
    cfg.scheme = SchemeKind::waterfall;
    cfg.cpr_annual = 0.10;
    Scenario s(cfg);
    const std::vector<PeriodReport>& reports = s.run();

    std::vector<std::string> csv = lines_of(period_reports_csv(reports));
    REQUIRE(csv.size() == reports.size() + 1);
    for (const std::string& line : csv)
        CHECK(std::count(line.begin(), line.end(), ',') == 18);

    std::vector<std::string> jsonl = lines_of(period_reports_jsonl(reports));
    REQUIRE(jsonl.size() == reports.size());
    for (std::size_t i = 0; i < jsonl.size(); ++i) {
        nlohmann::json j = nlohmann::json::parse(jsonl[i]);
        CHECK(j.at("month").get<int>() == reports[i].month);
        CHECK(j.at("distributed").get<Money>() == reports[i].distributed);
        CHECK(j.at("tranche_cash").size() == 3);
        CHECK(j.at("events").size() == reports[i].events.size());
        int census_total = 0;
        for (const auto& [state, count] : j.at("census").items())
            census_total += count.get<int>();
        CHECK(census_total == 3);
    }
}

TEST_CASE("tranche reports export as csv") {
    std::vector<TrancheReportRow> rows{
        {1, "senior", 1'000, 2'000, 0, 70'000'000},
        {1, "junior, first-loss", 500, 0, 2'500, 0},
    };
    std::vector<std::string> lines = lines_of(tranche_report_csv(rows));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "period,tranche,interest_paid,principal_paid,writedown,outstanding");
    CHECK(lines[1] == "1,senior,10.00,20.00,0.00,700000.00");
    CHECK(lines[2] == "1,\"junior, first-loss\",5.00,0.00,25.00,0.00");
}

TEST_CASE("fungible balances export as csv") {
    Ledger l;
    AccountId a = l.create_account();
    AccountId b = l.create_account();
    l.fund(a, 12'345);
    ClassId shares = l.register_class("shares", TokenKind::fungible, 1'000);
    l.mint_fungible(shares, b, 250);
    l.fund(b, 10);
    l.pay(b, a, 10); // b's stable position zeroes out and is omitted

    std::vector<std::string> lines = lines_of(balances_csv(l));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "class,name,account,balance");
    CHECK(lines[1] == "0,stable,0x000001,123.55");
    CHECK(lines[2] == std::to_string(shares) + ",shares,0x000002,2.50");
}

TEST_CASE("wash flags export as csv") {
    WashReport r;
    r.window_seconds = 3'600;
    r.flags.push_back(WashFlag{4, 9, 7, 11, 2, 3, 600, 2'400});
    r.flagged_volume = 2'400;
    r.clean_volume = 5'100;

    std::vector<std::string> lines = lines_of(wash_report_csv(r));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "seq_a,seq_b,class,serial,origin,counterparty,gap_seconds,flagged_volume");
    CHECK(lines[1] == "4,9,7,11,0x000002,0x000003,600,24.00");
}

TEST_CASE("ispo series export as csv") {
    IspoSeries s = ispo_inflows({1'000.0, 2'000.0}, 0.99, {0.45, 0.5});
    std::vector<std::string> lines = lines_of(ispo_csv(s));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "epoch,rewards,retention,inflow,price,inflow_quote");
    CHECK(lines[1] == "0,1000,0.99,990,0.45,445.5");
    CHECK(lines[2] == "1,2000,0.99,1980,0.5,990");
}

TEST_CASE("write_atomic replaces files without leaving temps behind") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "mbsdao-io-test";
    fs::remove_all(dir);
    fs::path target = dir / "nested" / "out.csv";

    write_atomic(target, "one\n");
    CHECK(slurp(target) == "one\n");
    write_atomic(target, "two\n");
    CHECK(slurp(target) == "two\n");

    fs::path tmp = target;
    tmp += ".tmp";
    CHECK(!fs::exists(tmp));
    fs::remove_all(dir);
}
