#include "mbsdao/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace mbsdao {

using json = nlohmann::json;

namespace {

// Most fields are numeric or fixed-vocabulary tokens; only free-form names
// (tranche and class names) go through quoting.
std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

std::string events_to_jsonl(const std::vector<TransferEvent>& events) {
    std::string out;
    for (const TransferEvent& e : events) {
        out += event_to_json_text(e);
        out += '\n';
    }
    return out;
}

std::vector<TransferEvent> events_from_jsonl(std::istream& in) {
    std::vector<TransferEvent> events;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        events.push_back(event_from_json_text(line));
    }
    return events;
}

std::string schedule_csv(const std::vector<CashFlowEvent>& schedule) {
    std::ostringstream out;
    out << "period,due_time,event,interest,principal,payment,balance\n";
    for (const CashFlowEvent& e : schedule)
        out << e.period_index << ',' << e.due_time << ',' << to_string(e.kind) << ','
            << format_money(e.interest_due) << ',' << format_money(e.principal_due) << ','
            << format_money(e.payment_due()) << ',' << format_money(e.balance_after) << '\n';
    return out.str();
}

std::string loan_history_csv(const MortgageAccount& loan) {
    std::ostringstream out;
    out << "period,due,paid,arrears,state\n";
    for (const MortgageAccount::HistoryRow& row : loan.history)
        out << row.period << ',' << format_money(row.due) << ',' << format_money(row.paid) << ','
            << format_money(row.arrears) << ',' << to_string(row.state) << '\n';
    return out.str();
}

std::string period_reports_csv(const std::vector<PeriodReport>& reports) {
    std::ostringstream out;
    out << "month,interest,scheduled_principal,prepaid_principal,recoveries,servicing,"
           "distributed,io,po,losses,current,d30,d60,d90,default_judgment,foreclosed,"
           "prepaid,matured,events\n";
    for (const PeriodReport& r : reports) {
        out << r.month << ',' << format_money(r.collections.interest) << ','
            << format_money(r.collections.scheduled_principal) << ','
            << format_money(r.collections.prepaid_principal) << ','
            << format_money(r.collections.recoveries) << ',' << format_money(r.servicing) << ','
            << format_money(r.distributed) << ',' << format_money(r.io) << ','
            << format_money(r.po) << ',' << format_money(r.losses);
        for (int count : r.census.by_state) out << ',' << count;
        out << ',' << r.events.size() << '\n';
    }
    return out.str();
}

std::string period_reports_jsonl(const std::vector<PeriodReport>& reports) {
    std::string out;
    for (const PeriodReport& r : reports) {
        json j;
        j["month"] = r.month;
        j["collections"] = {{"interest", r.collections.interest},
                            {"scheduled_principal", r.collections.scheduled_principal},
                            {"prepaid_principal", r.collections.prepaid_principal},
                            {"recoveries", r.collections.recoveries}};
        j["servicing"] = r.servicing;
        j["distributed"] = r.distributed;
        if (!r.tranche_cash.empty()) {
            json rows = json::array();
            for (const TrancheCash& c : r.tranche_cash)
                rows.push_back({{"interest_paid", c.interest_paid},
                                {"principal_paid", c.principal_paid},
                                {"writedown", c.writedown},
                                {"outstanding", c.outstanding_after}});
            j["tranche_cash"] = std::move(rows);
        }
        j["io"] = r.io;
        j["po"] = r.po;
        json census;
        for (int s = 0; s < 8; ++s)
            census[to_string(static_cast<Delinquency>(s))] =
                r.census.by_state[static_cast<std::size_t>(s)];
        j["census"] = std::move(census);
        j["losses"] = r.losses;
        json events = json::array();
        for (const EventStamp& s : r.events)
            events.push_back(
                {{"seq", s.seq}, {"occurred_at", s.occurred_at}, {"visible_at", s.visible_at}});
        j["events"] = std::move(events);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string tranche_report_csv(const std::vector<TrancheReportRow>& rows) {
    std::ostringstream out;
    out << "period,tranche,interest_paid,principal_paid,writedown,outstanding\n";
    for (const TrancheReportRow& r : rows)
        out << r.period << ',' << csv_escape(r.tranche) << ',' << format_money(r.interest_paid)
            << ',' << format_money(r.principal_paid) << ',' << format_money(r.writedown) << ','
            << format_money(r.outstanding) << '\n';
    return out.str();
}

std::string balances_csv(const Ledger& ledger) {
    std::ostringstream out;
    out << "class,name,account,balance\n";
    for (const auto& [cls, holders] : ledger.fungible_balances()) {
        const TokenClass& info = ledger.token_class(cls);
        for (const auto& [account, balance] : holders) {
            if (balance == 0) continue;
            out << cls << ',' << csv_escape(info.name) << ',' << account_hex(account) << ','
                << format_money(balance) << '\n';
        }
    }
    return out.str();
}

std::string wash_report_csv(const WashReport& report) {
    std::ostringstream out;
    out << "seq_a,seq_b,class,serial,origin,counterparty,gap_seconds,flagged_volume\n";
    for (const WashFlag& f : report.flags)
        out << f.seq_a << ',' << f.seq_b << ',' << f.cls << ',' << f.serial << ','
            << account_hex(f.x) << ',' << account_hex(f.y) << ',' << f.gap_seconds << ','
            << format_money(f.flagged_volume) << '\n';
    return out.str();
}

std::string ispo_csv(const IspoSeries& series) {
    std::ostringstream out;
    out << "epoch,rewards,retention,inflow,price,inflow_quote\n";
    for (const IspoEpoch& e : series.epochs)
        out << e.epoch << ',' << fmt_double(e.rewards) << ',' << fmt_double(e.retention) << ','
            << fmt_double(e.inflow) << ',' << fmt_double(e.price) << ','
            << fmt_double(e.inflow_quote) << '\n';
    return out.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), Err::IoError, "cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        require(out.good(), Err::IoError, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

} // namespace mbsdao
