#pragma once

// Serialization for exported figures and logs: JSONL event streams, CSV
// tables, and atomic file writes. Every function is a pure formatter except
// write_atomic; the CLI composes them, and nothing here mutates a ledger.

#include "mbsdao/contracts_actus.hpp"
#include "mbsdao/ledger.hpp"
#include "mbsdao/mortgage.hpp"
#include "mbsdao/scenario.hpp"
#include "mbsdao/securitization.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mbsdao {

// One event per line in the snapshot encoding. The reader tolerates blank
// lines and CRLF endings; anything else that fails to parse as an event is
// Err::InvalidArgument.
std::string events_to_jsonl(const std::vector<TransferEvent>& events);
std::vector<TransferEvent> events_from_jsonl(std::istream& in);

// -- CSV tables --------------------------------------------------------------
// Money columns are decimal strings ("1234.56"); headers are always emitted,
// so an empty input yields just the header line.

// period,due_time,event,interest,principal,payment,balance
std::string schedule_csv(const std::vector<CashFlowEvent>& schedule);
// period,due,paid,arrears,state
std::string loan_history_csv(const MortgageAccount& loan);
// month,cash breakdown,servicing,distributed,io,po,losses,census...,events
std::string period_reports_csv(const std::vector<PeriodReport>& reports);
// Full-fidelity alternative to the CSV: one JSON object per month including
// the tranche rows and the (occurred_at, visible_at) event stamps.
std::string period_reports_jsonl(const std::vector<PeriodReport>& reports);
// period,tranche,interest_paid,principal_paid,writedown,outstanding
std::string tranche_report_csv(const std::vector<TrancheReportRow>& rows);
// class,name,account,balance — nonzero fungible positions only
std::string balances_csv(const Ledger& ledger);
// seq_a,seq_b,class,serial,origin,counterparty,gap_seconds,flagged_volume
std::string wash_report_csv(const WashReport& report);
// epoch,rewards,retention,inflow,price,inflow_quote
std::string ispo_csv(const IspoSeries& series);

// Writes via a sibling temp file and rename, creating parent directories as
// needed, so a reader never observes a partially written file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace mbsdao
