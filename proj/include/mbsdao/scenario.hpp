#pragma once

// Deterministic scenario driver and analytics. A Scenario owns a private
// ledger world (registry, mortgage book, securitizer), originates a loan
// book from seeded draws, pools it, and walks a monthly loop: prepayment and
// default draws per surviving loan, collections, delinquency transitions,
// foreclosures, and a pool close with distributions. Every month yields a
// PeriodReport carrying (occurred_at, investor_visible_at) stamps for each
// ledger event, which feed the reporting-lag comparison. Wash-sale
// detection and ISPO inflow tabulation are standalone analytics.

#include "mbsdao/mortgage.hpp"
#include "mbsdao/securitization.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mbsdao {

constexpr std::int64_t seconds_per_month = seconds_per_year / 12;

// Standard single-month survival conversions: the monthly rate m satisfies
// (1 - m)^12 = 1 - annual.
double smm_from_cpr(double cpr_annual);
double mdr_from_cdr(double cdr_annual);

enum class ReportingMode { onchain, traditional };

const char* to_string(ReportingMode m);

struct LoanDrawParams {
    Money principal_lo = 10'000'000; // 100,000.00
    Money principal_hi = 50'000'000;
    Rate rate_lo = Rate::from_nano(40'000'000); // 4%
    Rate rate_hi = Rate::from_nano(80'000'000); // 8%
    int n_periods = 360;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    int horizon_months = 12;
    int n_loans = 10;
    LoanDrawParams loans;
    std::vector<Rate> rate_path; // yearly ARM resets when non-empty; flat otherwise
    double cpr_annual = 0.0;
    double cdr_annual = 0.0;
    double recovery_haircut = 0.30; // foreclosure sale at (1-haircut) x collateral
    ReportingMode reporting_mode = ReportingMode::onchain;
    std::int64_t traditional_lag_days = 55;
    SchemeKind scheme = SchemeKind::passthrough;
    std::vector<std::int64_t> tranche_fractions_ppm = {700'000, 200'000, 100'000};
};

void validate_config(const ScenarioConfig& cfg); // Err::ConfigInvalid

struct EventStamp {
    std::uint64_t seq = 0;
    std::int64_t occurred_at = 0;
    std::int64_t visible_at = 0; // the block that published it
};

struct DelinquencyCensus {
    std::array<int, 8> by_state{}; // indexed by the Delinquency ordinal

    int& operator[](Delinquency d) { return by_state[static_cast<std::size_t>(d)]; }
    int operator[](Delinquency d) const { return by_state[static_cast<std::size_t>(d)]; }
    int total() const;
};

struct PeriodReport {
    int month = 0;
    PoolCollections collections; // gross, before the servicing strip
    Money servicing = 0;
    Money distributed = 0;
    std::vector<TrancheCash> tranche_cash; // waterfall only
    Money io = 0, po = 0;                  // io_po only
    DelinquencyCensus census;
    Money losses = 0; // realized this month
    std::vector<EventStamp> events;
};

struct ScenarioTotals {
    Money borrower_payments = 0;
    Money guarantee_payouts = 0;
    Money recoveries = 0;
    Money distributions = 0;
    Money servicing = 0;
    Money losses = 0;
    int loans_matured = 0;
    int loans_prepaid = 0;
    int loans_foreclosed = 0;
};

// One full simulation world. Construction validates the config and builds
// the loan book and pool; run() walks the monthly loop once.
class Scenario {
public:
    explicit Scenario(ScenarioConfig config);

    Scenario(const Scenario&) = delete;
    Scenario& operator=(const Scenario&) = delete;

    const std::vector<PeriodReport>& run();

    const ScenarioConfig& config() const { return cfg_; }
    const Ledger& ledger() const { return ledger_; }
    const MortgageBook& book() const { return book_; }
    const Securitizer& securitizer() const { return sec_; }
    std::uint64_t pool_id() const { return pool_; }
    const std::vector<std::uint64_t>& loan_ids() const { return loan_ids_; }
    const ScenarioTotals& totals() const { return totals_; }
    const std::vector<PeriodReport>& reports() const { return reports_; }

private:
    void originate_book();
    void issue_pool();
    // Appends stamps for every ledger event past `from_seq`, marking them as
    // having occurred at the current clock.
    void stamp_new_events(std::vector<EventStamp>& stamps, std::uint64_t& from_seq) const;

    ScenarioConfig cfg_;
    double smm_ = 0, mdr_ = 0;
    Rate sale_fraction_; // 1 - recovery_haircut
    Ledger ledger_;
    TitleRegistry registry_;
    MortgageBook book_;
    Securitizer sec_;
    AccountId issuer_ = 0;
    AccountId market_ = 0; // exogenous foreclosure-sale buyer
    std::vector<AccountId> borrowers_;
    std::vector<std::uint64_t> loan_ids_;
    std::map<std::uint64_t, int> defaulted_at_; // loan id -> draw month
    std::optional<StepRateOracle> rate_oracle_;
    std::uint64_t pool_ = 0;
    std::vector<PeriodReport> reports_;
    ScenarioTotals totals_;
    bool ran_ = false;
};

// ---------------------------------------------------------------------------
// Reporting-lag comparison

struct LagStats {
    ReportingMode mode = ReportingMode::onchain;
    std::size_t events = 0;
    std::int64_t max_lag = 0;  // seconds
    double mean_lag = 0;       // seconds
    std::int64_t bound = 0;    // every event must satisfy lag <= bound
    bool within_bound = true;
};

// Onchain lags come from the stored stamps (publication block minus
// occurrence); traditional mode replaces publication with a fixed lag of
// `lag_days` after occurrence.
LagStats reporting_lag_stats(const std::vector<PeriodReport>& reports, ReportingMode mode,
                             std::int64_t block_interval, std::int64_t lag_days = 55);

// Side-by-side text table for the two modes.
std::string lag_comparison_table(const LagStats& onchain, const LagStats& traditional);

// ---------------------------------------------------------------------------
// Wash-sale detection

struct WashFlag {
    std::uint64_t seq_a = 0; // x -> y
    std::uint64_t seq_b = 0; // y -> x
    ClassId cls = 0;
    Serial serial = 0;
    AccountId x = 0;
    AccountId y = 0;
    std::int64_t gap_seconds = 0;
    Money flagged_volume = 0; // both legs' prices
};

struct WashReport {
    std::vector<WashFlag> flags;
    Money flagged_volume = 0;
    Money clean_volume = 0;
    std::int64_t window_seconds = 0;

    Money total_priced_volume() const { return flagged_volume + clean_volume; }
};

// Flags every earliest-matching pair (x->y, y->x) on the same NFT within the
// window, scanning priced NFT events in sequence order; each event joins at
// most one pair.
WashReport detect_wash_sales(const std::vector<TransferEvent>& events,
                             std::int64_t window_seconds = 3'600);

// ---------------------------------------------------------------------------
// ISPO inflows

struct IspoEpoch {
    int epoch = 0;
    double rewards = 0;
    double retention = 0;
    double inflow = 0; // rewards x retention
    double price = 0;
    double inflow_quote = 0; // inflow x price
};

struct IspoSeries {
    std::vector<IspoEpoch> epochs;
    double total_inflow = 0;
    double total_quote = 0;
};

IspoSeries ispo_inflows(const std::vector<double>& epoch_rewards, double retention,
                        const std::vector<double>& prices);

} // namespace mbsdao
