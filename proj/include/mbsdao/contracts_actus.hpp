#pragma once

// Algorithmic contract kernel: annuity (ANN) schedule generation with state
// transition and payoff functions, adjustable-rate reset, collateral (CEC)
// margin evaluation and seizure, guarantee (CEG) payouts, and a rate-oracle
// interface. Everything here is a pure, deterministic function of explicit
// state — no ledger access — so independent contracts can be evaluated in
// parallel.
//
// Interest convention: period_rate = nominal_rate / periods_per_year, no
// day-count calendar. Interest is rounded half-up per period; the final
// payment absorbs the accumulated rounding residue so a fully performing
// loan terminates at exactly zero balance.

#include "mbsdao/ledger.hpp"
#include "mbsdao/money.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mbsdao {

// One simulated year; months are 1/12 of this.
constexpr std::int64_t seconds_per_year = 31'536'000;

enum class RateKind { fixed, adjustable };

struct AnnuityTerms {
    Money principal = 0;
    Rate nominal_rate;             // annual
    int periods_per_year = 12;
    int n_periods = 0;
    std::int64_t initial_exchange_date = 0;
    RateKind rate_kind = RateKind::fixed;
    Rate spread;                   // added to the oracle rate at each reset
    int reset_every = 0;           // periods between resets (adjustable only)

    std::int64_t period_seconds() const { return seconds_per_year / periods_per_year; }
    std::int64_t due_time(int period_index) const {
        return initial_exchange_date + period_seconds() * period_index;
    }
};

void validate_terms(const AnnuityTerms& t);

enum class ContractStatus { performing, matured };

struct AnnuityState {
    int period_index = 0;          // number of scheduled events consumed
    Money notional_outstanding = 0;
    Rate current_rate;             // annual; period rate is current_rate / ppy
    Money payment = 0;             // the constant annuity amount until the next reset
    Money accrued_interest = 0;    // billed but unpaid interest
    ContractStatus status = ContractStatus::performing;
};

enum class EventType { IED, scheduled_payment, rate_reset, maturity };

const char* to_string(EventType t);

struct CashFlowEvent {
    int period_index = 0;
    std::int64_t due_time = 0;
    Money interest_due = 0;
    Money principal_due = 0;
    EventType kind = EventType::scheduled_payment;
    Money balance_after = 0;

    Money payment_due() const { return interest_due + principal_due; }
};

// The constant payment for the given terms: the amount A such that paying A
// every period (interest first, remainder to principal) retires the loan at
// maturity, with the final payment absorbing the rounding residue.
Money ann_payment(const AnnuityTerms& terms);
// Same, for an arbitrary mid-life position (used by rate resets).
Money annuity_payment(Money principal, Rate annual_rate, int periods_per_year, int n_periods);

// Full schedule: event 0 disburses principal at the IED; events 1..n are the
// scheduled payments, the last marked maturity. Σ principal_due over the
// repayment events equals the principal exactly.
std::vector<CashFlowEvent> ann_schedule(const AnnuityTerms& terms);

AnnuityState initial_state(const AnnuityTerms& terms);

struct StepResult {
    AnnuityState state;
    Money interest_paid = 0;
    Money principal_paid = 0;
    Money payoff() const { return interest_paid + principal_paid; } // cash actually absorbed
};

// Applies one period: interest accrues on the outstanding balance, `paid`
// covers accrued interest first and principal second. Paying less than the
// accrued interest grows accrued_interest; paying more than owed leaves the
// excess with the caller (payoff reports what was absorbed).
StepResult ann_step(const AnnuityState& state, const AnnuityTerms& terms, int event_period,
                    Money paid);

struct RateOracle {
    virtual ~RateOracle() = default;
    virtual Rate rate_at(std::int64_t t) const = 0;
};

struct FlatRateOracle final : RateOracle {
    Rate rate;
    explicit FlatRateOracle(Rate r) : rate(r) {}
    Rate rate_at(std::int64_t) const override { return rate; }
};

// Piecewise-constant path: rate_at(t) is the rate of the latest step with
// time <= t (the first step's rate before that).
struct StepRateOracle final : RateOracle {
    std::vector<std::pair<std::int64_t, Rate>> steps;
    explicit StepRateOracle(std::vector<std::pair<std::int64_t, Rate>> s);
    Rate rate_at(std::int64_t t) const override;
};

// Re-rates an adjustable loan at a reset boundary: the new annual rate is
// oracle + spread and the payment is recomputed so the remaining balance
// still matures on the original schedule.
AnnuityState arm_reset(const AnnuityState& state, const AnnuityTerms& terms,
                       const RateOracle& oracle, std::int64_t t);

// ---------------------------------------------------------------------------
// CEC: collateral covering the exposure from the debtor

enum class MarginState { covered, under_collateralized };

const char* to_string(MarginState m);

struct CollateralLink {
    Money exposure = 0;        // current notional + accrued
    TokenRef collateral;       // the title token
    Money collateral_value = 0;
};

MarginState cec_evaluate(const CollateralLink& link);

struct SeizeInstruction {
    TokenRef token;
    AccountId to = 0;
};

// Emits the custody-transfer instruction for the collateral. Only valid
// once a default judgment has been issued.
SeizeInstruction cec_seize(const CollateralLink& link, bool default_judgment, AccountId creditor);

// ---------------------------------------------------------------------------
// CEG: guarantee moving exposure from the debtor to the guarantor

struct Guarantee {
    AccountId guarantor = 0;
    Rate coverage_fraction;    // of the shortfall
    Money coverage_cap = 0;    // lifetime cap
    Money exhausted = 0;       // paid to date
};

// Pays min(round(shortfall × coverage_fraction), remaining cap) and
// increments `exhausted`. Never exceeds the cap cumulatively.
Money ceg_payout(Guarantee& g, Money shortfall);

} // namespace mbsdao
