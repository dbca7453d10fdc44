#include "mbsdao/contracts_actus.hpp"

#include "mbsdao/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mbsdao {

const char* to_string(EventType t) {
    switch (t) {
    case EventType::IED: return "IED";
    case EventType::scheduled_payment: return "scheduled_payment";
    case EventType::rate_reset: return "rate_reset";
    case EventType::maturity: return "maturity";
    }
    return "?";
}

const char* to_string(MarginState m) {
    return m == MarginState::covered ? "covered" : "under_collateralized";
}

void validate_terms(const AnnuityTerms& t) {
    require(t.principal > 0, Err::ConfigInvalid, "principal must be positive");
    require(t.n_periods > 0, Err::ConfigInvalid, "n_periods must be positive");
    require(t.periods_per_year > 0 && seconds_per_year % t.periods_per_year == 0,
            Err::ConfigInvalid, "periods_per_year must divide the simulated year");
    require(t.nominal_rate.nano >= 0, Err::ConfigInvalid, "nominal rate must be non-negative");
    require(t.spread.nano >= 0, Err::ConfigInvalid, "spread must be non-negative");
    if (t.rate_kind == RateKind::adjustable)
        require(t.reset_every > 0, Err::ConfigInvalid,
                "adjustable terms need a positive reset interval");
}

Money annuity_payment(Money principal, Rate annual_rate, int periods_per_year, int n_periods) {
    require(principal > 0 && n_periods > 0 && periods_per_year > 0, Err::ConfigInvalid,
            "annuity payment needs positive principal and period counts");
    if (annual_rate.nano == 0)
        return mul_div_half_up(principal, 1, n_periods);
    double r = annual_rate.to_double() / periods_per_year;
    double a = static_cast<double>(principal) * r / (1.0 - std::pow(1.0 + r, -n_periods));
    return static_cast<Money>(std::llround(a));
}

Money ann_payment(const AnnuityTerms& terms) {
    validate_terms(terms);
    return annuity_payment(terms.principal, terms.nominal_rate, terms.periods_per_year,
                           terms.n_periods);
}

std::vector<CashFlowEvent> ann_schedule(const AnnuityTerms& terms) {
    validate_terms(terms);
    Money payment = ann_payment(terms);
    std::vector<CashFlowEvent> events;
    events.reserve(static_cast<std::size_t>(terms.n_periods) + 1);
    events.push_back(CashFlowEvent{0, terms.initial_exchange_date, 0, terms.principal,
                                   EventType::IED, terms.principal});

    Money bal = terms.principal;
    for (int k = 1; k <= terms.n_periods; ++k) {
        if (terms.rate_kind == RateKind::adjustable && k < terms.n_periods &&
            k % terms.reset_every == 0) {
            // projection only: the reset marker carries no cash; realized
            // resets come from arm_reset against the live oracle
            events.push_back(
                CashFlowEvent{k, terms.due_time(k), 0, 0, EventType::rate_reset, bal});
        }
        Money interest = period_interest(bal, terms.nominal_rate, terms.periods_per_year);
        Money principal;
        EventType kind;
        if (k < terms.n_periods) {
            principal = std::clamp<Money>(payment - interest, 0, bal);
            kind = EventType::scheduled_payment;
        } else {
            principal = bal; // the final payment absorbs the rounding residue
            kind = EventType::maturity;
        }
        bal -= principal;
        events.push_back(CashFlowEvent{k, terms.due_time(k), interest, principal, kind, bal});
    }
    return events;
}

AnnuityState initial_state(const AnnuityTerms& terms) {
    validate_terms(terms);
    AnnuityState s;
    s.period_index = 0;
    s.notional_outstanding = terms.principal;
    s.current_rate = terms.nominal_rate;
    s.payment = ann_payment(terms);
    s.accrued_interest = 0;
    s.status = ContractStatus::performing;
    return s;
}

StepResult ann_step(const AnnuityState& state, const AnnuityTerms& terms, int event_period,
                    Money paid) {
    require(state.status == ContractStatus::performing, Err::EventOutOfOrder,
            "contract already matured");
    require(event_period == state.period_index + 1, Err::EventOutOfOrder,
            "expected period " + std::to_string(state.period_index + 1));
    require(paid >= 0, Err::InvalidArgument, "payment must be non-negative");

    StepResult r;
    r.state = state;
    Money bal = state.notional_outstanding;
    Money interest_due = period_interest(bal, state.current_rate, terms.periods_per_year);
    Money interest_owed = state.accrued_interest + interest_due;

    r.interest_paid = std::min(paid, interest_owed);
    r.state.accrued_interest = interest_owed - r.interest_paid;
    r.principal_paid = std::min(paid - r.interest_paid, bal);
    r.state.notional_outstanding = bal - r.principal_paid;
    r.state.period_index = event_period;
    if (r.state.notional_outstanding == 0 && r.state.accrued_interest == 0)
        r.state.status = ContractStatus::matured;
    return r;
}

StepRateOracle::StepRateOracle(std::vector<std::pair<std::int64_t, Rate>> s)
    : steps(std::move(s)) {
    require(!steps.empty(), Err::ConfigInvalid, "rate path needs at least one step");
    require(std::is_sorted(steps.begin(), steps.end(),
                           [](const auto& a, const auto& b) { return a.first < b.first; }),
            Err::ConfigInvalid, "rate path must be time-ordered");
}

Rate StepRateOracle::rate_at(std::int64_t t) const {
    Rate r = steps.front().second;
    for (const auto& [time, rate] : steps) {
        if (time > t) break;
        r = rate;
    }
    return r;
}

AnnuityState arm_reset(const AnnuityState& state, const AnnuityTerms& terms,
                       const RateOracle& oracle, std::int64_t t) {
    require(terms.rate_kind == RateKind::adjustable, Err::NotAdjustable,
            "fixed-rate terms cannot reset");
    require(state.status == ContractStatus::performing && state.notional_outstanding > 0,
            Err::EventOutOfOrder, "no balance left to re-rate");
    bool on_boundary = state.period_index > 0 && state.period_index < terms.n_periods &&
                       state.period_index % terms.reset_every == 0 &&
                       t == terms.due_time(state.period_index);
    require(on_boundary, Err::NotResetBoundary,
            "reset only at a reset-interval period boundary");

    AnnuityState next = state;
    next.current_rate = oracle.rate_at(t) + terms.spread;
    require(next.current_rate.nano >= 0, Err::ConfigInvalid, "negative reset rate");
    next.payment = annuity_payment(state.notional_outstanding, next.current_rate,
                                   terms.periods_per_year,
                                   terms.n_periods - state.period_index);
    return next;
}

MarginState cec_evaluate(const CollateralLink& link) {
    return link.collateral_value >= link.exposure ? MarginState::covered
                                                  : MarginState::under_collateralized;
}

SeizeInstruction cec_seize(const CollateralLink& link, bool default_judgment,
                           AccountId creditor) {
    require(default_judgment, Err::SeizeWithoutDefault,
            "collateral may be seized only after a default judgment");
    return SeizeInstruction{link.collateral, creditor};
}

Money ceg_payout(Guarantee& g, Money shortfall) {
    require(shortfall >= 0, Err::InvalidArgument, "shortfall must be non-negative");
    require(g.coverage_fraction.nano >= 0 && g.coverage_fraction.nano <= Rate::scale,
            Err::ConfigInvalid, "coverage fraction out of [0,1]");
    Money payout = std::min(fraction_of(shortfall, g.coverage_fraction),
                            g.coverage_cap - g.exhausted);
    payout = std::max<Money>(payout, 0);
    g.exhausted += payout;
    return payout;
}

} // namespace mbsdao
