#pragma once

// Mortgage lifecycle state machine binding the annuity kernel to collateral
// and guarantee contracts: origination mints Borrower and Cash-Flow role
// tokens, collections route cash to whoever holds the cash-flow claim,
// delinquency advances toward a programmatic default judgment, and
// foreclosure seizes the title and settles recovery, guarantee and loss.
//
// Cash always moves in two hops: borrower -> per-mortgage contract account
// -> cash-flow holder(s). Pooled mortgages therefore pay the pool account
// with no special casing.

#include "mbsdao/contracts_actus.hpp"
#include "mbsdao/ledger.hpp"
#include "mbsdao/tokenization.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace mbsdao {

enum class Delinquency {
    current,
    d30,
    d60,
    d90,
    default_judgment,
    foreclosed,
    prepaid,
    matured,
};

const char* to_string(Delinquency d);
// Status code recorded on the ledger for a delinquency transition.
Money status_code(Delinquency d);

struct MortgageConfig {
    int default_after_misses = 4; // ~120 days at monthly periods
    std::int64_t foreclosure_vote_threshold_ppm = 500'000; // share majority
};

// One period's cash, broken down the way pools consume it. Guarantee cash
// arrives inside `recoveries`; the `guarantee` field reports how much of it
// the guarantor funded.
struct CollectionResult {
    Money interest = 0;
    Money scheduled_principal = 0;
    Money prepaid_principal = 0;
    Money recoveries = 0;
    Money guarantee = 0;
    Money borrower_refund = 0; // foreclosure proceeds above the exposure

    Money total() const { return interest + scheduled_principal + prepaid_principal + recoveries; }
    CollectionResult& operator+=(const CollectionResult& o);
};

struct MortgageAccount {
    std::uint64_t id = 0;
    AccountId borrower = 0;
    AccountId contract_account = 0;
    Serial title = 0;
    AnnuityTerms terms;
    AnnuityState state;
    std::optional<Guarantee> guarantee;
    Money collateral_value = 0;
    TokenRef borrower_token;
    TokenRef cashflow_token;
    ClassId cashflow_shares = 0; // nonzero once the claim is fractionalized
    Money cashflow_shares_outstanding = 0;
    Delinquency delinquency = Delinquency::current;
    int missed_payments = 0;
    Money arrears = 0; // unpaid scheduled amounts, cures subtract
    bool foreclosure_authorized = false;
    Money loss_realized = 0;

    struct HistoryRow {
        int period = 0;
        Money due = 0;
        Money paid = 0;
        Money arrears = 0;
        Delinquency state = Delinquency::current;
    };
    std::vector<HistoryRow> history;

    Money exposure() const {
        return state.notional_outstanding + state.accrued_interest;
    }
    bool terminal() const {
        return delinquency == Delinquency::foreclosed || delinquency == Delinquency::prepaid ||
               delinquency == Delinquency::matured;
    }
    // The amount that keeps the loan fully current at period k: arrears plus
    // the scheduled payment (final period: everything outstanding).
    Money due_now() const;
};

class MortgageBook {
public:
    explicit MortgageBook(Ledger& ledger, MortgageConfig config = {});

    // Locks the title to the contract, disburses principal lender->borrower,
    // and mints the two role tokens.
    std::uint64_t originate(Ledger& ledger, TitleRegistry& registry, AccountId borrower,
                            AccountId lender, Serial title, const AnnuityTerms& terms,
                            std::optional<Guarantee> guarantee, Money collateral_value);

    // Applies one scheduled period: takes min(paid, due_now) from the
    // borrower, steps the annuity, and routes the cash to the cash-flow
    // holder(s). Shortfall is state, not an error. The registry is needed
    // because the final payment releases the title.
    CollectionResult collect(Ledger& ledger, TitleRegistry& registry, std::uint64_t id,
                             Money paid, std::int64_t t);

    // Period-boundary delinquency transition from the miss counter; emits a
    // ledger status event on every change (the default judgment doubles as
    // the foreclosure-initiation signal).
    Delinquency advance_delinquency(Ledger& ledger, std::uint64_t id, std::int64_t t);

    // Extra principal. Full payoff releases the lien and returns the title;
    // partial keeps the payment and shortens the term. Amounts beyond the
    // payoff are rejected.
    CollectionResult prepay(Ledger& ledger, TitleRegistry& registry, std::uint64_t id,
                            Money amount, std::int64_t t);

    // Sells the seized title to `buyer` at `sale_price`; recovery is capped
    // at the exposure (the excess refunds the borrower's equity), the
    // guarantee covers part of the shortfall, the rest is realized loss.
    std::pair<Money, CollectionResult> foreclose(Ledger& ledger, TitleRegistry& registry,
                                                 std::uint64_t id, Money sale_price,
                                                 AccountId buyer, std::int64_t t);

    // Re-rates an adjustable loan against the oracle at a reset boundary
    // (the annuity kernel enforces the boundary and the rate kind).
    void reset_rate(Ledger& ledger, std::uint64_t id, const RateOracle& oracle, std::int64_t t);

    // Replaces the cash-flow NFT claim with a fungible share class.
    ClassId fractionalize_cashflow(Ledger& ledger, std::uint64_t id, AccountId caller,
                                   Money n_shares, const std::vector<ShareAllocation>& allocation);

    // Creditor coordination for fractionalized claims: `yes` holders carry
    // the vote when they hold a share majority.
    bool vote_foreclosure(const Ledger& ledger, std::uint64_t id,
                          const std::vector<AccountId>& yes);
    // Direct authorization hook for DAO-governed claims.
    void authorize_foreclosure(std::uint64_t id);

    const MortgageAccount& account(std::uint64_t id) const;
    std::vector<std::uint64_t> ids() const;
    std::size_t size() const { return accounts_.size(); }
    ClassId borrower_class() const { return borrower_class_; }
    ClassId cashflow_class() const { return cashflow_class_; }
    const MortgageConfig& config() const { return config_; }

private:
    MortgageAccount& account_mut(std::uint64_t id);
    void distribute(Ledger& ledger, const MortgageAccount& m, Money amount);
    void close_out(Ledger& ledger, TitleRegistry* registry, MortgageAccount& m,
                   Delinquency final_state, std::int64_t t);

    MortgageConfig config_;
    ClassId borrower_class_ = 0;
    ClassId cashflow_class_ = 0;
    std::uint64_t next_id_ = 1;
    std::map<std::uint64_t, MortgageAccount> accounts_;
};

} // namespace mbsdao
