#include "mbsdao/mortgage.hpp"

#include <algorithm>
#include <set>

namespace mbsdao {

const char* to_string(Delinquency d) {
    switch (d) {
    case Delinquency::current: return "current";
    case Delinquency::d30: return "d30";
    case Delinquency::d60: return "d60";
    case Delinquency::d90: return "d90";
    case Delinquency::default_judgment: return "default_judgment";
    case Delinquency::foreclosed: return "foreclosed";
    case Delinquency::prepaid: return "prepaid";
    case Delinquency::matured: return "matured";
    }
    return "?";
}

Money status_code(Delinquency d) { return static_cast<Money>(d); }

CollectionResult& CollectionResult::operator+=(const CollectionResult& o) {
    interest += o.interest;
    scheduled_principal += o.scheduled_principal;
    prepaid_principal += o.prepaid_principal;
    recoveries += o.recoveries;
    guarantee += o.guarantee;
    borrower_refund += o.borrower_refund;
    return *this;
}

Money MortgageAccount::due_now() const {
    int k = state.period_index + 1;
    Money interest = period_interest(state.notional_outstanding, state.current_rate,
                                     terms.periods_per_year);
    // Everything outstanding once this period's interest lands. Nobody can owe
    // more than this, so accumulated arrears are clamped against it.
    Money payoff = state.notional_outstanding + state.accrued_interest + interest;
    Money current_due = (k < terms.n_periods) ? std::min(state.payment, payoff) : payoff;
    return std::min(arrears + current_due, payoff);
}

MortgageBook::MortgageBook(Ledger& ledger, MortgageConfig config) : config_(config) {
    require(config_.default_after_misses >= 1, Err::ConfigInvalid,
            "default threshold must be at least one miss");
    require(config_.foreclosure_vote_threshold_ppm >= 0 &&
                config_.foreclosure_vote_threshold_ppm <= 1'000'000,
            Err::ConfigInvalid, "vote threshold out of [0,1]");
    borrower_class_ = ledger.register_class("borrower-role", TokenKind::non_fungible,
                                            std::nullopt);
    cashflow_class_ = ledger.register_class("cashflow-right", TokenKind::non_fungible,
                                            std::nullopt);
}

const MortgageAccount& MortgageBook::account(std::uint64_t id) const {
    auto it = accounts_.find(id);
    require(it != accounts_.end(), Err::UnknownToken, "unknown mortgage id");
    return it->second;
}

MortgageAccount& MortgageBook::account_mut(std::uint64_t id) {
    return const_cast<MortgageAccount&>(account(id));
}

std::vector<std::uint64_t> MortgageBook::ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(accounts_.size());
    for (const auto& [id, m] : accounts_) out.push_back(id);
    return out;
}

std::uint64_t MortgageBook::originate(Ledger& ledger, TitleRegistry& registry,
                                      AccountId borrower, AccountId lender, Serial title,
                                      const AnnuityTerms& terms,
                                      std::optional<Guarantee> guarantee,
                                      Money collateral_value) {
    validate_terms(terms);
    const TitleToken& t = registry.title(title);
    require(!t.lien, Err::TitleEncumbered, "title already carries a lien");
    require(ledger.owner_of(t.token) == borrower, Err::NotOwner,
            "borrower does not own the title");
    require(ledger.stable_balance(lender) >= terms.principal, Err::LenderUnderfunded,
            "lender cannot fund the principal");

    MortgageAccount m;
    m.id = next_id_++;
    m.borrower = borrower;
    m.contract_account = ledger.create_account();
    m.title = title;
    m.terms = terms;
    m.state = initial_state(terms);
    m.guarantee = guarantee;
    m.collateral_value = collateral_value;

    registry.transfer_into_custody(ledger, title, borrower, m.contract_account);
    registry.encumber(ledger, title, m.contract_account);
    ledger.pay(lender, borrower, terms.principal); // initial exchange
    m.borrower_token =
        ledger.mint_nft(borrower_class_, borrower, "mortgage:" + std::to_string(m.id));
    m.cashflow_token =
        ledger.mint_nft(cashflow_class_, lender, "mortgage:" + std::to_string(m.id));
    m.history.push_back({0, 0, 0, 0, Delinquency::current});

    std::uint64_t id = m.id;
    accounts_.emplace(id, std::move(m));
    return id;
}

void MortgageBook::distribute(Ledger& ledger, const MortgageAccount& m, Money amount) {
    if (amount <= 0) return;
    if (m.cashflow_shares == 0) {
        AccountId holder = ledger.owner_of(m.cashflow_token);
        if (holder != m.contract_account) ledger.pay(m.contract_account, holder, amount);
        return;
    }
    const auto& balances = ledger.fungible_balances().at(m.cashflow_shares);
    std::vector<AccountId> holders;
    std::vector<std::int64_t> weights;
    for (const auto& [account, held] : balances) {
        if (held <= 0) continue;
        holders.push_back(account);
        weights.push_back(held);
    }
    require(!holders.empty(), Err::InvariantViolated, "cash-flow shares have no holders");
    std::vector<Money> shares = allocate_largest_remainder(amount, weights);
    for (std::size_t i = 0; i < holders.size(); ++i)
        if (shares[i] > 0 && holders[i] != m.contract_account)
            ledger.pay(m.contract_account, holders[i], shares[i]);
}

void MortgageBook::close_out(Ledger& ledger, TitleRegistry* registry, MortgageAccount& m,
                             Delinquency final_state, std::int64_t t) {
    if (registry && (final_state == Delinquency::prepaid ||
                     final_state == Delinquency::matured)) {
        registry->release(ledger, m.title, m.contract_account);
        registry->return_from_custody(ledger, m.title, m.contract_account, m.borrower);
    }
    m.delinquency = final_state;
    m.missed_payments = 0;
    m.arrears = 0;
    if (!m.history.empty()) m.history.back().state = final_state;
    ledger.advance_time(std::max(ledger.now(), t));
    ledger.log_status(cashflow_class_, m.cashflow_token.serial, m.contract_account,
                      status_code(final_state));
}

CollectionResult MortgageBook::collect(Ledger& ledger, TitleRegistry& registry,
                                       std::uint64_t id, Money paid, std::int64_t t) {
    MortgageAccount& m = account_mut(id);
    require(!m.terminal(), Err::EventOutOfOrder,
            std::string("loan is ") + to_string(m.delinquency));
    int k = m.state.period_index + 1;
    require(t >= m.terms.due_time(k), Err::EventOutOfOrder, "period not yet due");
    require(paid >= 0, Err::InvalidArgument, "payment must be non-negative");
    ledger.advance_time(std::max(ledger.now(), t));

    Money due = m.due_now();
    Money apply = std::min(paid, due);
    StepResult step = ann_step(m.state, m.terms, k, apply);
    Money cash = step.payoff();
    require(cash == apply, Err::InvariantViolated, "payment not fully applied");
    if (cash > 0) ledger.pay(m.borrower, m.contract_account, cash);
    m.state = step.state;

    // arrears roll forward; a full catch-up (arrears + current due) cures
    m.arrears = due - apply;
    if (m.arrears == 0)
        m.missed_payments = 0;
    else
        ++m.missed_payments;

    m.history.push_back({k, due, cash, m.arrears, m.delinquency});

    CollectionResult r;
    r.interest = step.interest_paid;
    r.scheduled_principal = step.principal_paid;
    distribute(ledger, m, cash);
    if (m.state.status == ContractStatus::matured)
        close_out(ledger, &registry, m, Delinquency::matured, t);
    return r;
}

Delinquency MortgageBook::advance_delinquency(Ledger& ledger, std::uint64_t id,
                                              std::int64_t t) {
    MortgageAccount& m = account_mut(id);
    if (m.terminal()) return m.delinquency; // no transition out of a terminal state

    Delinquency next;
    if (m.missed_payments == 0) next = Delinquency::current;
    else if (m.missed_payments >= config_.default_after_misses)
        next = Delinquency::default_judgment;
    else if (m.missed_payments == 1) next = Delinquency::d30;
    else if (m.missed_payments == 2) next = Delinquency::d60;
    else next = Delinquency::d90;

    if (next != m.delinquency) {
        m.delinquency = next;
        if (!m.history.empty()) m.history.back().state = next;
        ledger.advance_time(std::max(ledger.now(), t));
        ledger.log_status(cashflow_class_, m.cashflow_token.serial, m.contract_account,
                          status_code(next));
    }
    return m.delinquency;
}

void MortgageBook::reset_rate(Ledger& ledger, std::uint64_t id, const RateOracle& oracle,
                              std::int64_t t) {
    MortgageAccount& m = account_mut(id);
    require(!m.terminal(), Err::EventOutOfOrder,
            std::string("loan is ") + to_string(m.delinquency));
    m.state = arm_reset(m.state, m.terms, oracle, t);
    ledger.advance_time(std::max(ledger.now(), t));
}

CollectionResult MortgageBook::prepay(Ledger& ledger, TitleRegistry& registry,
                                      std::uint64_t id, Money amount, std::int64_t t) {
    MortgageAccount& m = account_mut(id);
    require(!m.terminal(), Err::EventOutOfOrder,
            std::string("loan is ") + to_string(m.delinquency));
    require(m.delinquency == Delinquency::current, Err::EventOutOfOrder,
            "prepayment requires a current loan");
    require(amount > 0, Err::InvalidArgument, "prepayment must be positive");
    Money payoff = m.state.notional_outstanding + m.state.accrued_interest;
    require(amount <= payoff, Err::Overpayment,
            "payoff is " + format_money(payoff) + ", got " + format_money(amount));
    ledger.advance_time(std::max(ledger.now(), t));

    CollectionResult r;
    Money interest_part = std::min(amount, m.state.accrued_interest);
    Money principal_part = amount - interest_part;
    m.state.accrued_interest -= interest_part;
    m.state.notional_outstanding -= principal_part;
    r.interest = interest_part;
    r.prepaid_principal = principal_part;

    ledger.pay(m.borrower, m.contract_account, amount);
    distribute(ledger, m, amount);
    m.history.push_back({m.state.period_index, 0, amount, m.arrears, m.delinquency});

    if (m.state.notional_outstanding == 0 && m.state.accrued_interest == 0) {
        m.state.status = ContractStatus::matured;
        close_out(ledger, &registry, m, Delinquency::prepaid, t);
    }
    return r;
}

std::pair<Money, CollectionResult> MortgageBook::foreclose(Ledger& ledger,
                                                           TitleRegistry& registry,
                                                           std::uint64_t id, Money sale_price,
                                                           AccountId buyer, std::int64_t t) {
    MortgageAccount& m = account_mut(id);
    require(m.delinquency == Delinquency::default_judgment, Err::NotInDefault,
            std::string("loan is ") + to_string(m.delinquency));
    if (m.cashflow_shares != 0)
        require(m.foreclosure_authorized, Err::VoteNotPassed,
                "fractional creditors have not authorized foreclosure");
    require(sale_price >= 0, Err::InvalidArgument, "sale price must be non-negative");
    ledger.advance_time(std::max(ledger.now(), t));

    Money exposure = m.exposure();
    CollateralLink link{exposure, registry.title(m.title).token, m.collateral_value};
    SeizeInstruction seize = cec_seize(link, true, buyer);
    registry.release(ledger, m.title, m.contract_account);
    registry.return_from_custody(ledger, m.title, m.contract_account, seize.to);

    ledger.pay(buyer, m.contract_account, sale_price);
    Money recovery = std::min(sale_price, exposure);
    Money refund = sale_price - recovery;
    if (refund > 0) ledger.pay(m.contract_account, m.borrower, refund);

    Money shortfall = exposure - recovery;
    Money guaranteed = 0;
    if (m.guarantee && shortfall > 0) {
        guaranteed = ceg_payout(*m.guarantee, shortfall);
        if (guaranteed > 0) ledger.pay(m.guarantee->guarantor, m.contract_account, guaranteed);
    }
    Money loss = shortfall - guaranteed;
    m.loss_realized = loss;
    m.state.notional_outstanding = 0;
    m.state.accrued_interest = 0;

    CollectionResult r;
    r.recoveries = recovery + guaranteed;
    r.guarantee = guaranteed;
    r.borrower_refund = refund;
    distribute(ledger, m, recovery + guaranteed);
    m.history.push_back({m.state.period_index, exposure, recovery + guaranteed, 0,
                         Delinquency::foreclosed});
    close_out(ledger, nullptr, m, Delinquency::foreclosed, t);
    return {loss, r};
}

ClassId MortgageBook::fractionalize_cashflow(Ledger& ledger, std::uint64_t id,
                                             AccountId caller, Money n_shares,
                                             const std::vector<ShareAllocation>& allocation) {
    MortgageAccount& m = account_mut(id);
    require(m.cashflow_shares == 0, Err::InvalidArgument,
            "cash-flow claim is already fractionalized");
    require(ledger.owner_of(m.cashflow_token) == caller, Err::NotOwner,
            "caller does not hold the cash-flow token");
    require(n_shares > 0, Err::InvalidArgument, "share count must be positive");
    Money allocated = 0;
    for (const ShareAllocation& a : allocation) {
        require(a.shares > 0, Err::InvalidArgument, "share allocations must be positive");
        allocated += a.shares;
    }
    require(allocated == n_shares, Err::InvalidArgument, "allocation must sum to n_shares");

    ledger.transfer_nft(m.cashflow_token, caller, m.contract_account);
    ClassId cls = ledger.register_class("cashflow-shares:" + std::to_string(id),
                                        TokenKind::fungible, n_shares);
    for (const ShareAllocation& a : allocation)
        ledger.mint_fungible(cls, a.holder, a.shares);
    m.cashflow_shares = cls;
    m.cashflow_shares_outstanding = n_shares;
    return cls;
}

bool MortgageBook::vote_foreclosure(const Ledger& ledger, std::uint64_t id,
                                    const std::vector<AccountId>& yes) {
    MortgageAccount& m = account_mut(id);
    require(m.cashflow_shares != 0, Err::InvalidArgument,
            "only fractionalized claims vote on foreclosure");
    std::set<AccountId> voters(yes.begin(), yes.end());
    Money carried = 0;
    for (AccountId a : voters) carried += ledger.balance_of(a, m.cashflow_shares);
    __int128 lhs = static_cast<__int128>(carried) * 1'000'000;
    __int128 rhs = static_cast<__int128>(config_.foreclosure_vote_threshold_ppm) *
                   m.cashflow_shares_outstanding;
    if (lhs > rhs) m.foreclosure_authorized = true;
    return m.foreclosure_authorized;
}

void MortgageBook::authorize_foreclosure(std::uint64_t id) {
    account_mut(id).foreclosure_authorized = true;
}

} // namespace mbsdao
