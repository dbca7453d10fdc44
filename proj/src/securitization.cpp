#include "mbsdao/securitization.hpp"

#include <algorithm>
#include <numeric>

namespace mbsdao {

PoolCollections& PoolCollections::operator+=(const PoolCollections& o) {
    interest += o.interest;
    scheduled_principal += o.scheduled_principal;
    prepaid_principal += o.prepaid_principal;
    recoveries += o.recoveries;
    return *this;
}

PoolCollections to_pool_collections(const CollectionResult& r) {
    return {r.interest, r.scheduled_principal, r.prepaid_principal, r.recoveries};
}

std::vector<Money> distribute_passthrough(Money total, std::span<const std::int64_t> holdings) {
    return allocate_largest_remainder(total, holdings);
}

namespace {

// Indices sorted senior-first (priority ascending, input order breaking ties).
std::vector<std::size_t> seniority_order(const std::vector<Tranche>& tranches) {
    std::vector<std::size_t> order(tranches.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tranches[a].priority < tranches[b].priority;
    });
    return order;
}

} // namespace

std::vector<TrancheCash> distribute_waterfall(const PoolCollections& collections,
                                              std::vector<Tranche>& tranches,
                                              int periods_per_year) {
    require(!tranches.empty(), Err::InvalidArgument, "waterfall needs at least one tranche");
    std::vector<std::size_t> order = seniority_order(tranches);
    std::vector<TrancheCash> rows(tranches.size());

    Money interest_left = collections.interest;
    for (std::size_t i : order) {
        Money due = period_interest(tranches[i].outstanding, tranches[i].coupon,
                                    periods_per_year);
        Money paid = std::min(due, interest_left);
        rows[i].interest_paid = paid;
        interest_left -= paid;
    }
    // Excess spread is the most junior tranche's residual claim.
    rows[order.back()].interest_paid += interest_left;

    Money principal_left = collections.principal_total();
    for (std::size_t i : order) {
        Money paid = std::min(tranches[i].outstanding, principal_left);
        tranches[i].outstanding -= paid;
        rows[i].principal_paid = paid;
        principal_left -= paid;
    }
    // Principal beyond every face (e.g. recoveries above the remaining
    // balance) also lands on the most junior tranche.
    rows[order.back()].principal_paid += principal_left;

    for (std::size_t i = 0; i < tranches.size(); ++i)
        rows[i].outstanding_after = tranches[i].outstanding;
    return rows;
}

std::vector<Money> allocate_losses(std::vector<Tranche>& tranches, Money loss) {
    require(loss >= 0, Err::InvalidArgument, "loss must be non-negative");
    std::vector<std::size_t> order = seniority_order(tranches);
    std::vector<Money> writedowns(tranches.size(), 0);
    Money remaining = loss;
    for (auto it = order.rbegin(); it != order.rend() && remaining > 0; ++it) {
        Money w = std::min(tranches[*it].outstanding, remaining);
        tranches[*it].outstanding -= w;
        writedowns[*it] = w;
        remaining -= w;
    }
    return writedowns;
}

std::pair<Money, Money> split_io_po(const PoolCollections& collections) {
    return {collections.interest, collections.principal_total()};
}

// ---------------------------------------------------------------------------

Securitizer::Securitizer(Ledger& ledger, Rate servicing_strip) : strip_(servicing_strip) {
    require(strip_.nano >= 0, Err::ConfigInvalid, "servicing strip cannot be negative");
    servicer_ = ledger.create_account();
}

const Pool& Securitizer::pool(std::uint64_t id) const {
    auto it = pools_.find(id);
    require(it != pools_.end(), Err::UnknownToken, "unknown pool id");
    return it->second;
}

Pool& Securitizer::pool_mut(std::uint64_t id) { return const_cast<Pool&>(pool(id)); }

std::vector<std::uint64_t> Securitizer::pool_ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(pools_.size());
    for (const auto& [id, p] : pools_) out.push_back(id);
    return out;
}

Rate Securitizer::wac(std::uint64_t id) const {
    auto it = wac_.find(id);
    require(it != wac_.end(), Err::UnknownToken, "unknown pool id");
    return it->second;
}

const std::vector<TrancheReportRow>& Securitizer::report(std::uint64_t id) const {
    (void)pool(id);
    return reports_.at(id);
}

std::uint64_t Securitizer::form_pool(Ledger& ledger, const MortgageBook& book,
                                     AccountId owner,
                                     const std::vector<std::uint64_t>& mortgage_ids) {
    require(!mortgage_ids.empty(), Err::EmptyPool, "a pool needs at least one loan");
    Pool p;
    p.id = next_id_++;
    p.owner = owner;
    p.account = ledger.create_account();

    __int128 coupon_weighted = 0;
    for (std::uint64_t mid : mortgage_ids) {
        const MortgageAccount& m = book.account(mid);
        require(!pooled_.contains(m.cashflow_token), Err::AlreadyPooled,
                "cash-flow token is already in a pool");
        require(ledger.owner_of(m.cashflow_token) == owner, Err::NotOwner,
                "pool owner does not hold the cash-flow token");
        ledger.transfer_nft(m.cashflow_token, owner, p.account);
        pooled_.insert(m.cashflow_token);
        p.members.push_back(mid);
        p.initial_principal += m.state.notional_outstanding;
        coupon_weighted += static_cast<__int128>(m.state.notional_outstanding) *
                           m.state.current_rate.nano;
    }
    p.balance = p.initial_principal;
    Rate pool_wac;
    if (p.initial_principal > 0)
        pool_wac = Rate::from_nano(static_cast<std::int64_t>(
            (coupon_weighted + p.initial_principal / 2) / p.initial_principal));

    std::uint64_t id = p.id;
    wac_[id] = pool_wac;
    reports_[id] = {};
    pools_.emplace(id, std::move(p));
    return id;
}

ClassId Securitizer::issue_passthrough(Ledger& ledger, std::uint64_t id, Money n_shares,
                                       const std::vector<ShareAllocation>& allocation) {
    Pool& p = pool_mut(id);
    require(p.scheme == SchemeKind::none, Err::InvalidArgument,
            "pool already has issued securities");
    require(n_shares > 0, Err::InvalidArgument, "share count must be positive");
    Money allocated = 0;
    for (const ShareAllocation& a : allocation) {
        require(a.shares > 0, Err::InvalidArgument, "share allocations must be positive");
        allocated += a.shares;
    }
    require(allocated == n_shares, Err::InvalidArgument, "allocation must sum to n_shares");

    ClassId cls = ledger.register_class("pool-shares:" + std::to_string(id),
                                        TokenKind::fungible, n_shares);
    for (const ShareAllocation& a : allocation) ledger.mint_fungible(cls, a.holder, a.shares);
    p.scheme = SchemeKind::passthrough;
    p.share_class = cls;
    p.n_shares = n_shares;
    return cls;
}

std::vector<ClassId> Securitizer::issue_waterfall(Ledger& ledger, std::uint64_t id,
                                                  const std::vector<TrancheSpec>& specs) {
    Pool& p = pool_mut(id);
    require(p.scheme == SchemeKind::none, Err::InvalidArgument,
            "pool already has issued securities");
    require(!specs.empty(), Err::InvalidArgument, "waterfall needs at least one tranche");
    Money faces = 0;
    for (const TrancheSpec& s : specs) {
        require(s.face > 0, Err::ConfigInvalid, "tranche faces must be positive");
        faces += s.face;
    }
    require(faces == p.initial_principal, Err::ConfigInvalid,
            "tranche faces must sum to the pool principal");

    Rate default_coupon =
        Rate::from_nano(std::max<std::int64_t>(0, wac_.at(id).nano - strip_.nano));
    std::vector<ClassId> classes;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const TrancheSpec& s = specs[i];
        Tranche t;
        t.name = s.name;
        t.priority = static_cast<int>(i); // listing order is the seniority order
        t.face = s.face;
        t.outstanding = s.face;
        t.coupon = s.coupon.value_or(default_coupon);
        t.token_class = ledger.register_class(
            "tranche:" + std::to_string(id) + ":" + s.name, TokenKind::fungible, s.face);
        ledger.mint_fungible(t.token_class, p.owner, s.face);
        classes.push_back(t.token_class);
        p.tranches.push_back(std::move(t));
    }
    p.writedowns_this_period.assign(specs.size(), 0);
    p.scheme = SchemeKind::waterfall;
    return classes;
}

std::pair<ClassId, ClassId> Securitizer::issue_io_po(Ledger& ledger, std::uint64_t id,
                                                     Money io_shares, Money po_shares) {
    Pool& p = pool_mut(id);
    require(p.scheme == SchemeKind::none, Err::InvalidArgument,
            "pool already has issued securities");
    require(io_shares > 0 && po_shares > 0, Err::InvalidArgument,
            "share counts must be positive");
    p.io_class = ledger.register_class("pool-io:" + std::to_string(id), TokenKind::fungible,
                                       io_shares);
    p.po_class = ledger.register_class("pool-po:" + std::to_string(id), TokenKind::fungible,
                                       po_shares);
    ledger.mint_fungible(p.io_class, p.owner, io_shares);
    ledger.mint_fungible(p.po_class, p.owner, po_shares);
    p.scheme = SchemeKind::io_po;
    return {p.io_class, p.po_class};
}

void Securitizer::record(std::uint64_t id, const CollectionResult& r) {
    Pool& p = pool_mut(id);
    PoolCollections c = to_pool_collections(r);
    require(c.interest >= 0 && c.scheduled_principal >= 0 && c.prepaid_principal >= 0 &&
                c.recoveries >= 0,
            Err::InvalidArgument, "collection components must be non-negative");
    p.current += c;
}

void Securitizer::record_loss(std::uint64_t id, Money loss) {
    Pool& p = pool_mut(id);
    require(loss >= 0, Err::InvalidArgument, "loss must be non-negative");
    if (loss == 0) return;
    p.cumulative_loss += loss;
    if (p.scheme == SchemeKind::waterfall) {
        std::vector<Money> wd = allocate_losses(p.tranches, loss);
        for (std::size_t i = 0; i < wd.size(); ++i) p.writedowns_this_period[i] += wd[i];
    }
}

Money Securitizer::pay_class(Ledger& ledger, const Pool& p, ClassId cls, Money amount) {
    if (amount <= 0) return 0;
    const auto& balances = ledger.fungible_balances().at(cls);
    std::vector<AccountId> holders;
    std::vector<std::int64_t> weights;
    for (const auto& [account, held] : balances) {
        if (held <= 0) continue;
        holders.push_back(account);
        weights.push_back(held);
    }
    require(!holders.empty(), Err::InvariantViolated, "security class has no holders");
    std::vector<Money> shares = allocate_largest_remainder(amount, weights);
    Money paid = 0;
    for (std::size_t i = 0; i < holders.size(); ++i) {
        if (shares[i] <= 0 || holders[i] == p.account) continue;
        ledger.pay(p.account, holders[i], shares[i]);
        paid += shares[i];
    }
    return paid;
}

Securitizer::PeriodClose Securitizer::close_period(Ledger& ledger, const MortgageBook& book,
                                                   std::uint64_t id, std::int64_t t) {
    Pool& p = pool_mut(id);
    require(p.scheme != SchemeKind::none, Err::ConfigInvalid,
            "no securities issued against the pool");
    ledger.advance_time(std::max(ledger.now(), t));

    PeriodClose out;
    out.period = ++p.periods_closed;
    out.servicing = std::min(p.current.interest, period_interest(p.balance, strip_, 12));
    if (out.servicing > 0) ledger.pay(p.account, servicer_, out.servicing);
    PoolCollections net = p.current;
    net.interest -= out.servicing;
    out.collections = net;

    // Principal remaining across members, for the report and the next strip.
    Money member_balance = 0;
    for (std::uint64_t mid : p.members)
        member_balance += book.account(mid).state.notional_outstanding;

    auto& report = reports_.at(id);
    switch (p.scheme) {
    case SchemeKind::passthrough: {
        out.distributed = pay_class(ledger, p, p.share_class, net.total());
        report.push_back({out.period, "shares", net.interest, net.principal_total(), 0,
                          member_balance});
        break;
    }
    case SchemeKind::waterfall: {
        out.tranche_cash = distribute_waterfall(net, p.tranches, 12);
        for (std::size_t i = 0; i < p.tranches.size(); ++i) {
            out.tranche_cash[i].writedown = p.writedowns_this_period[i];
            Money cash =
                out.tranche_cash[i].interest_paid + out.tranche_cash[i].principal_paid;
            out.distributed += pay_class(ledger, p, p.tranches[i].token_class, cash);
            report.push_back({out.period, p.tranches[i].name,
                              out.tranche_cash[i].interest_paid,
                              out.tranche_cash[i].principal_paid,
                              p.writedowns_this_period[i], p.tranches[i].outstanding});
        }
        std::fill(p.writedowns_this_period.begin(), p.writedowns_this_period.end(), 0);
        break;
    }
    case SchemeKind::io_po: {
        std::tie(out.io, out.po) = split_io_po(net);
        out.distributed = pay_class(ledger, p, p.io_class, out.io) +
                          pay_class(ledger, p, p.po_class, out.po);
        report.push_back({out.period, "IO", out.io, 0, 0, member_balance});
        report.push_back({out.period, "PO", 0, out.po, 0, member_balance});
        break;
    }
    case SchemeKind::none:
        break;
    }

    p.current = {};
    p.balance = member_balance;
    return out;
}

} // namespace mbsdao
